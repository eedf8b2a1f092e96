/*
 *   Copyright 2026 The latgas Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#include "latgas/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "latgas/error.hpp"

namespace latgas {

double model_two_generator() { return std::sqrt(3.0 + std::sqrt(10.0)); }

VelocitySet::VelocitySet(int dim, std::vector<ExactCoord> exact, double irrational, std::string name)
    : dim_(dim), irrational_(irrational), name_(std::move(name)), exact_(std::move(exact)) {
  if (dim_ < 1) throw InvalidParameters("velocity set dimension must be >= 1");
  count_ = exact_.size() / static_cast<std::size_t>(dim_);
  if (count_ == 0) throw InvalidParameters("velocity set is empty");
  if (count_ > kMaxVelocities)
    throw InvalidParameters("velocity set has " + std::to_string(count_) + " vectors; at most 32 supported");
  values_.resize(exact_.size());
  for (std::size_t i = 0; i < exact_.size(); ++i) values_[i] = exact_[i].value(irrational_);
  validate_symmetry();
}

VelocitySet VelocitySet::model_one(int dim) {
  if (dim < 1) throw InvalidParameters("model I needs d >= 1");
  std::vector<ExactCoord> ex;
  for (int k = 0; k < dim; ++k) {
    for (int s : {+1, -1}) {
      for (int j = 0; j < dim; ++j) ex.push_back({j == k ? s : 0, 0});
    }
  }
  return VelocitySet(dim, std::move(ex), 0.0, "model1");
}

VelocitySet VelocitySet::model_two() {
  // Position of the w coordinate, then the signs of the three coordinates.
  std::vector<ExactCoord> ex;
  for (int pos = 0; pos < 3; ++pos) {
    for (int signs = 0; signs < 8; ++signs) {
      for (int k = 0; k < 3; ++k) {
        const int s = (signs >> k) & 1 ? -1 : 1;
        ex.push_back(k == pos ? ExactCoord{0, s} : ExactCoord{s, 0});
      }
    }
  }
  return VelocitySet(3, std::move(ex), model_two_generator(), "model2");
}

VelocitySet VelocitySet::from_vectors(int dim, const std::vector<std::vector<double>>& vectors,
                                      double irrational, std::string name) {
  std::vector<ExactCoord> ex;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != dim) throw InvalidParameters("velocity has wrong dimension");
    for (double c : v) {
      bool found = false;
      // Smallest |b| first so that integer coordinates stay integer.
      for (int mag = 0; mag <= 16 && !found; ++mag) {
        for (int b : {mag, -mag}) {
          if (b != 0 && irrational == 0.0) continue;
          const double rest = c - b * irrational;
          const double a = std::round(rest);
          if (std::abs(rest - a) < 1e-9) {
            ex.push_back({static_cast<std::int64_t>(a), b});
            found = true;
            break;
          }
        }
      }
      if (!found)
        throw InvalidParameters("velocity coordinate " + std::to_string(c) +
                                " is not of the form a + b*w with small integers a, b");
    }
  }
  return VelocitySet(dim, std::move(ex), irrational, std::move(name));
}

std::size_t VelocitySet::find(std::span<const ExactCoord> coords) const {
  for (std::size_t i = 0; i < count_; ++i) {
    if (std::equal(coords.begin(), coords.end(), exact_.begin() + static_cast<std::ptrdiff_t>(i * dim_)))
      return i;
  }
  return count_;
}

void VelocitySet::validate_symmetry() const {
  std::vector<ExactCoord> img(dim_);
  for (std::size_t i = 0; i < count_; ++i) {
    auto base = exact_.begin() + static_cast<std::ptrdiff_t>(i * dim_);
    for (std::size_t j = i + 1; j < count_; ++j) {
      if (std::equal(base, base + dim_, exact_.begin() + static_cast<std::ptrdiff_t>(j * dim_)))
        throw SymmetryError("duplicate velocity at index " + std::to_string(j));
    }
    for (int k = 0; k < dim_; ++k) {
      std::copy(base, base + dim_, img.begin());
      img[k] = -img[k];
      if (find(img) == count_)
        throw SymmetryError("velocity set not closed under reflection of coordinate " + std::to_string(k));
      for (int l = k + 1; l < dim_; ++l) {
        std::copy(base, base + dim_, img.begin());
        std::swap(img[k], img[l]);
        if (find(img) == count_) throw SymmetryError("velocity set not closed under coordinate permutation");
      }
    }
  }
}

nlohmann::json VelocitySet::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["dim"] = dim_;
  j["irrational"] = irrational_;
  auto vecs = nlohmann::json::array();
  auto exact = nlohmann::json::array();
  for (std::size_t i = 0; i < count_; ++i) {
    auto v = velocity(i);
    vecs.push_back(std::vector<double>(v.begin(), v.end()));
    auto e = nlohmann::json::array();
    for (int k = 0; k < dim_; ++k) e.push_back({exact_component(i, k).a, exact_component(i, k).b});
    exact.push_back(e);
  }
  j["vectors"] = vecs;
  j["exact"] = exact;
  return j;
}

VelocitySet VelocitySet::from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  const double irr = j.value("irrational", 0.0);
  const std::string name = j.value("name", std::string("custom"));
  if (j.contains("exact")) {
    std::vector<ExactCoord> ex;
    for (const auto& v : j.at("exact")) {
      if (static_cast<int>(v.size()) != dim) throw InvalidParameters("velocity has wrong dimension");
      for (const auto& c : v) ex.push_back({c.at(0).get<std::int64_t>(), c.at(1).get<std::int64_t>()});
    }
    return VelocitySet(dim, std::move(ex), irr, name);
  }
  return from_vectors(dim, j.at("vectors").get<std::vector<std::vector<double>>>(), irr, name);
}

MomentTable moments(const VelocitySet& vs) {
  const int d = vs.dim();
  const std::size_t n = vs.size();
  MomentTable mt;
  for (std::size_t i = 0; i < n; ++i) {
    const double v1 = vs.component(i, 0);
    mt.B += v1 * v1;
    mt.D += v1 * v1 * v1 * v1;
    if (d >= 2) {
      const double v2 = vs.component(i, 1);
      mt.C += v1 * v1 * v2 * v2;
    }
  }
  mt.a0 = static_cast<double>(n) / 2.0;

  const double tol = 1e-12 * std::max(1.0, mt.D);
  auto fail = [](const std::string& what) { throw SymmetryError("moment identity violated: " + what); };
  for (int k = 0; k < d; ++k) {
    double first = 0.0;
    for (std::size_t i = 0; i < n; ++i) first += vs.component(i, k);
    if (std::abs(first) > tol) fail("sum of v_" + std::to_string(k) + " nonzero");
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += vs.component(i, k) * vs.component(i, j);
      if (std::abs(s - (k == j ? mt.B : 0.0)) > tol) fail("second moment");
    }
  }
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        for (int q = 0; q < d; ++q) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            s += vs.component(i, k) * vs.component(i, l) * vs.component(i, m) * vs.component(i, q);
          double expect;
          if (k != l)
            expect = mt.C * ((m == k && q == l ? 1.0 : 0.0) + (m == l && q == k ? 1.0 : 0.0));
          else
            expect = m != q ? 0.0 : (m == k ? mt.D : mt.C);
          if (std::abs(s - expect) > tol) fail("fourth moment");
        }
  if (!(mt.B > 0.0) || !(mt.D > 0.0) || mt.C < 0.0 || mt.C > mt.D + tol) fail("moment ordering");
  return mt;
}

NSCoefficients ns_coefficients(const MomentTable& mt) {
  if (!(mt.B > 0.0)) throw InvalidParameters("B must be positive");
  const double b2 = mt.B * mt.B;
  return {(mt.D - 3.0 * mt.C) / b2, 2.0 * mt.C / b2, mt.C / b2};
}

std::vector<CollisionQuadruple> collision_quadruples(const VelocitySet& vs) {
  const std::size_t n = vs.size();
  const int d = vs.dim();
  // Pair sums keyed exactly, so irrational sets never merge distinct sums.
  std::map<std::vector<ExactCoord>, std::vector<std::pair<std::size_t, std::size_t>>> by_sum;
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = 0; w < n; ++w) {
      if (v == w) continue;
      std::vector<ExactCoord> s(d);
      for (int k = 0; k < d; ++k) s[k] = vs.exact_component(v, k) + vs.exact_component(w, k);
      by_sum[s].push_back({v, w});
    }
  std::vector<CollisionQuadruple> out;
  for (const auto& [sum, pairs] : by_sum) {
    for (const auto& [v, w] : pairs)
      for (const auto& [vp, wp] : pairs) {
        if (vp == v || vp == w || wp == v || wp == w) continue;
        out.push_back({v, w, vp, wp});
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace latgas
