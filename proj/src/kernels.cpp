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

#include "latgas/kernels.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "latgas/error.hpp"

namespace latgas {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

} // namespace

double compute_AM(int M, int d) {
  if (M < 1 || d < 1) throw InvalidParameters("compute_AM needs M >= 1, d >= 1");
  // sum over the cube of z_1^2 factorizes: (2M+1)^{d-1} * sum_{k=-M}^{M} k^2.
  double s1 = 0.0;
  for (int k = -M; k <= M; ++k) s1 += static_cast<double>(k) * k;
  return ipow(M, d + 2) / (ipow(2.0 * M + 1.0, d - 1) * s1);
}

double am_identity_residual(int M, int d) {
  const double scale = compute_AM(M, d) / ipow(M, d + 2);
  std::vector<double> S(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<int> z(d, -M);
  for (;;) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) S[i * d + j] += static_cast<double>(z[i]) * z[j];
    int k = 0;
    while (k < d && ++z[k] > M) z[k++] = -M;
    if (k == d) break;
  }
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) worst = std::max(worst, std::abs(scale * S[i * d + j] - (i == j ? 1.0 : 0.0)));
  return worst;
}

int derive_range(long N, double a, double b) {
  const double m = std::round(std::pow(static_cast<double>(N), 1.0 - a - b));
  return m < 1.0 ? 1 : static_cast<int>(m);
}

void JumpKernel::build_offsets() {
  offsets_.clear();
  std::vector<int> z(dim_, -M_);
  // Last coordinate slowest so that reflected(o) = count-1-o.
  for (;;) {
    offsets_.insert(offsets_.end(), z.begin(), z.end());
    int k = 0;
    while (k < dim_ && ++z[k] > M_) z[k++] = -M_;
    if (k == dim_) break;
  }
  zero_ = offsets() / 2;
}

JumpKernel JumpKernel::velocity_kernel(const VelocitySet& vs, int M, long N, double a, bool asymmetric) {
  if (M < 1 || N < 1) throw InvalidParameters("kernel needs M >= 1 and N >= 1");
  JumpKernel k;
  k.kind_ = Kind::velocity;
  k.dim_ = vs.dim();
  k.M_ = M;
  k.N_ = N;
  k.a_ = a;
  k.asymmetric_ = asymmetric;
  k.species_ = vs.size();
  k.AM_ = compute_AM(M, k.dim_);
  k.build_offsets();
  const double pre = k.AM_ / ipow(M, k.dim_ + 2);
  const double eps = asymmetric ? std::pow(static_cast<double>(N), -a) : 0.0;
  const std::size_t n = k.offsets();
  k.q_.resize(n * k.species_);
  k.rates_.resize(n * k.species_);
  k.sym_.resize(n * k.species_);
  for (std::size_t o = 0; o < n; ++o) {
    auto z = k.offset(o);
    for (std::size_t s = 0; s < k.species_; ++s) {
      double dot = 0.0;
      for (int i = 0; i < k.dim_; ++i) dot += z[i] * vs.component(s, i);
      const double q = dot / M;
      const double inner = 2.0 + eps * q;
      if (inner < 0.0)
        throw NegativeRateError("jump rate negative at z-index " + std::to_string(o) + ", velocity " +
                                std::to_string(s) + ": increase N or decrease a");
      k.q_[o * k.species_ + s] = q;
      k.rates_[o * k.species_ + s] = pre * inner;
      k.sym_[o * k.species_ + s] = pre * 2.0;
    }
  }
  return k;
}

JumpKernel JumpKernel::sign_kernel(std::span<const double> drift, int M, long N, double a, bool asymmetric) {
  if (M < 1 || N < 1) throw InvalidParameters("kernel needs M >= 1 and N >= 1");
  if (drift.empty()) throw InvalidParameters("sign kernel needs a drift direction");
  JumpKernel k;
  k.kind_ = Kind::sign;
  k.dim_ = static_cast<int>(drift.size());
  k.M_ = M;
  k.N_ = N;
  k.a_ = a;
  k.asymmetric_ = asymmetric;
  k.species_ = 1;
  k.drift_.assign(drift.begin(), drift.end());
  k.AM_ = compute_AM(M, k.dim_);
  k.build_offsets();
  const double pre = 1.0 / ipow(M, k.dim_ + 2);
  const double eps = asymmetric ? std::pow(static_cast<double>(N), -a) : 0.0;
  const std::size_t n = k.offsets();
  k.q_.resize(n);
  k.rates_.resize(n);
  k.sym_.resize(n);
  for (std::size_t o = 0; o < n; ++o) {
    auto z = k.offset(o);
    double dot = 0.0;
    for (int i = 0; i < k.dim_; ++i) dot += z[i] * drift[i];
    const double q = dot > 0 ? 1.0 : (dot < 0 ? -1.0 : 0.0);
    const double inner = 2.0 * k.AM_ + eps * q;
    if (inner < 0.0) throw NegativeRateError("sign kernel rate negative: increase N or decrease a");
    k.q_[o] = q;
    k.rates_[o] = pre * inner;
    k.sym_[o] = pre * 2.0 * k.AM_;
  }
  return k;
}

double JumpKernel::total_rate(std::size_t s) const {
  double t = 0.0;
  for (std::size_t o = 0; o < offsets(); ++o)
    if (o != zero_) t += rate(o, s);
  return t;
}

std::vector<double> JumpKernel::mean_displacement(std::size_t s) const {
  std::vector<double> m(dim_, 0.0);
  for (std::size_t o = 0; o < offsets(); ++o) {
    auto z = offset(o);
    for (int i = 0; i < dim_; ++i) m[i] += z[i] * rate(o, s);
  }
  return m;
}

std::vector<double> JumpKernel::gammaM() const {
  std::vector<double> g(dim_, 0.0);
  for (std::size_t o = 0; o < offsets(); ++o) {
    auto z = offset(o);
    for (int i = 0; i < dim_; ++i) g[i] += z[i] * q(o, 0);
  }
  for (auto& x : g) x /= ipow(M_, dim_ + 1);
  return g;
}

std::vector<double> JumpKernel::drift_identity(std::size_t s) const {
  std::vector<double> m(dim_, 0.0);
  for (std::size_t o = 0; o < offsets(); ++o) {
    auto z = offset(o);
    for (int i = 0; i < dim_; ++i) m[i] += q(o, s) * z[i];
  }
  const double pre = AM_ / ipow(M_, dim_ + 1);
  for (auto& x : m) x *= pre;
  return m;
}

nlohmann::json JumpKernel::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_ == Kind::velocity ? "velocity" : "sign";
  j["dim"] = dim_;
  j["M"] = M_;
  j["N"] = N_;
  j["a"] = a_;
  j["asymmetric"] = asymmetric_;
  j["species"] = species_;
  j["A_M"] = AM_;
  j["drift"] = drift_;
  j["q"] = q_;
  j["rates"] = rates_;
  j["symmetric"] = sym_;
  return j;
}

JumpKernel JumpKernel::from_json(const nlohmann::json& j) {
  JumpKernel k;
  k.kind_ = j.at("kind").get<std::string>() == "sign" ? Kind::sign : Kind::velocity;
  k.dim_ = j.at("dim").get<int>();
  k.M_ = j.at("M").get<int>();
  k.N_ = j.at("N").get<long>();
  k.a_ = j.at("a").get<double>();
  k.asymmetric_ = j.at("asymmetric").get<bool>();
  k.species_ = j.at("species").get<std::size_t>();
  k.AM_ = j.at("A_M").get<double>();
  k.drift_ = j.at("drift").get<std::vector<double>>();
  k.q_ = j.at("q").get<std::vector<double>>();
  k.rates_ = j.at("rates").get<std::vector<double>>();
  k.sym_ = j.at("symmetric").get<std::vector<double>>();
  k.build_offsets();
  if (k.rates_.size() != k.offsets() * k.species_) throw IoError("kernel table has wrong size");
  return k;
}

void JumpKernel::write_csv(std::ostream& os) const {
  for (int i = 0; i < dim_; ++i) os << "z" << i + 1 << ",";
  os << "velocity,rate\n";
  os.precision(17);
  for (std::size_t o = 0; o < offsets(); ++o) {
    auto z = offset(o);
    for (std::size_t s = 0; s < species_; ++s) {
      for (int i = 0; i < dim_; ++i) os << z[i] << ",";
      os << s << "," << rate(o, s) << "\n";
    }
  }
}

} // namespace latgas
