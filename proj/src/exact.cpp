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

#include "latgas/exact.hpp"

#include <sstream>

namespace latgas {

ConservedVector& ConservedVector::operator+=(const ConservedVector& o) {
  mass += o.mass;
  if (momentum.size() < o.momentum.size()) momentum.resize(o.momentum.size());
  for (std::size_t k = 0; k < o.momentum.size(); ++k) momentum[k] += o.momentum[k];
  return *this;
}

ConservedVector& ConservedVector::operator-=(const ConservedVector& o) {
  mass -= o.mass;
  if (momentum.size() < o.momentum.size()) momentum.resize(o.momentum.size());
  for (std::size_t k = 0; k < o.momentum.size(); ++k) momentum[k] -= o.momentum[k];
  return *this;
}

ConservedVector ConservedVector::scaled(std::int64_t k) const {
  ConservedVector out(mass * k, momentum);
  for (auto& c : out.momentum) c = c.scaled(k);
  return out;
}

std::vector<double> ConservedVector::values(double w) const {
  std::vector<double> out;
  out.reserve(momentum.size() + 1);
  out.push_back(static_cast<double>(mass));
  for (const auto& c : momentum) out.push_back(c.value(w));
  return out;
}

std::vector<std::int64_t> ConservedVector::key() const {
  std::vector<std::int64_t> k;
  k.reserve(1 + 2 * momentum.size());
  k.push_back(mass);
  for (const auto& c : momentum) {
    k.push_back(c.a);
    k.push_back(c.b);
  }
  return k;
}

ConservedVector ConservedVector::from_key(const std::vector<std::int64_t>& key) {
  ConservedVector out;
  if (key.empty()) return out;
  out.mass = key[0];
  for (std::size_t i = 1; i + 1 < key.size(); i += 2) out.momentum.push_back({key[i], key[i + 1]});
  return out;
}

std::string ConservedVector::to_string() const {
  std::ostringstream os;
  os << "(" << mass;
  for (const auto& c : momentum) {
    os << ", ";
    if (c.b == 0)
      os << c.a;
    else
      os << c.a << (c.b < 0 ? "-" : "+") << (c.b < 0 ? -c.b : c.b) << "w";
  }
  os << ")";
  return os.str();
}

std::size_t ConservedVectorHash::operator()(const ConservedVector& c) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(c.mass);
  auto mix = [&h](std::int64_t v) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (const auto& m : c.momentum) {
    mix(m.a);
    mix(m.b);
  }
  return static_cast<std::size_t>(h);
}

} // namespace latgas
