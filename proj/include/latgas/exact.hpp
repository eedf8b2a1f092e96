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

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace latgas {

/// A real number of the form a + b*w, with w the (possibly irrational)
/// generator of the velocity set. For integer-valued sets b is always 0.
struct ExactCoord {
  std::int64_t a = 0;
  std::int64_t b = 0;

  constexpr ExactCoord operator+(ExactCoord o) const { return {a + o.a, b + o.b}; }
  constexpr ExactCoord operator-(ExactCoord o) const { return {a - o.a, b - o.b}; }
  constexpr ExactCoord operator-() const { return {-a, -b}; }
  constexpr ExactCoord& operator+=(ExactCoord o) {
    a += o.a;
    b += o.b;
    return *this;
  }
  constexpr ExactCoord& operator-=(ExactCoord o) {
    a -= o.a;
    b -= o.b;
    return *this;
  }
  constexpr ExactCoord scaled(std::int64_t k) const { return {a * k, b * k}; }
  constexpr auto operator<=>(const ExactCoord&) const = default;

  double value(double w) const { return static_cast<double>(a) + static_cast<double>(b) * w; }
};

/// Exact conserved totals: mass I_0 and momentum components I_1..I_d.
/// Scalar (single-species) systems carry an empty momentum vector.
struct ConservedVector {
  std::int64_t mass = 0;
  std::vector<ExactCoord> momentum;

  ConservedVector() = default;
  explicit ConservedVector(std::size_t dim) : momentum(dim) {}
  ConservedVector(std::int64_t m, std::vector<ExactCoord> p) : mass(m), momentum(std::move(p)) {}

  ConservedVector& operator+=(const ConservedVector& o);
  ConservedVector& operator-=(const ConservedVector& o);
  friend ConservedVector operator+(ConservedVector x, const ConservedVector& y) { return x += y; }
  friend ConservedVector operator-(ConservedVector x, const ConservedVector& y) { return x -= y; }
  ConservedVector scaled(std::int64_t k) const;

  bool operator==(const ConservedVector&) const = default;
  auto operator<=>(const ConservedVector&) const = default;

  /// (I_0, I_1, ..., I_d) as doubles, resolving a + b*w with the given w.
  std::vector<double> values(double w) const;

  /// Flattened integer key (mass, a_1, b_1, ..., a_d, b_d).
  std::vector<std::int64_t> key() const;
  static ConservedVector from_key(const std::vector<std::int64_t>& key);

  std::string to_string() const;
};

struct ConservedVectorHash {
  std::size_t operator()(const ConservedVector& c) const noexcept;
};

} // namespace latgas
