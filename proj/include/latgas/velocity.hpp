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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "latgas/exact.hpp"

namespace latgas {

/// Largest velocity family supported; a site's occupation is a 32-bit mask.
inline constexpr std::size_t kMaxVelocities = 32;

/// Finite velocity family V in R^d, closed under coordinate reflections and
/// permutations. Each coordinate is also kept exactly as a + b*w, where w is
/// the irrational generator of Model II (0 for integer sets).
class VelocitySet {
public:
  /// {+-e_1, ..., +-e_d}.
  static VelocitySet model_one(int dim);
  /// The 24 signed permutations of (1, 1, w), w = sqrt(3 + sqrt(10)).
  static VelocitySet model_two();
  /// User-supplied family. Every coordinate must be an integer or an integer
  /// multiple of `irrational`; symmetry is validated.
  static VelocitySet from_vectors(int dim, const std::vector<std::vector<double>>& vectors,
                                  double irrational = 0.0, std::string name = "custom");

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return count_; }
  double irrational() const noexcept { return irrational_; }
  const std::string& name() const noexcept { return name_; }

  std::span<const double> velocity(std::size_t i) const {
    return {values_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double component(std::size_t i, int k) const { return values_[i * dim_ + k]; }
  ExactCoord exact_component(std::size_t i, int k) const { return exact_[i * dim_ + k]; }

  /// Index of the velocity with the given exact coordinates, or size() if absent.
  std::size_t find(std::span<const ExactCoord> coords) const;

  nlohmann::json to_json() const;
  static VelocitySet from_json(const nlohmann::json& j);

private:
  VelocitySet(int dim, std::vector<ExactCoord> exact, double irrational, std::string name);
  void validate_symmetry() const;

  int dim_ = 0;
  std::size_t count_ = 0;
  double irrational_ = 0.0;
  std::string name_;
  std::vector<ExactCoord> exact_;
  std::vector<double> values_;
};

/// w = sqrt(3 + sqrt(10)), the positive root of w^4 - 6 w^2 - 1.
double model_two_generator();

struct MomentTable {
  double B = 0.0;  ///< sum_v v_1^2
  double C = 0.0;  ///< sum_v v_1^2 v_2^2 (0 when d = 1)
  double D = 0.0;  ///< sum_v v_1^4
  double a0 = 0.0; ///< |V| / 2
};

/// Moments by literal summation. Verifies the rank-2 isotropy identity and the
/// rank-4 identities for every index tuple; throws SymmetryError beyond 1e-12.
MomentTable moments(const VelocitySet& vs);

/// Coefficients of the limiting incompressible equation.
struct NSCoefficients {
  double A0 = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
};

NSCoefficients ns_coefficients(const MomentTable& mt);

/// Ordered quadruple of velocity indices (v, w, v', w') with v + w = v' + w'.
struct CollisionQuadruple {
  std::size_t v = 0, w = 0, vp = 0, wp = 0;
  bool operator==(const CollisionQuadruple&) const = default;
  auto operator<=>(const CollisionQuadruple&) const = default;
};

/// All nondegenerate momentum-preserving quadruples in lexicographic order.
/// Quadruples sharing a velocity between the pairs, or repeating one inside a
/// pair, never fire and are omitted.
std::vector<CollisionQuadruple> collision_quadruples(const VelocitySet& vs);

} // namespace latgas
