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
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "latgas/velocity.hpp"

namespace latgas {

/// A_M = M^{d+2} / sum_{z in {-M..M}^d} z_1^2.
double compute_AM(int M, int d);

/// Maximum over (i,j) of |A_M/M^{d+2} sum_z z_i z_j - delta_ij|, by literal summation.
double am_identity_residual(int M, int d);

/// Range from the scaling relation M = N^{1-a-b}, rounded, at least 1.
int derive_range(long N, double a, double b);

/// Jump rate table over the cube {-M..M}^d. The velocity kind has one column
/// per velocity with rate A_M/M^{d+2} (2 + N^{-a} (z.v)/M); the sign kind has a
/// single column with rate M^{-(d+2)} (2 A_M + N^{-a} sign(z.v)).
class JumpKernel {
public:
  enum class Kind { velocity, sign };

  static JumpKernel velocity_kernel(const VelocitySet& vs, int M, long N, double a, bool asymmetric = true);
  static JumpKernel sign_kernel(std::span<const double> drift, int M, long N, double a, bool asymmetric = true);

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  int range() const noexcept { return M_; }
  long scale() const noexcept { return N_; }
  double exponent() const noexcept { return a_; }
  double AM() const noexcept { return AM_; }
  bool asymmetric() const noexcept { return asymmetric_; }
  std::size_t species() const noexcept { return species_; }

  /// Offsets of the cube in lexicographic order; offset(o) has dim() entries.
  std::size_t offsets() const noexcept { return offsets_.size() / static_cast<std::size_t>(dim_); }
  std::span<const int> offset(std::size_t o) const {
    return {offsets_.data() + o * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::size_t zero_offset() const noexcept { return zero_; }

  double rate(std::size_t o, std::size_t s) const { return rates_[o * species_ + s]; }
  double symmetric_rate(std::size_t o, std::size_t s) const { return sym_[o * species_ + s]; }
  double antisymmetric_rate(std::size_t o, std::size_t s) const { return rate(o, s) - symmetric_rate(o, s); }
  /// Bounded weight q(z, s): q_M(z,v) = (z.v)/M or sign(z.v).
  double q(std::size_t o, std::size_t s) const { return q_[o * species_ + s]; }
  /// Index of the offset -z.
  std::size_t reflected(std::size_t o) const { return offsets() - 1 - o; }

  /// Sum of rates over nonzero offsets for one species.
  double total_rate(std::size_t s) const;
  /// sum_z z p(z, s).
  std::vector<double> mean_displacement(std::size_t s) const;
  /// gamma^M_j = M^{-(d+1)} sum_z z_j q(z) (sign kernel).
  std::vector<double> gammaM() const;
  /// A_M/M^{d+1} sum_z q(z,s) z_i, which equals v_i for the velocity kernel.
  std::vector<double> drift_identity(std::size_t s) const;

  nlohmann::json to_json() const;
  static JumpKernel from_json(const nlohmann::json& j);
  void write_csv(std::ostream& os) const;

private:
  JumpKernel() = default;
  void build_offsets();

  Kind kind_ = Kind::velocity;
  int dim_ = 1;
  int M_ = 1;
  long N_ = 1;
  double a_ = 0.0;
  double AM_ = 0.0;
  bool asymmetric_ = true;
  std::size_t species_ = 1;
  std::size_t zero_ = 0;
  std::vector<double> drift_; // sign kind: the fixed vector v
  std::vector<int> offsets_;
  std::vector<double> q_, rates_, sym_;
};

} // namespace latgas
