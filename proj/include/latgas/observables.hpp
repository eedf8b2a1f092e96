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

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "latgas/kernels.hpp"
#include "latgas/lattice.hpp"

namespace latgas {

using TestFunction = std::function<double(std::span<const double>)>;

/// Per-site values of conserved channel k (0 = mass).
std::vector<double> channel_field(const LatticeConfig& cfg, std::size_t k);

/// N^{-d} sum_x I_k(eta_x) H(x/N).
double pair(const LatticeConfig& cfg, std::size_t k, const TestFunction& H);

/// N^{-d} sum_x I_k(eta_x) exp(2 pi i n.x/N), computed by direct summation.
std::complex<double> fourier_pair(const LatticeConfig& cfg, std::size_t k, std::span<const int> n);
/// The same coefficient for an arbitrary site field.
std::complex<double> fourier_coefficient(const Torus& torus, std::span<const double> field, std::span<const int> n);

/// Fluctuation field N^b (I_0 - a0) and N^b I_k, k >= 1, stored per site.
struct EmpiricalField {
  Torus torus;
  double b = 0.0;
  std::vector<std::vector<double>> channels;

  /// <Pi^k, H> = N^{-d} sum_x channels[k][x] H(x/N).
  double pair(std::size_t k, const TestFunction& H) const;
  std::complex<double> fourier(std::size_t k, std::span<const int> n) const;
};

EmpiricalField corrected_field(const LatticeConfig& cfg, double b, double a0);

/// Microscopic current at site x along axis j (0-based). weight_channel 0
/// sums over velocities with weight 1, k >= 1 with weight v_k. Velocity
/// kernels use A_M/M^{d+1}; sign kernels use 1/M^{d+1}. `reflected`
/// evaluates the kernel at -z.
double current_W(const LatticeConfig& cfg, const JumpKernel& kernel, std::size_t weight_channel, int j,
                 std::size_t x, bool reflected = false);
inline double current_Wstar(const LatticeConfig& cfg, const JumpKernel& kernel, std::size_t weight_channel, int j,
                            std::size_t x) {
  return current_W(cfg, kernel, weight_channel, j, x, true);
}

/// A_M/M^{d+2} sum_v v_k v_l sum_z z_i z_j eta(x,v)(1-eta(x+z,v)); with k = l = 0
/// meaning weight 1 (the scalar form). Hatted versions subtract the value at
/// the symmetric equilibrium.
double current_V(const LatticeConfig& cfg, const JumpKernel& kernel, int i, int j, std::size_t k, std::size_t l,
                 std::size_t x);
double current_Vhat(const LatticeConfig& cfg, const JumpKernel& kernel, int i, int j, std::size_t k, std::size_t l,
                    std::size_t x, double B);

} // namespace latgas
