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

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "latgas/velocity.hpp"

namespace latgas {

/// Real fields on the uniform grid of the unit torus [0,1)^d with n points
/// per axis. Index order is row-major with the last axis fastest.
struct GridField {
  int n = 0;
  int d = 1;
  double t = 0.0;
  std::vector<std::vector<double>> comp;

  GridField() = default;
  GridField(int n, int d, int components);
  std::size_t points() const;
  std::array<double, 3> position(std::size_t i) const;
  /// Sets every component from a function of (component, position).
  void fill(const std::function<double(int, std::span<const double>)>& f);
};

/// Real-to-complex transforms on the grid plus wavevector bookkeeping.
class SpectralGrid {
public:
  SpectralGrid(int n, int d);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }
  std::size_t real_size() const noexcept { return real_; }
  std::size_t spectral_size() const noexcept { return spec_; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Normalized inverse.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;
  /// Integer wavevector of spectral index c.
  std::array<int, 3> wave(std::size_t c) const { return waves_[c]; }
  /// True when the mode survives the 2/3 truncation.
  bool kept(std::size_t c) const { return kept_[c]; }
  /// Largest |k|^2 among kept modes.
  double kmax2() const noexcept { return kmax2_; }

private:
  int n_, d_;
  std::size_t real_, spec_;
  std::vector<std::array<int, 3>> waves_;
  std::vector<char> kept_;
  double kmax2_ = 0.0;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

struct PdeResult {
  GridField field;
  double dt = 0.0;
  long steps = 0;
  double max_divergence = 0.0;    ///< max over steps of the grid divergence
  double max_mass_change = 0.0;   ///< max per-step change of any component mean
};

/// Largest stable RK4 step for a given maximal |k|^2 and advection speed.
double stable_step(double kmax2, double speed);

/// d phi/dt = gamma . grad(phi^2) + Laplacian phi. dt <= 0 picks a stable step.
PdeResult solve_scalar(const GridField& phi0, const std::vector<double>& gamma, double T, double dt = 0.0);

/// d phi_l/dt = A0 d_l phi_l^2 + A1 phi.grad phi_l + A2 d_l |phi|^2 + Laplacian phi_l,
/// with the nonlinear term projected onto divergence-free fields unless
/// `projected` is false.
PdeResult solve_ns(const GridField& phi0, const NSCoefficients& c, double T, double dt = 0.0, bool projected = true);

/// Max over the grid of |div phi| computed spectrally.
double divergence_norm(const GridField& phi);

/// Components (rho, p_1..p_d):
///   d rho/dt + s sum_v v.grad chi(theta_v) = Laplacian rho,
///   d p_j/dt + s sum_v v_j v.grad chi(theta_v) = Laplacian p_j,
/// with theta_v evaluated at Lambda(rho, p). Throws InversionError if the
/// state leaves the admissible region.
PdeResult solve_full_hydro(const GridField& state0, const VelocitySet& vs, double stiffness, double T,
                           double dt = 0.0);

/// Fourier coefficient (1/n^d) sum f(u) exp(2 pi i k.u) of one component.
std::complex<double> grid_mode(const GridField& f, int component, std::span<const int> k);

} // namespace latgas
