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
#include <vector>

#include <Eigen/Dense>

#include "latgas/velocity.hpp"

namespace latgas {

/// (lambda_0, lambda_1, ..., lambda_d): mass potential then momentum potentials.
using ChemicalPotential = std::vector<double>;

struct HydroPoint {
  double rho = 0.0;
  std::vector<double> p;

  std::vector<double> flat() const;
  static HydroPoint from_flat(std::span<const double> x);
};

inline double logistic(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Mean occupation of velocity i under the product measure with potential lambda.
double theta(const ChemicalPotential& lambda, const VelocitySet& vs, std::size_t i);
std::vector<double> theta_all(const ChemicalPotential& lambda, const VelocitySet& vs);

HydroPoint hydro_of_lambda(const ChemicalPotential& lambda, const VelocitySet& vs);

/// Derivative of (rho, p) with respect to lambda: the covariance of
/// (I_0, I_1, ..., I_d) under the single-site product measure.
Eigen::MatrixXd hydro_jacobian(const ChemicalPotential& lambda, const VelocitySet& vs);

struct NewtonOptions {
  double tolerance = 1e-12;
  int max_iterations = 100;
};

/// Inverse of hydro_of_lambda by damped Newton from lambda = 0. Throws
/// InversionError when the target is outside the admissible region or the
/// iteration stalls.
ChemicalPotential lambda_of_hydro(const HydroPoint& target, const VelocitySet& vs,
                                  const NewtonOptions& opt = {});

inline double chi(double a) { return a * (1.0 - a); }

/// R_{jk} = -sum_v v_k v_j chi(theta_v(Lambda(x))); a d x d symmetric matrix.
Eigen::MatrixXd current_R(const HydroPoint& x, const VelocitySet& vs);

struct CanonicalCurrent {
  std::vector<double> F;  ///< F_j
  Eigen::MatrixXd Fij;    ///< F_{i,j}
};

/// Expectations of the canonical currents at block density beta on a cube of
/// side 2M+1 in dimension gammaM.size().
CanonicalCurrent canonical_current_F(double beta, int M, const std::vector<double>& gammaM);

/// KL divergence of Bernoulli(p) from Bernoulli(q).
double bernoulli_kl(double p, double q);

/// Relative entropy of a product Bernoulli measure (densities nu2) with respect
/// to another (densities nu1); both lists indexed by (site, velocity).
double entropy_product(std::span<const double> nu2, std::span<const double> nu1);

} // namespace latgas
