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

#include "latgas/thermo.hpp"

#include <cmath>

#include "latgas/error.hpp"

namespace latgas {

std::vector<double> HydroPoint::flat() const {
  std::vector<double> x{rho};
  x.insert(x.end(), p.begin(), p.end());
  return x;
}

HydroPoint HydroPoint::from_flat(std::span<const double> x) {
  HydroPoint h;
  h.rho = x[0];
  h.p.assign(x.begin() + 1, x.end());
  return h;
}

namespace {

double exponent(const ChemicalPotential& lambda, const VelocitySet& vs, std::size_t i) {
  double s = lambda.at(0);
  for (int k = 0; k < vs.dim(); ++k) s += lambda.at(k + 1) * vs.component(i, k);
  return s;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_size(const ChemicalPotential& lambda, const VelocitySet& vs) {
  if (lambda.size() != static_cast<std::size_t>(vs.dim()) + 1)
    throw InvalidParameters("chemical potential must have d+1 entries");
}

} // namespace

double theta(const ChemicalPotential& lambda, const VelocitySet& vs, std::size_t i) {
  check_size(lambda, vs);
  return logistic(exponent(lambda, vs, i));
}

std::vector<double> theta_all(const ChemicalPotential& lambda, const VelocitySet& vs) {
  check_size(lambda, vs);
  std::vector<double> t(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) t[i] = logistic(exponent(lambda, vs, i));
  return t;
}

HydroPoint hydro_of_lambda(const ChemicalPotential& lambda, const VelocitySet& vs) {
  const auto t = theta_all(lambda, vs);
  HydroPoint h;
  h.p.assign(vs.dim(), 0.0);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    h.rho += t[i];
    for (int k = 0; k < vs.dim(); ++k) h.p[k] += vs.component(i, k) * t[i];
  }
  return h;
}

Eigen::MatrixXd hydro_jacobian(const ChemicalPotential& lambda, const VelocitySet& vs) {
  const int d = vs.dim();
  const auto t = theta_all(lambda, vs);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d + 1, d + 1);
  Eigen::VectorXd u(d + 1);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    u[0] = 1.0;
    for (int k = 0; k < d; ++k) u[k + 1] = vs.component(i, k);
    J += chi(t[i]) * u * u.transpose();
  }
  return J;
}

ChemicalPotential lambda_of_hydro(const HydroPoint& target, const VelocitySet& vs, const NewtonOptions& opt) {
  const int d = vs.dim();
  if (target.p.size() != static_cast<std::size_t>(d)) throw InvalidParameters("momentum target has wrong size");
  if (!(target.rho > 0.0 && target.rho < static_cast<double>(vs.size())))
    throw InversionError("density " + std::to_string(target.rho) + " outside (0, |V|)");
  Eigen::VectorXd x(d + 1);
  x[0] = target.rho;
  for (int k = 0; k < d; ++k) x[k + 1] = target.p[k];

  // Phi(lambda) = sum_v softplus(lambda . u_v) - lambda . x is strictly convex
  // with gradient hydro_of_lambda(lambda) - x.
  auto phi = [&](const Eigen::VectorXd& l) {
    double s = -l.dot(x);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      double e = l[0];
      for (int k = 0; k < d; ++k) e += l[k + 1] * vs.component(i, k);
      s += softplus(e);
    }
    return s;
  };
  auto residual = [&](const Eigen::VectorXd& l) {
    ChemicalPotential lv(l.data(), l.data() + l.size());
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(hydro_of_lambda(lv, vs).flat().data(), d + 1) - x;
    return r;
  };

  // Saturated occupations drive the residual to zero without a true
  // solution; a near-singular covariance marks the boundary.
  auto accept = [&](const Eigen::VectorXd& l) {
    ChemicalPotential lv(l.data(), l.data() + l.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hydro_jacobian(lv, vs), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 1e-9)
      throw InversionError("target on or too close to the boundary of the admissible region");
    return lv;
  };

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(d + 1);
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::VectorXd r = residual(lam);
    if (r.lpNorm<Eigen::Infinity>() < opt.tolerance) return accept(lam);
    ChemicalPotential lv(lam.data(), lam.data() + lam.size());
    Eigen::MatrixXd H = hydro_jacobian(lv, vs);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success) break;
    Eigen::VectorXd step = ldlt.solve(-r);
    if (!step.allFinite()) break;
    const double f0 = phi(lam);
    double t = 1.0;
    Eigen::VectorXd next = lam + step;
    while (t > 1e-10) {
      next = lam + t * step;
      const double f1 = phi(next);
      if (f1 <= f0 || residual(next).lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>()) break;
      t *= 0.5;
    }
    if (t <= 1e-10) break;
    lam = next;
  }
  Eigen::VectorXd r = residual(lam);
  if (r.lpNorm<Eigen::Infinity>() < std::max(opt.tolerance, 1e-11)) return accept(lam);
  throw InversionError("Newton inversion did not converge (residual " +
                       std::to_string(r.lpNorm<Eigen::Infinity>()) + "); target outside admissible region?");
}

Eigen::MatrixXd current_R(const HydroPoint& x, const VelocitySet& vs) {
  const int d = vs.dim();
  const auto t = theta_all(lambda_of_hydro(x, vs), vs);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) R(j, k) -= vs.component(i, k) * vs.component(i, j) * chi(t[i]);
  return R;
}

CanonicalCurrent canonical_current_F(double beta, int M, const std::vector<double>& gammaM) {
  const int d = static_cast<int>(gammaM.size());
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidParameters("beta must lie in [0,1]");
  if (M < 1 || d < 1) throw InvalidParameters("canonical current needs M >= 1 and d >= 1");
  const double volume = std::pow(2.0 * M + 1.0, d);
  const double corr = 1.0 + 1.0 / (volume - 1.0);
  CanonicalCurrent out;
  out.F.resize(d);
  for (int j = 0; j < d; ++j) out.F[j] = -gammaM[j] * corr * chi(beta);
  out.Fij = Eigen::MatrixXd::Identity(d, d) * (chi(beta) * corr - 0.25);
  return out;
}

double bernoulli_kl(double p, double q) {
  auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

double entropy_product(std::span<const double> nu2, std::span<const double> nu1) {
  if (nu2.size() != nu1.size()) throw InvalidParameters("entropy_product: marginal lists differ in length");
  double h = 0.0;
  for (std::size_t i = 0; i < nu2.size(); ++i) {
    if (!(nu1[i] > 0.0 && nu1[i] < 1.0 && nu2[i] > 0.0 && nu2[i] < 1.0))
      throw InvalidParameters("entropy_product: densities must lie in (0,1)");
    h += bernoulli_kl(nu2[i], nu1[i]);
  }
  return h;
}

} // namespace latgas
