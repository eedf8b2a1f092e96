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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latgas/error.hpp"
#include "latgas/kernels.hpp"
#include "latgas/lattice.hpp"
#include "latgas/observables.hpp"
#include "latgas/thermo.hpp"
#include "support.hpp"

using namespace latgas;

TEST_CASE("occupation probabilities") {
  const auto vs = VelocitySet::model_one(2);
  for (std::size_t i = 0; i < vs.size(); ++i) CHECK(theta({0, 0, 0}, vs, i) == 0.5);
  for (std::size_t i = 1; i < vs.size(); ++i) CHECK(theta({0.7, 0, 0}, vs, i) == theta({0.7, 0, 0}, vs, 0));
  double prev = 0.0;
  for (double t = -5; t <= 30; t += 1.0) {
    const double th = theta({t, 0, 0}, vs, 0);
    CHECK(th > prev);
    prev = th;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hydrodynamic map") {
  const auto vs = VelocitySet::model_one(2);
  const auto x = hydro_of_lambda({0, 0, 0}, vs);
  CHECK(x.rho == 2.0);
  CHECK(x.p == std::vector<double>{0.0, 0.0});

  const auto v1 = VelocitySet::model_one(1);
  for (double t : {-3.0, -0.4, 0.1, 2.5}) {
    const auto h = hydro_of_lambda({0, t}, v1);
    CHECK(h.rho == doctest::Approx(1.0));
    CHECK(h.p[0] == doctest::Approx(std::tanh(t / 2)).epsilon(1e-14));
  }
  const auto v2 = VelocitySet::model_two();
  const auto a = hydro_of_lambda({0.2, 0.3, -0.1, 0.4}, v2);
  const auto b = hydro_of_lambda({0.2, -0.3, -0.1, 0.4}, v2);
  CHECK(a.rho == doctest::Approx(b.rho));
  CHECK(a.p[0] == doctest::Approx(-b.p[0]));
  CHECK(a.p[1] == doctest::Approx(b.p[1]));
}

TEST_CASE("inversion round trip on an interior grid") {
  for (const auto& vs : {VelocitySet::model_one(2), VelocitySet::model_two()}) {
    const int d = vs.dim();
    const double a0 = vs.size() / 2.0;
    CHECK(lambda_of_hydro({a0, std::vector<double>(d, 0.0)}, vs) == std::vector<double>(d + 1, 0.0));
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      // Image of a grid of potentials stays in the interior.
      std::vector<double> lam(d + 1);
      for (int k = 0; k <= d; ++k) lam[k] = -1.0 + 2.0 * ((i * (k + 3) + k) % 10) / 9.0 * (k == 0 ? 1.0 : 0.5);
      const auto x = hydro_of_lambda(lam, vs);
      const auto back = hydro_of_lambda(lambda_of_hydro(x, vs), vs);
      worst = std::max(worst, std::abs(back.rho - x.rho));
      for (int k = 0; k < d; ++k) worst = std::max(worst, std::abs(back.p[k] - x.p[k]));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("boundary targets are rejected") {
  const auto vs = VelocitySet::model_one(1);
  CHECK_THROWS_AS(lambda_of_hydro({2.0, {0.0}}, vs), InversionError);
  CHECK_THROWS_AS(lambda_of_hydro({1.0, {1.0}}, vs), InversionError);
}

TEST_CASE("derivatives at the symmetric point") {
  for (const auto& vs : {VelocitySet::model_one(2), VelocitySet::model_one(3), VelocitySet::model_two()}) {
    const int d = vs.dim();
    const double a0 = vs.size() / 2.0;
    const double B = moments(vs).B;
    const double h = 1e-5;
    for (int l = 0; l <= d; ++l) {
      HydroPoint up{a0, std::vector<double>(d, 0.0)}, dn = up;
      if (l == 0) {
        up.rho += h;
        dn.rho -= h;
      } else {
        up.p[l - 1] += h;
        dn.p[l - 1] -= h;
      }
      const auto lu = lambda_of_hydro(up, vs), ld = lambda_of_hydro(dn, vs);
      for (int k = 0; k <= d; ++k) {
        const double fd = (lu[k] - ld[k]) / (2 * h);
        const double expect = k != l ? 0.0 : (k == 0 ? 4.0 / vs.size() : 4.0 / B);
        CHECK(std::abs(fd - expect) < 1e-6);
      }
    }
    // Occupation derivatives: d0 theta = 1/4, dk theta = v_k / 4.
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (int l = 0; l <= d; ++l) {
        std::vector<double> up(d + 1, 0.0), dn(d + 1, 0.0);
        up[l] = h;
        dn[l] = -h;
        const double fd = (theta(up, vs, i) - theta(dn, vs, i)) / (2 * h);
        CHECK(std::abs(fd - (l == 0 ? 0.25 : vs.component(i, l - 1) / 4)) < 1e-8);
      }
  }
}

TEST_CASE("jacobian is the covariance and matches finite differences") {
  testing::for_all(20, 5, [](latgas::Rng& rng, int i) {
    const auto vs = i % 2 ? VelocitySet::model_two() : VelocitySet::model_one(2);
    const int d = vs.dim();
    const auto lam = testing::uniform_vector(rng, d + 1, -0.8, 0.8);
    const Eigen::MatrixXd J = hydro_jacobian(lam, vs);
    CHECK((J - J.transpose()).norm() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    const double h = 1e-6;
    for (int l = 0; l <= d; ++l) {
      auto up = lam, dn = lam;
      up[l] += h;
      dn[l] -= h;
      const auto xu = hydro_of_lambda(up, vs).flat(), xd = hydro_of_lambda(dn, vs).flat();
      for (int k = 0; k <= d; ++k) {
        const double fd = (xu[k] - xd[k]) / (2 * h);
        CHECK(std::abs(fd - J(k, l)) <= 1e-6 * std::max(1.0, std::abs(J(k, l))));
      }
    }
  });
}

TEST_CASE("chi") {
  CHECK(chi(0.5) == 0.25);
  CHECK(chi(0.0) == 0.0);
  for (double b = 0.0; b <= 1.0; b += 0.05) CHECK(chi(b) - chi(0.5) == doctest::Approx(-(b - 0.5) * (b - 0.5)));
}

TEST_CASE("current matrix R") {
  for (const auto& vs : {VelocitySet::model_one(2), VelocitySet::model_one(3), VelocitySet::model_two()}) {
    const int d = vs.dim();
    const double a0 = vs.size() / 2.0, B = moments(vs).B;
    const Eigen::MatrixXd R = current_R({a0, std::vector<double>(d, 0.0)}, vs);
    CHECK((R + (B / 4) * Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
    const double h = 1e-4;
    for (int l = 0; l <= d; ++l) {
      HydroPoint up{a0, std::vector<double>(d, 0.0)}, dn = up;
      if (l == 0) {
        up.rho += h;
        dn.rho -= h;
      } else {
        up.p[l - 1] += h;
        dn.p[l - 1] -= h;
      }
      const Eigen::MatrixXd g = (current_R(up, vs) - current_R(dn, vs)) / (2 * h);
      CHECK(g.cwiseAbs().maxCoeff() < 1e-6);
    }
    const Eigen::MatrixXd Rx = current_R({a0 * 0.8, std::vector<double>(d, 0.3)}, vs);
    CHECK((Rx - Rx.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("canonical current expectations") {
  const auto f0 = canonical_current_F(0.0, 2, {1.0});
  CHECK(f0.F[0] == 0.0);
  CHECK(f0.Fij(0, 0) == -0.25);
  const auto big = canonical_current_F(0.5, 4000, {1.0, 1.0});
  CHECK(std::abs(big.Fij(0, 0)) < 1e-7);
  CHECK(big.Fij(0, 1) == 0.0);
  const auto f = canonical_current_F(1.0 / 3.0, 1, {1.0});
  CHECK(f.F[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("canonical current against exhaustive averages") {
  // d = 1: the block of 2M+1 sites as a ring; average the reflected current
  // and the centred quadratic current over every K-particle configuration.
  for (int M = 1; M <= 2; ++M) {
    const long n = 2 * M + 1;
    const double drift[1] = {1.0};
    const auto kernel = JumpKernel::sign_kernel(drift, M, n, 0.5);
    const Torus torus(n, 1);
    for (int K = 0; K <= n; ++K) {
      double w = 0.0, v = 0.0, count = 0.0;
      for (unsigned m = 0; m < (1u << n); ++m) {
        if (std::popcount(m) != K) continue;
        LatticeConfig cfg(torus, SpeciesTable::scalar(1));
        for (long x = 0; x < n; ++x) cfg.set(x, 0, (m >> x) & 1u);
        w += current_Wstar(cfg, kernel, 0, 0, 0);
        v += current_Vhat(cfg, kernel, 0, 0, 0, 0, 0, 1.0);
        count += 1;
      }
      const double beta = static_cast<double>(K) / n;
      const auto F = canonical_current_F(beta, M, kernel.gammaM());
      CHECK(w / count == doctest::Approx(F.F[0]).epsilon(1e-12));
      CHECK(v / count == doctest::Approx(F.Fij(0, 0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("product relative entropy") {
  std::vector<double> a{0.3, 0.5, 0.7};
  CHECK(entropy_product(a, a) == 0.0);
  for (double eps : {1e-2, 1e-3}) {
    std::vector<double> p{0.5 + eps}, q{0.5};
    const double h = entropy_product(p, q);
    CHECK(std::abs(h - 2 * eps * eps) < 2 * eps * eps * eps);
  }
  CHECK_THROWS_AS(entropy_product(std::vector<double>{1.0}, std::vector<double>{0.5}), InvalidParameters);
}

TEST_CASE("entropy of slowly varying perturbations grows like N^(d-2b)") {
  const double b = 0.1;
  std::vector<double> xs, ys;
  for (long N = 64; N <= 4096; N *= 2) {
    std::vector<double> p(N), q(N);
    for (long x = 0; x < N; ++x) {
      const double u = 2 * M_PI * x / N;
      p[x] = 0.5 + std::pow(N, -b) * 0.25 * std::cos(u);
      q[x] = 0.5 + std::pow(N, -b) * 0.25 * std::sin(u);
    }
    xs.push_back(std::log(N));
    ys.push_back(std::log(entropy_product(p, q)));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / xs.size();
    my += ys[i] / ys.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  CHECK(std::abs(sxy / sxx - (1 - 2 * b)) < 0.05);
}
