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

#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "latgas/dynamics.hpp"
#include "latgas/error.hpp"
#include "support.hpp"

using namespace latgas;

namespace {

// Signed minimal-image displacement on a ring of side n.
long wrap(long dx, long n) {
  dx %= n;
  if (dx > n / 2) dx -= n;
  if (dx < -n / 2) dx += n;
  return dx;
}

LatticeConfig one_particle(const Torus& t, const SpeciesTable& sp, std::size_t x, std::size_t s) {
  LatticeConfig cfg(t, sp);
  cfg.set(x, s, true);
  return cfg;
}

std::size_t where(const LatticeConfig& cfg) {
  for (std::size_t x = 0; x < cfg.sites(); ++x)
    if (cfg.mask(x)) return x;
  return cfg.sites();
}

} // namespace

TEST_CASE("exponent conditions") {
  SimParams s;
  s.model = "scalar";
  s.d = 1;
  s.a = 0.6;
  s.b = 0.1;
  auto r = validate_exponents(s, 0);
  CHECK(r.conditions.size() == 3);
  CHECK(r.all_hold);

  SimParams v;
  v.d = 2;
  v.a = 0.88;
  v.b = 0.05;
  CHECK(v.kappa_or_default() == 16.0);
  r = validate_exponents(v, 16);
  CHECK(r.conditions.size() == 4);
  CHECK(r.all_hold);

  v.b = v.a;
  r = validate_exponents(v, 16);
  CHECK_FALSE(r.all_hold);
  CHECK_FALSE(r.conditions[0].holds);
  v.strict = true;
  CHECK_THROWS_AS(validate_exponents(v, 16), InvalidParameters);
}

TEST_CASE("full lattice is absorbing") {
  const auto vs = VelocitySet::model_one(2);
  const Torus t(8, 2);
  LatticeConfig cfg(t, SpeciesTable::of(vs));
  for (std::size_t x = 0; x < t.sites(); ++x) cfg.set_mask(x, 0xF);
  auto k = std::make_shared<JumpKernel>(JumpKernel::velocity_kernel(vs, 1, 8, 0.5));
  Simulator sim(cfg, k, collision_quadruples(vs), 1);
  CHECK(sim.total_rate() == 0.0);
  const auto ev = sim.step(1.0);
  CHECK(ev.kind == Simulator::EventKind::none);
  CHECK(sim.config() == cfg);
}

TEST_CASE("single particle drift") {
  // Micro mean displacement M^{-1} N^{-a} v per unit time, times N^2.
  const auto vs = VelocitySet::model_one(1);
  const auto sp = SpeciesTable::of(vs);
  const long N = 256;
  const int M = 2;
  const double a = 0.5, T = 0.002;
  const Torus t(N, 1);
  auto k = std::make_shared<JumpKernel>(JumpKernel::velocity_kernel(vs, M, N, a));
  for (std::size_t s = 0; s < 2; ++s) {
    const int R = 600;
    double sum = 0, sum2 = 0;
    for (int r = 0; r < R; ++r) {
      Simulator sim(one_particle(t, sp, 0, s), k, {}, derive_seed(5, "drift", r * 2 + s));
      sim.run_until(T);
      const double x = static_cast<double>(wrap(static_cast<long>(where(sim.config())), N));
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / R, var = sum2 / R - mean * mean;
    const double expect = double(N) * N * std::pow(N, -a) * vs.component(s, 0) / M * T;
    CHECK(std::abs(mean - expect) < 3 * std::sqrt(var / R));
  }
}

TEST_CASE("exact conservation and audits over many events") {
  const auto vs = VelocitySet::model_one(2);
  const Torus t(16, 2);
  Rng rng(3);
  const auto init = sample_product(t, vs, [](std::size_t x) { return ChemicalPotential{0.3 * std::sin(x * 0.1), 0.5, -0.2}; }, rng);
  auto k = std::make_shared<JumpKernel>(JumpKernel::velocity_kernel(vs, 2, 16, 0.5));
  Simulator sim(init, k, collision_quadruples(vs), 11, 5000);
  const auto start = conserved_totals(init);
  for (int chunk = 0; chunk < 20; ++chunk) {
    sim.run_events(5000);
    CHECK(conserved_totals(sim.config()) == start);
    CHECK(sim.totals() == start);
    for (auto m : sim.config().masks()) CHECK(m < 16u);
    CHECK_NOTHROW(sim.audit());
  }
  CHECK(sim.counters().collisions > 0);
  CHECK(sim.counters().audits >= 20);
}

TEST_CASE("seed replay is bit identical") {
  SimParams p;
  p.N = 16;
  p.d = 2;
  p.a = 0.88;
  p.b = 0.05;
  p.T_end = 0.02;
  p.snapshot_times = {0.005, 0.01};
  p.seed = 77;
  const auto vs = velocity_set_for(p);
  Rng rng(1);
  const auto init = sample_product(Torus(16, 2), vs, [](std::size_t) { return ChemicalPotential{0, 0.3, 0}; }, rng);
  const auto a = run_trajectory(p, init), b = run_trajectory(p, init);
  REQUIRE(a.snapshots.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.snapshots[i].t == b.snapshots[i].t);
    CHECK(a.snapshots[i].config == b.snapshots[i].config);
  }
  CHECK(a.counters.events == b.counters.events);
  p.seed = 78;
  CHECK_FALSE(run_trajectory(p, init).snapshots.back().config == a.snapshots.back().config);
}

TEST_CASE("product measure is stationary") {
  SimParams p;
  p.N = 32;
  p.d = 2;
  p.a = 0.88;
  p.b = 0.05;
  p.T_end = 0.01;
  const auto vs = velocity_set_for(p);
  const ChemicalPotential lam{-0.2, 0.6, -0.4};
  const Torus t(32, 2);
  const int R = 8;
  std::vector<double> mean(vs.size(), 0.0);
  for (int r = 0; r < R; ++r) {
    Rng rng(derive_seed(2, "stationary-init", r));
    p.seed = derive_seed(2, "stationary-run", r);
    const auto tr = run_trajectory(p, sample_product(t, vs, [&](std::size_t) { return lam; }, rng));
    CHECK(tr.counters.events > 10000);
    const auto& cfg = tr.snapshots.back().config;
    for (std::size_t x = 0; x < cfg.sites(); ++x)
      for (std::size_t s = 0; s < vs.size(); ++s) mean[s] += cfg.get(x, s);
  }
  const double n = double(R) * t.sites();
  for (std::size_t s = 0; s < vs.size(); ++s) {
    const double th = theta(lam, vs, s);
    CHECK(std::abs(mean[s] / n - th) < 3 * std::sqrt(th * (1 - th) / n));
  }
}

TEST_CASE("symmetric walk spreads diffusively") {
  for (int d : {1, 2}) {
    SimParams p;
    p.model = "scalar";
    p.d = d;
    p.N = 256;
    p.a = 0.6;
    p.b = 0.1;
    p.M = 3;
    p.asymmetric = false;
    const auto k = kernel_for(p);
    const double T = 0.001;
    const Torus t(p.N, d);
    const auto sp = SpeciesTable::scalar(d);
    const int R = 2000;
    std::vector<double> m2(d, 0.0);
    for (int r = 0; r < R; ++r) {
      Simulator sim(one_particle(t, sp, 0, 0), k, {}, derive_seed(9, "diffusive", r + 10000 * d));
      sim.run_until(T);
      const auto c = t.coords(where(sim.config()));
      for (int j = 0; j < d; ++j) {
        const double u = double(wrap(c[j], p.N)) / p.N;
        m2[j] += u * u / R;
      }
    }
    for (int j = 0; j < d; ++j) CHECK(std::abs(m2[j] / (2 * T) - 1.0) < 0.1);
  }
}

TEST_CASE("exclusion process: conservation and Bernoulli stationarity") {
  SimParams p;
  p.model = "scalar";
  p.d = 2;
  p.N = 100;
  p.a = 0.6;
  p.b = 0.1;
  p.T_end = 0.02;
  p.seed = 5;
  const Torus t(100, 2);
  const double alpha = 0.5;
  Rng rng(12);
  const auto init = sample_densities(t, SpeciesTable::scalar(2), [&](std::size_t, std::size_t) { return alpha; }, rng);
  const auto tr = run_exclusion_trajectory(p, init);
  const auto& fin = tr.snapshots.back().config;
  CHECK(conserved_totals(fin).mass == conserved_totals(init).mass);
  CHECK(tr.counters.events > 100000);

  // Counts in blocks of 10 consecutive sites against Binomial(10, alpha-hat).
  const double ahat = double(conserved_totals(fin).mass) / t.sites();
  std::vector<double> obs(11, 0.0);
  for (std::size_t blk = 0; blk < t.sites() / 10; ++blk) {
    int n = 0;
    for (std::size_t i = 0; i < 10; ++i) n += fin.get(blk * 10 + i, 0);
    obs[n] += 1;
  }
  boost::math::binomial bin(10, ahat);
  const double nb = t.sites() / 10.0;
  // Merge the tails so every bin expects at least 5.
  std::vector<double> o, e;
  double oacc = 0, eacc = 0;
  for (int n = 0; n <= 10; ++n) {
    oacc += obs[n];
    eacc += nb * boost::math::pdf(bin, n);
    if (eacc >= 5 && (n == 10 || nb * (1 - boost::math::cdf(bin, n)) >= 5)) {
      o.push_back(oacc);
      e.push_back(eacc);
      oacc = eacc = 0;
    }
  }
  if (eacc > 0) {
    o.back() += oacc;
    e.back() += eacc;
  }
  double chi2 = 0;
  for (std::size_t i = 0; i < o.size(); ++i) chi2 += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  boost::math::chi_squared dist(static_cast<double>(o.size() - 2));
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("reversing the drift reverses the current") {
  const long N = 64;
  const Torus t(N, 1);
  Rng rng(21);
  const auto init = sample_densities(t, SpeciesTable::scalar(1), [](std::size_t, std::size_t) { return 0.5; }, rng);
  double current[2] = {0, 0};
  for (int dir = 0; dir < 2; ++dir) {
    const double v[1] = {dir == 0 ? 1.0 : -1.0};
    auto k = std::make_shared<JumpKernel>(JumpKernel::sign_kernel(v, 2, N, 0.3));
    Simulator sim(init, k, {}, 99);
    for (int i = 0; i < 200000; ++i) {
      const auto ev = sim.step();
      if (ev.kind == Simulator::EventKind::exclusion)
        current[dir] += static_cast<double>(wrap(static_cast<long>(ev.target) - static_cast<long>(ev.site), N));
    }
  }
  CHECK(current[0] > 0);
  CHECK(current[1] < 0);
}

TEST_CASE("single-site collision generator is reversible") {
  // Built from the quadruples directly: rate 1 for each applicable quadruple.
  for (const auto& vs : {VelocitySet::model_one(2), VelocitySet::model_one(3)}) {
    const auto qs = collision_quadruples(vs);
    const std::size_t S = vs.size(), n = std::size_t{1} << S;
    std::vector<std::map<std::uint32_t, double>> L(n);
    for (std::uint32_t m = 0; m < n; ++m)
      for (const auto& q : qs) {
        const std::uint32_t need = (1u << q.v) | (1u << q.w), fill = (1u << q.vp) | (1u << q.wp);
        if ((m & need) == need && !(m & fill)) L[m][(m & ~need) | fill] += 1.0;
      }
    testing::for_all(10, 31, [&](latgas::Rng& rng, int) {
      ChemicalPotential lam = testing::uniform_vector(rng, vs.dim() + 1, -1.5, 1.5);
      const auto th = theta_all(lam, vs);
      auto mu = [&](std::uint32_t m) {
        double p = 1;
        for (std::size_t s = 0; s < S; ++s) p *= (m >> s & 1u) ? th[s] : 1 - th[s];
        return p;
      };
      double worst = 0;
      for (std::uint32_t m = 0; m < n; ++m)
        for (const auto& [m2, r] : L[m]) {
          const auto back = L[m2].find(m);
          const double rb = back == L[m2].end() ? 0.0 : back->second;
          worst = std::max(worst, std::abs(mu(m) * r - mu(m2) * rb));
        }
      CHECK(worst < 1e-12);
    });
  }
}

TEST_CASE("parallel_for reports the first failure") {
  std::vector<int> hit(50, 0);
  parallel_for(50, [&](std::size_t i) { hit[i] = 1; });
  CHECK(std::accumulate(hit.begin(), hit.end(), 0) == 50);
  CHECK_THROWS_WITH(parallel_for(10,
                                 [](std::size_t i) {
                                   if (i >= 3) throw InvalidParameters("index " + std::to_string(i));
                                 }),
                    "index 3");
}
