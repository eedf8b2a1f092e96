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

// Acceptance checks: one PASS/FAIL line per criterion, tolerances fixed.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "latgas/dynamics.hpp"
#include "latgas/ensembles.hpp"
#include "latgas/error.hpp"
#include "latgas/experiment.hpp"
#include "latgas/gaplab.hpp"
#include "latgas/kernels.hpp"
#include "latgas/modes.hpp"
#include "latgas/observables.hpp"
#include "latgas/pde.hpp"
#include "latgas/thermo.hpp"
#include "latgas/velocity.hpp"

using namespace latgas;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.note(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.note("over time budget " + fmt(budget_s) + " s");
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
  std::fflush(stdout);
}

const double tau = 2 * M_PI;

// A_M/M^{d+2} sum_z (z.v) z_i without storing the kernel.
double streamed_drift_error(const VelocitySet& vs, int M) {
  const int d = vs.dim();
  const double AM = compute_AM(M, d);
  const double scale = AM / std::pow(M, d + 2);
  double worst = 0;
  for (std::size_t s = 0; s < vs.size(); ++s) {
    const auto v = vs.velocity(s);
    double acc[3] = {0, 0, 0};
    for (int a = -M; a <= M; ++a)
      for (int b = -M; b <= M; ++b)
        for (int c = -M; c <= M; ++c) {
          const double zv = a * v[0] + b * v[1] + c * v[2];
          acc[0] += zv * a;
          acc[1] += zv * b;
          acc[2] += zv * c;
        }
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(scale * acc[i] - v[i]));
  }
  return worst;
}

} // namespace

int main() {
  std::printf("latgas %s acceptance run, %u worker(s)\n", library_version(), worker_count());

  criterion(1, "moment algebra", 1.0, [](Outcome& o) {
    const double w = model_two_generator();
    const auto m = moments(VelocitySet::model_two());
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    o.require(rel(m.B, 16 + 8 * w * w) < 1e-12, "B");
    o.require(rel(m.C, 8 + 16 * w * w) < 1e-12, "C");
    o.require(rel(m.D, 16 + 8 * std::pow(w, 4)) < 1e-12, "D");
    const double A0 = ns_coefficients(m).A0;
    o.require(std::abs(A0) < 1e-10, "|A0| < 1e-10");
    o.note("model2 |A0| = " + fmt(std::abs(A0)));
    o.note("model1 d=2 A0 = " + fmt(ns_coefficients(moments(VelocitySet::model_one(2))).A0) +
           " (commonly quoted as 1; not asserted)");
  });

  criterion(2, "kernel identities", 5.0, [](Outcome& o) {
    double norm = 0, drift = 0;
    for (int d = 1; d <= 3; ++d) {
      std::vector<VelocitySet> sets{VelocitySet::model_one(d)};
      if (d == 3) sets.push_back(VelocitySet::model_two());
      std::vector<int> Ms;
      if (d < 3)
        for (int M = 1; M <= 64; ++M) Ms.push_back(M);
      else
        Ms = {1, 2, 3, 4, 5, 6, 7, 8, 12, 16, 32, 64};
      for (int M : Ms) {
        norm = std::max(norm, am_identity_residual(M, d));
        for (const auto& vs : sets) {
          if (d == 3 && M > 16) {
            drift = std::max(drift, streamed_drift_error(vs, M));
            continue;
          }
          const auto k = JumpKernel::velocity_kernel(vs, M, 1000, 0.5);
          for (std::size_t s = 0; s < vs.size(); ++s) {
            const auto di = k.drift_identity(s);
            for (int i = 0; i < d; ++i) drift = std::max(drift, std::abs(di[i] - vs.component(s, i)));
          }
        }
      }
    }
    o.require(norm < 1e-10, "normalisation");
    o.require(drift < 1e-10, "drift identity");
    o.note("normalisation residual " + fmt(norm) + ", drift residual " + fmt(drift));
  });

  criterion(3, "thermodynamics", 10.0, [](Outcome& o) {
    double round = 0, jac = 0, rdev = 0;
    for (const auto& vs : {VelocitySet::model_one(1), VelocitySet::model_one(2), VelocitySet::model_one(3),
                           VelocitySet::model_two()}) {
      const int d = vs.dim();
      for (int i = 0; i < 100; ++i) {
        // Interior grid in potential space, mapped forward.
        ChemicalPotential lam(d + 1);
        for (int k = 0; k <= d; ++k) lam[k] = -1.0 + 2.0 * (((i / (k + 1)) * 7 + 3 * k) % 10) / 9.0;
        const auto x = hydro_of_lambda(lam, vs);
        const auto back = hydro_of_lambda(lambda_of_hydro(x, vs), vs).flat();
        const auto xf = x.flat();
        for (int k = 0; k <= d; ++k) round = std::max(round, std::abs(back[k] - xf[k]));
      }
      const double a0 = vs.size() / 2.0, B = moments(vs).B, h = 1e-5;
      for (int l = 0; l <= d; ++l) {
        HydroPoint up{a0, std::vector<double>(d, 0.0)}, dn = up;
        (l == 0 ? up.rho : up.p[l - 1]) += h;
        (l == 0 ? dn.rho : dn.p[l - 1]) -= h;
        const auto lu = lambda_of_hydro(up, vs), ld = lambda_of_hydro(dn, vs);
        for (int k = 0; k <= d; ++k) {
          const double expect = k != l ? 0.0 : (k == 0 ? 4.0 / vs.size() : 4.0 / B);
          jac = std::max(jac, std::abs((lu[k] - ld[k]) / (2 * h) - expect));
        }
      }
      const auto R = current_R({a0, std::vector<double>(d, 0.0)}, vs);
      rdev = std::max(rdev, (R + (B / 4) * Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff());
    }
    o.require(round < 1e-10, "round trip");
    o.require(jac < 1e-6, "jacobian at the symmetric point");
    o.require(rdev <= 1e-12, "R at the symmetric point");
    o.note("round trip " + fmt(round) + ", jacobian " + fmt(jac) + ", R deviation " + fmt(rdev));
  });

  criterion(4, "simulator exactness", 120.0, [](Outcome& o) {
    const auto vs = VelocitySet::model_one(2);
    const Torus t(32, 2);
    SimParams p;
    p.N = 32;
    p.d = 2;
    p.a = 0.88;
    p.b = 0.05;
    const ChemicalPotential lam{0.1, 0.4, -0.3};
    Rng rng(1, "acceptance/simulator-init");
    const auto init = sample_product(t, vs, [&](std::size_t) { return lam; }, rng);
    Simulator sim(init, kernel_for(p), collision_quadruples(vs), derive_seed(1, "acceptance/simulator"), 100000);
    const auto start = conserved_totals(init);
    bool conserved = true, binary = true;
    for (int chunk = 0; chunk < 10; ++chunk) {
      sim.run_events(100000);
      conserved = conserved && conserved_totals(sim.config()) == start && sim.totals() == start;
      for (auto m : sim.config().masks()) binary = binary && m < 16u;
    }
    sim.audit();
    o.require(sim.counters().events == 1000000, "event count");
    o.require(conserved, "conservation");
    o.require(binary, "binary occupancy");
    o.require(sim.counters().audits >= 10, "audits ran");
    double worst = 0;
    for (std::size_t s = 0; s < vs.size(); ++s) {
      double n = 0;
      for (std::size_t x = 0; x < t.sites(); ++x) n += sim.config().get(x, s);
      const double th = theta(lam, vs, s);
      worst = std::max(worst, std::abs(n / t.sites() - th) / std::sqrt(th * (1 - th) / t.sites()));
    }
    o.require(worst < 3.0, "stationary densities within 3 sigma");
    o.note("1e6 events, " + std::to_string(sim.counters().audits) + " audits, worst density deviation " + fmt(worst) +
           " sigma");
  });

  criterion(5, "collision reversibility", 1.0, [](Outcome& o) {
    double worst = 0;
    for (const auto& vs : {VelocitySet::model_one(2), VelocitySet::model_one(3)}) {
      const auto sp = SpeciesTable::of(vs);
      const auto qs = collision_quadruples(vs);
      const std::size_t n = std::size_t{1} << vs.size();
      Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
      const auto site = Region::box(1, vs.dim());
      for (const auto& [sector, size] : sector_list(site, sp)) {
        const auto g = build_sector(site, sp, qs, sector, 1, ExchangeKind::uniform, false);
        for (int r = 0; r < g.Lc.outerSize(); ++r)
          for (SparseGenerator::InnerIterator it(g.Lc, r); it; ++it) L(g.states[r], g.states[it.col()]) = it.value();
      }
      for (int i = 0; i < 10; ++i) {
        Rng rng(derive_seed(1, "acceptance/collision", i));
        ChemicalPotential lam(vs.dim() + 1);
        for (auto& l : lam) l = 3 * rng.uniform() - 1.5;
        const auto th = theta_all(lam, vs);
        std::vector<double> m(n, 1.0);
        for (std::size_t x = 0; x < n; ++x)
          for (std::size_t s = 0; s < vs.size(); ++s) m[x] *= (x >> s & 1u) ? th[s] : 1 - th[s];
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) worst = std::max(worst, std::abs(m[a] * L(a, b) - m[b] * L(b, a)));
      }
    }
    o.require(worst < 1e-12, "weighted symmetry");
    o.note("max asymmetry " + fmt(worst));
  });

  criterion(6, "PDE solvers", 30.0, [](Outcome& o) {
    GridField s(128, 1, 1);
    s.fill([](int, std::span<const double> u) { return std::sin(tau * u[0]); });
    const auto heat = solve_scalar(s, {0.0}, 0.01);
    const int k1[1] = {1};
    const double herr = std::abs(2 * std::abs(grid_mode(heat.field, 0, k1)) - std::exp(-4 * M_PI * M_PI * 0.01));
    GridField tg(64, 2, 2);
    tg.fill([](int c, std::span<const double> u) {
      return c == 0 ? std::sin(tau * u[0]) * std::cos(tau * u[1]) : -std::cos(tau * u[0]) * std::sin(tau * u[1]);
    });
    const auto ns = solve_ns(tg, {0.0, 1.0, 0.0}, 0.01);
    const int k11[2] = {1, 1};
    const double rate = -std::log(std::abs(grid_mode(ns.field, 0, k11)) / 0.25) / 0.01;
    const double rerr = std::abs(rate / (8 * M_PI * M_PI) - 1);
    o.require(herr < 1e-4, "heat mode");
    o.require(rerr < 1e-3, "Taylor-Green rate");
    o.require(ns.max_divergence < 1e-8, "divergence");
    o.require(std::max(heat.max_mass_change, ns.max_mass_change) < 1e-12, "mass per step");
    o.note("heat error " + fmt(herr) + ", TG rate error " + fmt(rerr) + ", divergence " + fmt(ns.max_divergence) +
           ", mass drift " + fmt(std::max(heat.max_mass_change, ns.max_mass_change)));
  });

  criterion(7, "gap lab", 600.0, [](Outcome& o) {
    std::size_t sectors = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    const auto v1 = VelocitySet::model_one(1);
    for (int L = 1; L <= 5; ++L)
      for (const auto& [c, n] : sector_list(Region::segment(L), SpeciesTable::of(v1))) {
        if (n < 2) continue;
        ++sectors;
        min_gap = std::min(min_gap, spectral_gap(build_sector(Region::segment(L), SpeciesTable::of(v1), {}, c, 1,
                                                              ExchangeKind::uniform, false))
                                        .gap);
      }
    const auto v2 = VelocitySet::model_one(2);
    const auto sp2 = SpeciesTable::of(v2);
    const auto qs2 = collision_quadruples(v2);
    const auto box = Region::box(2, 2);
    ConservedVector largest;
    double largest_n = 0;
    for (const auto& [c, n] : sector_list(box, sp2)) {
      if (n < 2) continue;
      ++sectors;
      if (n > largest_n) {
        largest_n = n;
        largest = c;
      }
      min_gap = std::min(min_gap, spectral_gap(build_sector(box, sp2, qs2, c, 1, ExchangeKind::uniform, false)).gap);
    }
    o.require(min_gap > 0, "positive gaps");

    const auto big = build_sector(box, sp2, qs2, largest, 1, ExchangeKind::uniform, false);
    Rng rng(1, "acceptance/dirichlet");
    double dir = 0;
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd f(big.size());
      for (auto& x : f) x = rng.normal();
      const double a = quadratic_form(big.Lex, f), b = exchange_form(big, f);
      const double c = quadratic_form(big.Lc, f), d = collision_form(big, f);
      dir = std::max({dir, std::abs(a - b) / std::max(1.0, std::abs(a)), std::abs(c - d) / std::max(1.0, std::abs(c))});
    }
    o.require(dir < 1e-10, "Dirichlet identity");

    ConservedVector four(2);
    four.mass = 4;
    const auto g = build_sector(box, sp2, qs2, four, 1);
    std::vector<Eigen::VectorXd> fs;
    Rng frng(1, "acceptance/comparison");
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd f(g.size());
      for (auto& x : f) x = frng.normal();
      fs.push_back(f);
    }
    const auto cmp = check_collision_comparison(g, fs, 1e-10);
    o.require(cmp.comparison_holds && cmp.samples == 1000, "collision comparison");

    std::vector<double> scaled;
    for (int M = 1; M <= 4; ++M) {
      const auto region = Region::cube(M, 1);
      double worst = std::numeric_limits<double>::infinity();
      for (std::int64_t m = 1; m < static_cast<std::int64_t>(region.size()); ++m) {
        ConservedVector c;
        c.mass = m;
        worst = std::min(worst,
                         spectral_gap(build_sector(region, SpeciesTable::scalar(1), {}, c, M, ExchangeKind::bounded, false))
                             .gap);
      }
      scaled.push_back(worst * M * M);
    }
    const double spread = *std::max_element(scaled.begin(), scaled.end()) / *std::min_element(scaled.begin(), scaled.end());
    o.require(spread <= 2.0, "scalar gap ~ M^-2");
    o.note(std::to_string(sectors) + " sectors, min gap " + fmt(min_gap) + ", Dirichlet error " + fmt(dir) +
           ", comparison margin " + fmt(cmp.worst_margin) + " (max ratio " + fmt(cmp.max_ratio) +
           "), gap*M^2 = " + fmt(scaled[0]) + "/" + fmt(scaled[1]) + "/" + fmt(scaled[2]) + "/" + fmt(scaled[3]));
  });

  criterion(8, "modes", 300.0, [](Outcome& o) {
    long instances = 0, bad = 0;
    int diam = 0;
    for (int L = 1; L <= 5; ++L)
      for (int d = 1; d <= 3; ++d)
        for (const auto& ctx : feasible_instances(L, d)) {
          ++instances;
          const auto all = all_modes_bruteforce(ctx);
          bool ok = !all.solutions.empty();
          for (const auto& s : all.solutions) {
            ok = ok && weight(ctx, s) == all.max_weight;
            for (const auto& t : all.solutions)
              for (int j = 0; j < d; ++j) ok = ok && std::abs(s[j] - t[j]) <= 1;
          }
          for (const auto& start : hyperplane(ctx)) {
            const auto m = greedy_mode(ctx, start);
            ok = ok && std::find(all.solutions.begin(), all.solutions.end(), m) != all.solutions.end();
          }
          diam = std::max(diam, solution_diameter(ctx, all.solutions));
          bad += !ok;
        }
    o.require(bad == 0, "greedy equals brute force");
    o.note(std::to_string(instances) + " instances, " + std::to_string(bad) + " mismatches, max diameter " +
           std::to_string(diam));
  });

  criterion(9, "equivalence of ensembles", 120.0, [](Outcome& o) {
    const auto dir = std::filesystem::temp_directory_path() / "latgas-acceptance-ensembles";
    ExperimentConfig cfg;
    cfg.set("run.scenario", "ensembles-scan");
    cfg.set("run.output", dir.string());
    const auto s = run_scenario(cfg);
    const auto vs = VelocitySet::model_one(1);
    const double v0 = vs.component(0, 0);
    double closed = 0, worst_rel_bound = 0;
    for (const auto& r : s["rows"]) {
      const double L = r["L"].get<double>();
      worst_rel_bound = std::max(worst_rel_bound, std::abs(r["difference"].get<double>()) / r["bound"].get<double>());
      if (r["function"] != 0) continue;
      // Species 0 count from (mass, momentum) = (L, L/4).
      const double n = (L + v0 * std::llround(0.25 * L)) / 2;
      const double expect = -n * (L - n) / (L * L * (L - 1));
      closed = std::max(closed, std::abs(-r["difference"].get<double>() - expect));
    }
    o.require(closed < 1e-12, "two-point closed form");
    std::string slopes;
    for (std::size_t i = 0; i < s["slopes"].size(); ++i) {
      const double sl = s["slopes"][i].get<double>();
      slopes += (i ? "," : "") + fmt(sl);
      o.require(sl >= -1.1 && sl <= -0.9, "slope of function " + std::to_string(i));
    }
    o.note("closed-form error " + fmt(closed) + ", slopes [" + slopes + "], max |diff|/(sd/|L|) " +
           fmt(worst_rel_bound));
  });

  criterion(10, "entropy scaling", 60.0, [](Outcome& o) {
    const double b = 0.1;
    std::vector<double> xs, ys;
    for (long N = 64; N <= 4096; N *= 2) {
      const Torus t(N, 1);
      ProfileSpec p1, p2;
      p1.b = p2.b = b;
      p1.phi0 = [](std::span<const double> u) { return 0.25 * std::sin(tau * u[0]); };
      p2.phi0 = [](std::span<const double> u) { return 0.25 * std::cos(tau * u[0]); };
      const auto sp = SpeciesTable::scalar(1);
      const auto d1 = profile_densities(p1, t, sp, nullptr), d2 = profile_densities(p2, t, sp, nullptr);
      xs.push_back(std::log(double(N)));
      ys.push_back(std::log(entropy_product(d2, d1)));
    }
    const double slope = loglog_slope(xs, ys);
    o.require(std::abs(slope - (1 - 2 * b)) <= 0.05, "slope d - 2b");
    o.note("slope " + fmt(slope) + " vs " + fmt(1 - 2 * b));
  });

  criterion(11, "incompressible-limit desk experiment", 1200.0, [](Outcome& o) {
    const auto rows = exclusion_incompressible(CompareSpec{});
    std::string table;
    for (double t : CompareSpec{}.times) {
      double prev = std::numeric_limits<double>::infinity();
      for (const auto& r : rows) {
        if (r.t != t) continue;
        o.require(r.mean_error < prev, "monotone in N at t=" + fmt(t));
        prev = r.mean_error;
        if (r.N == 1024) o.require(r.mean_error < 0.2, "error below 0.2 at N=1024, t=" + fmt(t));
        table += " N=" + std::to_string(r.N) + ",t=" + fmt(t) + ":" + fmt(r.mean_error);
      }
    }
    o.note("scalar errors" + table);

    // Velocity model: conservation and stationarity at N = 64.
    SimParams p;
    p.N = 64;
    p.d = 2;
    p.a = 0.88;
    p.b = 0.05;
    p.T_end = 0.005;
    p.seed = derive_seed(1, "acceptance/velocity-run");
    const auto vs = VelocitySet::model_one(2);
    const ChemicalPotential lam{0.0, 0.3, 0.0};
    Rng rng(1, "acceptance/velocity-init");
    const auto init = sample_product(Torus(64, 2), vs, [&](std::size_t) { return lam; }, rng);
    const auto tr = run_trajectory(p, init);
    bool conserved = true;
    for (const auto& snap : tr.snapshots) conserved = conserved && snap.totals == conserved_totals(init);
    const auto& fin = tr.snapshots.back().config;
    double worst = 0;
    for (std::size_t s = 0; s < vs.size(); ++s) {
      double n = 0;
      for (std::size_t x = 0; x < fin.sites(); ++x) n += fin.get(x, s);
      const double th = theta(lam, vs, s);
      worst = std::max(worst, std::abs(n / fin.sites() - th) / std::sqrt(th * (1 - th) / fin.sites()));
    }
    o.require(conserved, "velocity model conservation");
    o.require(worst < 3.0, "velocity model stationarity");

    const auto shear = shear_decay(ShearSpec{});
    const double rel = std::abs(shear.rate / (4 * M_PI * M_PI) - 1);
    o.require(shear.conserved, "shear run conservation");
    o.require(rel < 0.2, "shear decay rate within 20% of 4 pi^2");
    o.note("velocity: density deviation " + fmt(worst) + " sigma, shear rate " + fmt(shear.rate) + " (" +
           fmt(100 * rel) + "% off), amplitude " + fmt(shear.initial) + " -> " + fmt(shear.final) + " +- " +
           fmt(shear.final_stderr));
  });

  std::printf("%d criterion/criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
