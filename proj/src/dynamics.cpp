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

#include "latgas/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "latgas/error.hpp"

namespace latgas {

int SimParams::range() const { return M > 0 ? M : derive_range(N, a, b); }

double SimParams::kappa_or_default() const { return kappa > 0.0 ? kappa : 2.0 + 3.0 * d + 2.0 * d * d; }

ExponentReport validate_exponents(const SimParams& p, double kappa) {
  ExponentReport r;
  const double d = p.d;
  auto add = [&r](std::string name, double lhs, double rhs, bool holds) {
    r.conditions.push_back({std::move(name), lhs, rhs, holds});
    r.all_hold = r.all_hold && holds;
  };
  if (p.scalar()) {
    add("d/(d+2) < a+b", d / (d + 2.0), p.a + p.b, d / (d + 2.0) < p.a + p.b);
    const double lhs2 = p.a + std::max(2.0, 1.0 + 2.0 / d) * p.b;
    add("a + max(2, 1+2/d) b < 1", lhs2, 1.0, lhs2 < 1.0);
    const double lhs3 = 2.0 * (1.0 + 2.0 / d) * p.b;
    add("2 (1+2/d) b < 1", lhs3, 1.0, lhs3 < 1.0);
  } else {
    if (!(kappa > 0.0)) throw InvalidParameters("kappa must be positive");
    add("b < a", p.b, p.a, p.b < p.a);
    add("a+b > 1 - 2/(d+kappa)", p.a + p.b, 1.0 - 2.0 / (d + kappa), p.a + p.b > 1.0 - 2.0 / (d + kappa));
    const double lhs3 = p.a + (kappa - 2.0) / kappa * p.b;
    add("a + ((kappa-2)/kappa) b > 1 - 2/kappa", lhs3, 1.0 - 2.0 / kappa, lhs3 > 1.0 - 2.0 / kappa);
    const double lhs4 = p.a + (1.0 + 2.0 / d) * p.b;
    add("a + (1+2/d) b < 1", lhs4, 1.0, lhs4 < 1.0);
  }
  if (p.strict && !r.all_hold) {
    std::string failed;
    for (const auto& c : r.conditions)
      if (!c.holds) failed += (failed.empty() ? "" : "; ") + c.name;
    throw InvalidParameters("exponent conditions violated: " + failed);
  }
  return r;
}

VelocitySet velocity_set_for(const SimParams& p) {
  if (p.model == "model1") return VelocitySet::model_one(p.d);
  if (p.model == "model2") {
    if (p.d != 3) throw InvalidParameters("model2 requires d = 3");
    return VelocitySet::model_two();
  }
  throw InvalidParameters("no velocity set for model '" + p.model + "'");
}

std::shared_ptr<const JumpKernel> kernel_for(const SimParams& p) {
  if (p.scalar()) {
    std::vector<double> drift = p.drift;
    if (drift.empty()) {
      drift.assign(p.d, 0.0);
      drift[0] = 1.0;
    }
    if (static_cast<int>(drift.size()) != p.d) throw InvalidParameters("drift must have d entries");
    return std::make_shared<JumpKernel>(JumpKernel::sign_kernel(drift, p.range(), p.N, p.a, p.asymmetric));
  }
  return std::make_shared<JumpKernel>(
      JumpKernel::velocity_kernel(velocity_set_for(p), p.range(), p.N, p.a, p.asymmetric));
}

Simulator::Simulator(LatticeConfig initial, std::shared_ptr<const JumpKernel> kernel,
                     std::vector<CollisionQuadruple> quadruples, std::uint64_t seed, std::uint64_t audit_interval)
    : cfg_(std::move(initial)), kernel_(std::move(kernel)), rng_(seed), audit_interval_(audit_interval) {
  if (!kernel_) throw InvalidParameters("simulator needs a kernel");
  S_ = cfg_.species().size();
  if (kernel_->species() != S_) throw InvalidParameters("kernel species count does not match configuration");
  if (kernel_->dim() != cfg_.torus().dim()) throw InvalidParameters("kernel dimension does not match torus");
  const double N = static_cast<double>(cfg_.torus().side());
  n2_ = N * N;

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> g;
  for (const auto& q : quadruples) {
    if (std::max({q.v, q.w, q.vp, q.wp}) >= S_) throw InvalidParameters("quadruple index out of range");
    ++g[{(1u << q.v) | (1u << q.w), (1u << q.vp) | (1u << q.wp)}];
  }
  for (const auto& [k, m] : g) groups_.push_back({k.first, k.second, m});

  species_rate_.resize(S_);
  alias_.resize(S_);
  for (std::size_t s = 0; s < S_; ++s) {
    species_rate_[s] = kernel_->total_rate(s);
    // Vose alias table over nonzero offsets.
    Alias& al = alias_[s];
    std::vector<double> w;
    for (std::size_t o = 0; o < kernel_->offsets(); ++o) {
      if (o == kernel_->zero_offset() || kernel_->rate(o, s) <= 0.0) continue;
      al.offset.push_back(o);
      w.push_back(kernel_->rate(o, s));
    }
    const std::size_t n = w.size();
    al.prob.assign(n, 0.0);
    al.alias.assign(n, 0);
    if (n == 0) continue;
    const double total = species_rate_[s];
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = w[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto l = small.back();
      small.pop_back();
      const auto gidx = large.back();
      al.prob[l] = scaled[l];
      al.alias[l] = gidx;
      scaled[gidx] = (scaled[gidx] + scaled[l]) - 1.0;
      if (scaled[gidx] < 1.0) {
        large.pop_back();
        small.push_back(gidx);
      }
    }
    for (auto i : large) al.prob[i] = 1.0;
    for (auto i : small) al.prob[i] = 1.0;
  }

  const std::size_t sites = cfg_.sites();
  particles_.assign(S_, {});
  slot_.assign(sites * S_, UINT32_MAX);
  coll_site_.assign(sites, 0);
  fenwick_.assign(sites + 1, 0);
  for (std::size_t x = 0; x < sites; ++x) {
    const std::uint32_t m = cfg_.mask(x);
    for (std::size_t s = 0; s < S_; ++s)
      if ((m >> s) & 1u) {
        slot_[x * S_ + s] = static_cast<std::uint32_t>(particles_[s].size());
        particles_[s].push_back(static_cast<std::uint32_t>(x));
      }
    coll_site_[x] = site_collisions(m);
    if (coll_site_[x]) fenwick_add(x, coll_site_[x]);
    coll_total_ += coll_site_[x];
  }
  totals_ = conserved_totals(cfg_);
}

std::int64_t Simulator::site_collisions(std::uint32_t m) const {
  std::int64_t c = 0;
  for (const auto& g : groups_)
    if ((m & g.need) == g.need && (m & g.empty) == 0) c += g.mult;
  return c;
}

void Simulator::fenwick_add(std::size_t x, std::int64_t delta) {
  for (std::size_t i = x + 1; i < fenwick_.size(); i += i & (~i + 1)) fenwick_[i] += delta;
}

std::size_t Simulator::fenwick_find(std::int64_t r) const {
  // Smallest x with prefix(x+1) > r.
  std::size_t pos = 0;
  std::size_t step = std::bit_floor(fenwick_.size() - 1);
  for (; step; step >>= 1) {
    if (pos + step < fenwick_.size() && fenwick_[pos + step] <= r) {
      pos += step;
      r -= fenwick_[pos];
    }
  }
  return pos;
}

double Simulator::exclusion_rate(std::size_t s) const {
  const std::size_t n = particles_[s].size();
  // A completely filled species cannot move; drop its thinning rate.
  if (n == 0 || n == cfg_.sites()) return 0.0;
  return species_rate_[s] * static_cast<double>(n);
}

double Simulator::total_rate() const {
  double r = static_cast<double>(coll_total_);
  for (std::size_t s = 0; s < S_; ++s) r += exclusion_rate(s);
  return n2_ * r;
}

void Simulator::move_particle(std::size_t s, std::size_t from, std::size_t to) {
  const std::uint32_t idx = slot_[from * S_ + s];
  particles_[s][idx] = static_cast<std::uint32_t>(to);
  slot_[to * S_ + s] = idx;
  slot_[from * S_ + s] = UINT32_MAX;
  const std::uint32_t mf = cfg_.mask(from), mt = cfg_.mask(to);
  const std::uint32_t nf = mf & ~(1u << s), nt = mt | (1u << s);
  const auto& sp = cfg_.species();
  totals_ -= sp.site_value(mf);
  totals_ -= sp.site_value(mt);
  totals_ += sp.site_value(nf);
  totals_ += sp.site_value(nt);
  cfg_.set_mask(from, nf);
  cfg_.set_mask(to, nt);
  if (!groups_.empty()) {
    for (std::size_t x : {from, to}) {
      const std::int64_t c = site_collisions(cfg_.mask(x));
      if (c != coll_site_[x]) {
        fenwick_add(x, c - coll_site_[x]);
        coll_total_ += c - coll_site_[x];
        coll_site_[x] = c;
      }
    }
  }
}

void Simulator::set_mask(std::size_t x, std::uint32_t m) {
  const std::uint32_t old = cfg_.mask(x);
  const auto& sp = cfg_.species();
  totals_ -= sp.site_value(old);
  totals_ += sp.site_value(m);
  std::uint32_t changed = old ^ m;
  while (changed) {
    const std::size_t s = static_cast<std::size_t>(std::countr_zero(changed));
    changed &= changed - 1;
    if ((m >> s) & 1u) {
      slot_[x * S_ + s] = static_cast<std::uint32_t>(particles_[s].size());
      particles_[s].push_back(static_cast<std::uint32_t>(x));
    } else {
      const std::uint32_t idx = slot_[x * S_ + s];
      const std::uint32_t last = particles_[s].back();
      particles_[s][idx] = last;
      slot_[static_cast<std::size_t>(last) * S_ + s] = idx;
      particles_[s].pop_back();
      slot_[x * S_ + s] = UINT32_MAX;
    }
  }
  cfg_.set_mask(x, m);
  const std::int64_t c = site_collisions(m);
  fenwick_add(x, c - coll_site_[x]);
  coll_total_ += c - coll_site_[x];
  coll_site_[x] = c;
}

Simulator::Event Simulator::step(double limit) {
  Event ev;
  const double R = total_rate();
  if (!(R > 0.0)) {
    if (std::isfinite(limit)) time_ = std::max(time_, limit);
    return ev;
  }
  const double dt = rng_.exponential(R);
  if (time_ + dt > limit) {
    time_ = limit;
    return ev;
  }
  time_ += dt;
  ev.dt = dt;
  ++counters_.events;

  double u = rng_.uniform() * (R / n2_);
  std::size_t s = 0;
  bool exclusion = false;
  for (; s < S_; ++s) {
    const double r = exclusion_rate(s);
    if (u < r) {
      exclusion = true;
      break;
    }
    u -= r;
  }
  if (exclusion || coll_total_ == 0) {
    if (!exclusion) {
      // Rounding left u past the last species; take the last movable one.
      for (s = S_; s-- > 0;)
        if (exclusion_rate(s) > 0.0) break;
    }
    const auto& plist = particles_[s];
    const std::size_t x = plist[rng_.below(plist.size())];
    const Alias& al = alias_[s];
    std::size_t k = rng_.below(al.prob.size());
    if (rng_.uniform() >= al.prob[k]) k = al.alias[k];
    const std::size_t y = cfg_.torus().shift(x, kernel_->offset(al.offset[k]));
    ev.site = x;
    ev.target = y;
    ev.species = s;
    if (cfg_.get(y, s)) {
      ev.kind = EventKind::rejected;
      ++counters_.rejected;
    } else {
      ev.kind = EventKind::exclusion;
      move_particle(s, x, y);
      ++counters_.jumps;
    }
  } else {
    const std::size_t x = fenwick_find(static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(coll_total_))));
    const std::uint32_t m = cfg_.mask(x);
    std::int64_t r = static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(coll_site_[x])));
    const Group* pick = nullptr;
    for (const auto& g : groups_) {
      if ((m & g.need) != g.need || (m & g.empty) != 0) continue;
      if (r < g.mult) {
        pick = &g;
        break;
      }
      r -= g.mult;
    }
    if (!pick) throw AuditFailure("collision drawn at a site with no eligible quadruple");
    ev.kind = EventKind::collision;
    ev.site = ev.target = x;
    set_mask(x, m ^ (pick->need | pick->empty));
    ++counters_.collisions;
  }
  if (audit_interval_ && counters_.events % audit_interval_ == 0) {
    audit();
    ++counters_.audits;
  }
  return ev;
}

void Simulator::run_until(double t) {
  while (time_ < t) step(t);
}

void Simulator::run_events(std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i)
    if (step().kind == EventKind::none) break;
}

void Simulator::audit() const {
  const std::size_t sites = cfg_.sites();
  std::vector<std::size_t> counts(S_, 0);
  std::int64_t coll = 0;
  for (std::size_t x = 0; x < sites; ++x) {
    const std::uint32_t m = cfg_.mask(x);
    if (S_ < 32 && (m >> S_) != 0) throw AuditFailure("occupation bit set outside the species range");
    for (std::size_t s = 0; s < S_; ++s) {
      const bool on = (m >> s) & 1u;
      const std::uint32_t idx = slot_[x * S_ + s];
      if (on) {
        ++counts[s];
        if (idx >= particles_[s].size() || particles_[s][idx] != x) throw AuditFailure("particle list out of sync");
      } else if (idx != UINT32_MAX) {
        throw AuditFailure("stale particle slot");
      }
    }
    const std::int64_t c = site_collisions(m);
    if (c != coll_site_[x]) throw AuditFailure("site collision count out of sync");
    coll += c;
  }
  for (std::size_t s = 0; s < S_; ++s)
    if (counts[s] != particles_[s].size()) throw AuditFailure("particle count out of sync");
  if (coll != coll_total_) throw AuditFailure("collision total out of sync");
  std::int64_t prefix = 0;
  for (std::size_t x = 0; x < sites; ++x) prefix += coll_site_[x];
  std::int64_t tree = 0;
  for (std::size_t i = sites; i > 0; i -= i & (~i + 1)) tree += fenwick_[i];
  if (tree != prefix) throw AuditFailure("collision tree out of sync");
  if (!(conserved_totals(cfg_) == totals_)) throw AuditFailure("conserved totals drifted");
}

namespace {

Trajectory run_with(const SimParams& params, const LatticeConfig& initial, std::shared_ptr<const JumpKernel> kernel,
                    std::vector<CollisionQuadruple> quads) {
  Simulator sim(initial, std::move(kernel), std::move(quads), params.seed, params.audit_interval);
  std::vector<double> times = params.snapshot_times;
  times.push_back(params.T_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  Trajectory tr;
  for (double t : times) {
    if (t < 0.0 || t > params.T_end) continue;
    sim.run_until(t);
    tr.snapshots.push_back({t, sim.totals(), sim.config()});
  }
  sim.audit();
  tr.counters = sim.counters();
  tr.final_time = sim.time();
  return tr;
}

} // namespace

Trajectory run_trajectory(const SimParams& params, const LatticeConfig& initial) {
  if (params.scalar()) return run_exclusion_trajectory(params, initial);
  validate_exponents(params, params.kappa_or_default());
  const VelocitySet vs = velocity_set_for(params);
  if (initial.torus().side() != params.N || initial.torus().dim() != params.d)
    throw InvalidParameters("initial configuration does not match N, d");
  std::vector<CollisionQuadruple> quads;
  if (params.collisions) quads = collision_quadruples(vs);
  return run_with(params, initial, kernel_for(params), std::move(quads));
}

Trajectory run_exclusion_trajectory(const SimParams& params, const LatticeConfig& initial) {
  if (!params.scalar()) throw InvalidParameters("exclusion trajectory needs model = scalar");
  validate_exponents(params, params.kappa_or_default());
  if (initial.torus().side() != params.N || initial.torus().dim() != params.d)
    throw InvalidParameters("initial configuration does not match N, d");
  return run_with(params, initial, kernel_for(params), {});
}

unsigned worker_count() {
  if (const char* env = std::getenv("LATGAS_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1u;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace latgas
