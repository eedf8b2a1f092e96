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

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "latgas/kernels.hpp"
#include "latgas/lattice.hpp"
#include "latgas/velocity.hpp"

namespace latgas {

struct SimParams {
  long N = 32;
  int d = 1;
  double a = 0.6;
  double b = 0.1;
  int M = 0;                   ///< 0: derive from N^{1-a-b}
  std::string model = "model1"; ///< model1, model2 or scalar
  double T_end = 0.01;
  std::uint64_t seed = 1;
  std::vector<double> snapshot_times;
  bool strict = false;
  double kappa = 0.0;          ///< 0: use 2 + 3d + 2d^2
  std::vector<double> drift;   ///< scalar kernel direction; default e_1
  bool asymmetric = true;      ///< include the N^{-a} part of the rates
  bool collisions = true;
  std::uint64_t audit_interval = 100000;

  bool scalar() const { return model == "scalar"; }
  int range() const;
  double kappa_or_default() const;
};

struct Condition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct ExponentReport {
  std::vector<Condition> conditions;
  bool all_hold = true;
};

/// Evaluates the scaling-exponent inequalities for the model type; throws
/// InvalidParameters when params.strict is set and one fails.
ExponentReport validate_exponents(const SimParams& params, double kappa);

VelocitySet velocity_set_for(const SimParams& params);
std::shared_ptr<const JumpKernel> kernel_for(const SimParams& params);

/// Exact continuous-time simulation in macroscopic time (all rates times N^2).
class Simulator {
public:
  enum class EventKind { none, exclusion, rejected, collision };
  struct Event {
    EventKind kind = EventKind::none;
    double dt = 0.0;
    std::size_t site = 0;
    std::size_t target = 0;
    std::size_t species = 0;
  };
  struct Counters {
    std::uint64_t events = 0;
    std::uint64_t jumps = 0;
    std::uint64_t rejected = 0;
    std::uint64_t collisions = 0;
    std::uint64_t audits = 0;
  };

  Simulator(LatticeConfig initial, std::shared_ptr<const JumpKernel> kernel,
            std::vector<CollisionQuadruple> quadruples, std::uint64_t seed,
            std::uint64_t audit_interval = 100000);

  /// Draws one event. If its time would pass `limit`, the clock stops at
  /// `limit` and nothing is applied (kind none).
  Event step(double limit = std::numeric_limits<double>::infinity());
  void run_until(double t);
  /// Runs exactly n events (or fewer if the state is absorbing).
  void run_events(std::uint64_t n);

  double time() const noexcept { return time_; }
  /// Total event rate in macroscopic time units.
  double total_rate() const;
  const LatticeConfig& config() const noexcept { return cfg_; }
  const ConservedVector& totals() const noexcept { return totals_; }
  const Counters& counters() const noexcept { return counters_; }
  std::int64_t collision_count() const noexcept { return coll_total_; }

  /// Recomputes every table from scratch and compares exactly; throws AuditFailure.
  void audit() const;

private:
  struct Group {
    std::uint32_t need = 0, empty = 0;
    std::int64_t mult = 0;
  };
  struct Alias {
    std::vector<double> prob;
    std::vector<std::uint32_t> alias;
    std::vector<std::size_t> offset;
  };

  std::int64_t site_collisions(std::uint32_t mask) const;
  void fenwick_add(std::size_t x, std::int64_t delta);
  std::size_t fenwick_find(std::int64_t r) const;
  void set_mask(std::size_t x, std::uint32_t m);
  void move_particle(std::size_t s, std::size_t from, std::size_t to);
  double exclusion_rate(std::size_t s) const;

  LatticeConfig cfg_;
  std::shared_ptr<const JumpKernel> kernel_;
  std::vector<Group> groups_;
  Rng rng_;
  std::uint64_t audit_interval_;
  double n2_ = 1.0;
  double time_ = 0.0;
  std::size_t S_ = 1;
  std::vector<double> species_rate_;
  std::vector<Alias> alias_;
  std::vector<std::vector<std::uint32_t>> particles_;
  std::vector<std::uint32_t> slot_;
  std::vector<std::int64_t> coll_site_;
  std::vector<std::int64_t> fenwick_;
  std::int64_t coll_total_ = 0;
  ConservedVector totals_;
  Counters counters_;
};

struct Snapshot {
  double t = 0.0;
  ConservedVector totals;
  LatticeConfig config;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  Simulator::Counters counters;
  double final_time = 0.0;
};

/// Velocity-model trajectory; snapshots at params.snapshot_times (and T_end).
Trajectory run_trajectory(const SimParams& params, const LatticeConfig& initial);
/// Single-species mesoscopic exclusion with the sign kernel, no collisions.
Trajectory run_exclusion_trajectory(const SimParams& params, const LatticeConfig& initial);

/// Worker count from LATGAS_WORKERS, else hardware concurrency.
unsigned worker_count();
/// Calls f(i) for i in [0, n) on the worker pool. Exceptions are rethrown
/// (the one from the lowest index).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

} // namespace latgas
