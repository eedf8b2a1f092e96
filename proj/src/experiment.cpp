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

#include "latgas/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "latgas/ensembles.hpp"
#include "latgas/error.hpp"
#include "latgas/gaplab.hpp"
#include "latgas/kernels.hpp"
#include "latgas/lattice.hpp"
#include "latgas/modes.hpp"
#include "latgas/observables.hpp"
#include "latgas/pde.hpp"
#include "latgas/rng.hpp"
#include "latgas/velocity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace latgas {

const char* library_version() { return "0.4.0"; }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::map<std::string, std::string>& schema() {
  static const std::map<std::string, std::string> s = {
      {"run.scenario", "validate"},
      {"run.seed", "1"},
      {"run.replicas", "4"},
      {"run.output", "latgas-out"},
      {"sim.N", "32"},
      {"sim.d", "1"},
      {"sim.a", "0.6"},
      {"sim.b", "0.1"},
      {"sim.M", "0"},
      {"sim.model", "scalar"},
      {"sim.T_end", "0.01"},
      {"sim.snapshot_times", ""},
      {"sim.strict", "false"},
      {"sim.kappa", "0"},
      {"sim.collisions", "true"},
      {"sim.asymmetric", "true"},
      {"sim.audit_interval", "100000"},
      {"profile.amplitude", "0.25"},
      {"profile.mode", "1"},
      {"profile.momentum_amplitude", "0"},
      {"pde.equation", "scalar"},
      {"pde.grid", "64"},
      {"pde.d", "1"},
      {"pde.T", "0.01"},
      {"pde.dt", "0"},
      {"pde.gamma", "0"},
      {"pde.projected", "true"},
      {"pde.stiffness", "1"},
      {"compare.sizes", "256,512,1024"},
      {"compare.times", "0.02,0.05"},
      {"compare.modes", "4"},
      {"compare.pde_grid", "256"},
      {"gap.model", "scalar"},
      {"gap.d", "1"},
      {"gap.M", "1,2"},
      {"gap.region", "cube"},
      {"gap.side", "2"},
      {"gap.bounded", "false"},
      {"gap.dense_limit", "4000"},
      {"modes.max_Lbar", "5"},
      {"modes.max_d", "3"},
      {"ensembles.model", "model1"},
      {"ensembles.d", "1"},
      {"ensembles.sides", "8,16,32,64,128"},
      {"ensembles.functions", "10"},
      {"ensembles.block", "2"},
      {"ensembles.mass_fraction", "1"},
      {"ensembles.momentum_fraction", "0.25"},
  };
  return s;
}

std::string num(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  if (boost::algorithm::trim_copy(s).empty()) return parts;
  boost::algorithm::split(parts, s, boost::is_any_of(",; "), boost::token_compress_on);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const std::string t = boost::algorithm::trim_copy(text);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

} // namespace

ExperimentConfig::ExperimentConfig() : values_(schema()) {}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (!schema().contains(key)) throw ConfigError(key, "unknown configuration key");
  values_[key] = boost::algorithm::trim_copy(value);
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "override must look like section.key=value");
  set(boost::algorithm::trim_copy(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown configuration key");
  return it->second;
}

double ExperimentConfig::real(const std::string& key) const { return parse_number<double>(key, get(key)); }
long ExperimentConfig::integer(const std::string& key) const { return parse_number<long>(key, get(key)); }

bool ExperimentConfig::flag(const std::string& key) const {
  const std::string v = boost::algorithm::to_lower_copy(get(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + get(key) + "'");
}

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split_list(get(key))) out.push_back(parse_number<double>(key, p));
  return out;
}

std::vector<long> ExperimentConfig::integers(const std::string& key) const {
  std::vector<long> out;
  for (const auto& p : split_list(get(key))) out.push_back(parse_number<long>(key, p));
  return out;
}

json ExperimentConfig::to_json() const {
  json j = json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  ExperimentConfig cfg;
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  if (fs::path(path).extension() == ".json") {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("", std::string("malformed manifest: ") + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("config", "manifest has no config object");
    for (const auto& [k, v] : j["config"].items()) {
      if (!v.is_string()) throw ConfigError(k, "manifest values must be strings");
      cfg.set(k, v.get<std::string>());
    }
    return cfg;
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "keys must live inside a [section]");
    for (const auto& [key, val] : body) cfg.set(section + "." + key, val.data());
  }
  return cfg;
}

SimParams ExperimentConfig::sim_params() const {
  SimParams p;
  p.N = integer("sim.N");
  p.d = static_cast<int>(integer("sim.d"));
  p.a = real("sim.a");
  p.b = real("sim.b");
  p.M = static_cast<int>(integer("sim.M"));
  p.model = text("sim.model");
  p.T_end = real("sim.T_end");
  p.snapshot_times = reals("sim.snapshot_times");
  p.strict = flag("sim.strict");
  p.kappa = real("sim.kappa");
  p.collisions = flag("sim.collisions");
  p.asymmetric = flag("sim.asymmetric");
  p.audit_interval = static_cast<std::uint64_t>(integer("sim.audit_interval"));
  p.seed = static_cast<std::uint64_t>(integer("run.seed"));
  if (p.N < 2) throw ConfigError("sim.N", "must be at least 2");
  if (p.d < 1 || p.d > 3) throw ConfigError("sim.d", "must be 1, 2 or 3");
  if (p.model != "scalar" && p.model != "model1" && p.model != "model2")
    throw ConfigError("sim.model", "must be scalar, model1 or model2");
  if (p.model == "model2" && p.d != 3) throw ConfigError("sim.d", "model2 lives in d = 3");
  if (!(p.T_end > 0.0)) throw ConfigError("sim.T_end", "must be positive");
  if (p.M < 0) throw ConfigError("sim.M", "must be >= 0");
  return p;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> n = {"validate",  "latticegas", "pde",           "exclusion-incompressible",
                                             "gap-scan",  "modes-scan", "ensembles-scan"};
  return n;
}

// ---------------------------------------------------------------------------

std::vector<CompareRow> exclusion_incompressible(const CompareSpec& spec) {
  std::vector<CompareRow> rows;
  std::vector<double> times = spec.times;
  std::sort(times.begin(), times.end());
  const double T = times.back();
  for (long N : spec.sizes) {
    SimParams p;
    p.N = N;
    p.d = 1;
    p.a = spec.a;
    p.b = spec.b;
    p.model = "scalar";
    p.T_end = T;
    p.snapshot_times = times;
    const int M = p.range();
    const auto kernel = kernel_for(p);
    const double gamma = std::pow(static_cast<double>(N), 1.0 - spec.a - spec.b) * kernel->gammaM()[0] / M;

    // Limiting profile modes.
    GridField phi0(spec.pde_grid, 1, 1);
    const double amp = spec.amplitude;
    phi0.fill([amp](int, std::span<const double> u) { return amp * std::sin(kTwoPi * u[0]); });
    std::vector<std::vector<std::complex<double>>> target(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto res = solve_scalar(phi0, {gamma}, times[i]);
      for (int n = 1; n <= spec.modes; ++n) {
        const int k[1] = {n};
        target[i].push_back(grid_mode(res.field, 0, k));
      }
    }

    const Torus torus(N, 1);
    const auto species = SpeciesTable::scalar(1);
    std::vector<std::vector<double>> err(times.size(), std::vector<double>(spec.replicas));
    std::vector<double> events(spec.replicas);
    parallel_for(static_cast<std::size_t>(spec.replicas), [&](std::size_t r) {
      Rng init(spec.seed, "exclusion-incompressible/init", static_cast<std::uint64_t>(N) * 100000 + r);
      ProfileSpec prof;
      prof.b = spec.b;
      prof.phi0 = [amp](std::span<const double> u) { return amp * std::sin(kTwoPi * u[0]); };
      const auto cfg = sample_profile(prof, torus, species, nullptr, init);
      SimParams pr = p;
      pr.seed = derive_seed(spec.seed, "exclusion-incompressible/run", static_cast<std::uint64_t>(N) * 100000 + r);
      const auto tr = run_exclusion_trajectory(pr, cfg);
      for (std::size_t i = 0; i < times.size(); ++i) {
        const auto field = corrected_field(tr.snapshots[i].config, spec.b, 0.5);
        double s = 0.0;
        for (int n = 1; n <= spec.modes; ++n) {
          const int k[1] = {n};
          s += std::norm(field.fourier(0, k) - target[i][n - 1]);
        }
        err[i][r] = std::sqrt(s);
      }
      events[r] = static_cast<double>(tr.counters.events);
    });
    double ev = 0.0;
    for (double e : events) ev += e;
    ev /= spec.replicas;
    for (std::size_t i = 0; i < times.size(); ++i) {
      double m = 0.0, v = 0.0;
      for (double e : err[i]) m += e;
      m /= spec.replicas;
      for (double e : err[i]) v += (e - m) * (e - m);
      v /= std::max(1, spec.replicas - 1);
      rows.push_back({N, M, times[i], m, std::sqrt(v / spec.replicas), ev});
    }
  }
  return rows;
}

ShearReport shear_decay(const ShearSpec& spec) {
  SimParams p;
  p.N = spec.N;
  p.d = 2;
  p.a = spec.a;
  p.b = spec.b;
  p.M = spec.M;
  p.model = "model1";
  p.T_end = spec.T;
  const VelocitySet vs = VelocitySet::model_one(2);
  const auto species = SpeciesTable::of(vs);
  const Torus torus(spec.N, 2);
  const double amp = spec.amplitude;
  ProfileSpec prof;
  prof.b = spec.b;
  prof.phi0 = [](std::span<const double>) { return 0.0; };
  prof.phi = {[amp](std::span<const double> u) { return amp * std::sin(kTwoPi * u[1]); },
              [](std::span<const double>) { return 0.0; }};
  const TestFunction H = [](std::span<const double> u) { return std::sin(kTwoPi * u[1]); };

  std::vector<double> y0(spec.replicas), y1(spec.replicas);
  std::vector<char> ok(spec.replicas, 1);
  std::vector<std::uint64_t> ev(spec.replicas);
  parallel_for(static_cast<std::size_t>(spec.replicas), [&](std::size_t r) {
    Rng init(spec.seed, "shear/init", r);
    const auto cfg = sample_profile(prof, torus, species, &vs, init);
    SimParams pr = p;
    pr.seed = derive_seed(spec.seed, "shear/run", r);
    const auto tr = run_trajectory(pr, cfg);
    y0[r] = pair(cfg, 1, H);
    y1[r] = pair(tr.snapshots.back().config, 1, H);
    ok[r] = conserved_totals(tr.snapshots.back().config) == conserved_totals(cfg);
    ev[r] = tr.counters.events;
  });
  ShearReport rep;
  double v = 0.0;
  for (int r = 0; r < spec.replicas; ++r) {
    rep.initial += y0[r];
    rep.final += y1[r];
    rep.conserved = rep.conserved && ok[r];
    rep.events += ev[r];
  }
  rep.initial /= spec.replicas;
  rep.final /= spec.replicas;
  for (double y : y1) v += (y - rep.final) * (y - rep.final);
  rep.final_stderr = std::sqrt(v / std::max(1, spec.replicas - 1) / spec.replicas);
  rep.rate = (rep.final > 0.0 && rep.initial > 0.0) ? -std::log(rep.final / rep.initial) / spec.T
                                                    : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

class Csv {
public:
  explicit Csv(const fs::path& path) : out_(path), path_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
  }
  template <class... Ts>
  void row(const Ts&... xs) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(xs), first = false), ...);
    out_ << '\n';
  }
  const fs::path& path() const { return path_; }

private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I x) {
    return std::to_string(x);
  }
  std::ofstream out_;
  fs::path path_;
};

struct RunContext {
  const ExperimentConfig& cfg;
  fs::path dir;
  std::uint64_t seed;
  std::vector<std::string> outputs;
  std::vector<std::string> streams;
};

VelocitySet velocity_set_named(const std::string& model, int d, const std::string& field) {
  if (model == "model1") return VelocitySet::model_one(d);
  if (model == "model2") {
    if (d != 3) throw ConfigError(field, "model2 lives in d = 3");
    return VelocitySet::model_two();
  }
  throw ConfigError(field, "expected model1 or model2, got '" + model + "'");
}

json run_validate(RunContext& ctx) {
  const SimParams p = ctx.cfg.sim_params();
  json s;
  s["model"] = p.model;
  s["d"] = p.d;
  if (!p.scalar()) {
    const VelocitySet vs = velocity_set_for(p);
    const auto mt = moments(vs);
    const auto c = ns_coefficients(mt);
    s["moments"] = {{"B", mt.B}, {"C", mt.C}, {"D", mt.D}, {"a0", mt.a0}};
    s["coefficients"] = {{"A0", c.A0}, {"A1", c.A1}, {"A2", c.A2}};
    s["velocities"] = vs.size();
    s["quadruples"] = collision_quadruples(vs).size();
    if (p.model == "model1")
      s["notes"].push_back("model1: A0 from moments is " + num(c.A0) + "; a value of 1 is sometimes quoted for this set");
    if (p.model == "model2" && std::abs(c.A0) < 1e-10) s["notes"].push_back("model2: A0 vanishes");
  }
  const int M = p.range();
  s["kernel"]["M"] = M;
  s["kernel"]["AM"] = compute_AM(M, p.d);
  s["kernel"]["normalization_residual"] = am_identity_residual(M, p.d);
  const auto kernel = kernel_for(p);
  double min_rate = std::numeric_limits<double>::infinity();
  for (std::size_t o = 0; o < kernel->offsets(); ++o)
    for (std::size_t sp = 0; sp < kernel->species(); ++sp)
      if (o != kernel->zero_offset()) min_rate = std::min(min_rate, kernel->rate(o, sp));
  s["kernel"]["min_rate"] = min_rate;
  if (!p.scalar()) {
    const VelocitySet vs = velocity_set_for(p);
    double e = 0.0;
    for (std::size_t sp = 0; sp < vs.size(); ++sp) {
      const auto di = kernel->drift_identity(sp);
      for (int i = 0; i < p.d; ++i) e = std::max(e, std::abs(di[i] - vs.component(sp, i)));
    }
    s["kernel"]["drift_identity_error"] = e;
  } else {
    s["kernel"]["gammaM"] = kernel->gammaM();
  }
  const auto rep = validate_exponents(p, p.kappa_or_default());
  s["exponents"]["kappa"] = p.kappa_or_default();
  s["exponents"]["all_hold"] = rep.all_hold;
  for (const auto& c : rep.conditions)
    s["exponents"]["conditions"].push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}});
  {
    std::ofstream out(ctx.dir / "kernel.json");
    out << kernel->to_json().dump(2) << '\n';
    ctx.outputs.push_back("kernel.json");
  }
  return s;
}

json run_latticegas(RunContext& ctx) {
  const SimParams p = ctx.cfg.sim_params();
  const int R = static_cast<int>(ctx.cfg.integer("run.replicas"));
  if (R < 1) throw ConfigError("run.replicas", "must be positive");
  const double amp = ctx.cfg.real("profile.amplitude");
  const double pamp = ctx.cfg.real("profile.momentum_amplitude");
  const int mode = static_cast<int>(ctx.cfg.integer("profile.mode"));
  std::optional<VelocitySet> vs;
  if (!p.scalar()) vs = velocity_set_for(p);
  const SpeciesTable species = p.scalar() ? SpeciesTable::scalar(p.d) : SpeciesTable::of(*vs);
  const double a0 = p.scalar() ? 0.5 : static_cast<double>(vs->size()) / 2.0;
  const Torus torus(p.N, p.d);
  ProfileSpec prof;
  prof.b = p.b;
  prof.phi0 = [=](std::span<const double> u) { return amp * std::sin(kTwoPi * mode * u[0]); };
  if (!p.scalar()) {
    const int last = p.d - 1;
    prof.phi.push_back([=](std::span<const double> u) { return pamp * std::sin(kTwoPi * mode * u[last]); });
    for (int k = 1; k < p.d; ++k) prof.phi.push_back([](std::span<const double>) { return 0.0; });
  }
  const auto report = validate_exponents(p, p.kappa_or_default());

  std::vector<int> axes{0};
  if (p.d > 1) axes.push_back(p.d - 1);
  struct Obs {
    double t;
    std::size_t channel;
    int axis, n;
    std::complex<double> value;
  };
  std::vector<std::vector<Obs>> obs(R);
  std::vector<Trajectory> trajs(R);
  ctx.streams.push_back("latticegas/init");
  ctx.streams.push_back("latticegas/run");
  parallel_for(static_cast<std::size_t>(R), [&](std::size_t r) {
    Rng init(ctx.seed, "latticegas/init", r);
    const auto cfg0 = sample_profile(prof, torus, species, vs ? &*vs : nullptr, init);
    SimParams pr = p;
    pr.seed = derive_seed(ctx.seed, "latticegas/run", r);
    pr.snapshot_times.push_back(0.0);
    trajs[r] = run_trajectory(pr, cfg0);
    for (const auto& snap : trajs[r].snapshots) {
      const auto field = corrected_field(snap.config, p.b, a0);
      for (std::size_t k = 0; k < species.channels(); ++k)
        for (int ax : axes)
          for (int n = 1; n <= 4; ++n) {
            int wave[3] = {0, 0, 0};
            wave[ax] = n;
            obs[r].push_back({snap.t, k, ax, n, field.fourier(k, std::span<const int>(wave, p.d))});
          }
    }
  });

  Csv csv(ctx.dir / "observables.csv");
  csv.row("replica", "t", "channel", "axis", "n", "re", "im");
  std::map<std::tuple<double, std::size_t, int, int>, std::vector<double>> agg;
  for (int r = 0; r < R; ++r)
    for (const auto& o : obs[r]) {
      csv.row(r, o.t, o.channel, o.axis, o.n, o.value.real(), o.value.imag());
      agg[{o.t, o.channel, o.axis, o.n}].push_back(o.value.real());
    }
  ctx.outputs.push_back("observables.csv");
  {
    std::ofstream jl(ctx.dir / "totals.jsonl");
    for (int r = 0; r < R; ++r)
      for (const auto& snap : trajs[r].snapshots)
      {
        json rec{{"replica", r}, {"t", snap.t}, {"totals", snap.totals.to_string()}};
        json modes = json::array();
        for (const auto& o : obs[r])
          if (o.t == snap.t)
            modes.push_back({{"channel", o.channel}, {"axis", o.axis}, {"n", o.n}, {"re", o.value.real()},
                             {"im", o.value.imag()}});
        rec["modes"] = std::move(modes);
        jl << rec.dump() << '\n';
      }
    ctx.outputs.push_back("totals.jsonl");
  }
  json s;
  s["exponents_hold"] = report.all_hold;
  s["M"] = p.range();
  json counters = json::array();
  for (int r = 0; r < R; ++r) {
    const auto& c = trajs[r].counters;
    counters.push_back({{"events", c.events}, {"jumps", c.jumps}, {"rejected", c.rejected},
                        {"collisions", c.collisions}, {"audits", c.audits}});
    const std::string name = "snapshot_r" + std::to_string(r) + ".bin";
    write_snapshot((ctx.dir / name).string(), trajs[r].snapshots.back().config,
                   {{"replica", r}, {"t", trajs[r].snapshots.back().t}, {"model", p.model}});
    ctx.outputs.push_back(name);
  }
  s["counters"] = counters;
  bool conserved = true;
  for (int r = 0; r < R; ++r)
    for (const auto& snap : trajs[r].snapshots) conserved = conserved && snap.totals == trajs[r].snapshots.front().totals;
  s["conserved"] = conserved;
  json rows = json::array();
  for (const auto& [key, ys] : agg) {
    double m = 0, v = 0;
    for (double y : ys) m += y;
    m /= ys.size();
    for (double y : ys) v += (y - m) * (y - m);
    const double se = ys.size() > 1 ? std::sqrt(v / (ys.size() - 1) / ys.size()) : 0.0;
    rows.push_back({{"t", std::get<0>(key)}, {"channel", std::get<1>(key)}, {"axis", std::get<2>(key)},
                    {"n", std::get<3>(key)}, {"mean_re", m}, {"stderr", se}});
  }
  s["rows"] = rows;
  return s;
}

json run_pde(RunContext& ctx) {
  const std::string eq = ctx.cfg.text("pde.equation");
  const int n = static_cast<int>(ctx.cfg.integer("pde.grid"));
  const int d = static_cast<int>(ctx.cfg.integer("pde.d"));
  const double T = ctx.cfg.real("pde.T");
  const double dt = ctx.cfg.real("pde.dt");
  const double amp = ctx.cfg.real("profile.amplitude");
  const double pamp = ctx.cfg.real("profile.momentum_amplitude");
  const int mode = static_cast<int>(ctx.cfg.integer("profile.mode"));
  if (n < 4) throw ConfigError("pde.grid", "must be at least 4");
  if (d < 1 || d > 3) throw ConfigError("pde.d", "must be 1, 2 or 3");
  if (!(T > 0.0)) throw ConfigError("pde.T", "must be positive");
  const double k = kTwoPi * mode;
  PdeResult res;
  GridField init;
  if (eq == "scalar") {
    init = GridField(n, d, 1);
    init.fill([&](int, std::span<const double> u) { return amp * std::sin(k * u[0]); });
    std::vector<double> gamma(d, 0.0);
    gamma[0] = ctx.cfg.real("pde.gamma");
    res = solve_scalar(init, gamma, T, dt);
  } else if (eq == "ns") {
    if (d < 2) throw ConfigError("pde.d", "the incompressible solver needs d >= 2");
    const SimParams p = ctx.cfg.sim_params();
    if (p.scalar()) throw ConfigError("sim.model", "the incompressible solver needs model1 or model2");
    SimParams pd = p;
    pd.d = d;
    if (pd.model == "model2" && d != 3) throw ConfigError("pde.d", "model2 lives in d = 3");
    const auto c = ns_coefficients(moments(velocity_set_for(pd)));
    init = GridField(n, d, d);
    init.fill([&](int comp, std::span<const double> u) {
      if (comp == 0) return amp * std::sin(k * u[0]) * std::cos(k * u[1]);
      if (comp == 1) return -amp * std::cos(k * u[0]) * std::sin(k * u[1]);
      return 0.0;
    });
    res = solve_ns(init, c, T, dt, ctx.cfg.flag("pde.projected"));
  } else if (eq == "hydro") {
    const SimParams p = ctx.cfg.sim_params();
    SimParams pd = p;
    pd.d = d;
    if (p.scalar()) throw ConfigError("sim.model", "the hydrodynamic system needs model1 or model2");
    const VelocitySet vs = velocity_set_for(pd);
    const double a0 = static_cast<double>(vs.size()) / 2.0;
    init = GridField(n, d, d + 1);
    init.fill([&](int comp, std::span<const double> u) {
      if (comp == 0) return a0 + amp * std::sin(k * u[0]);
      if (comp == 1) return pamp * std::sin(k * u[d - 1]);
      return 0.0;
    });
    res = solve_full_hydro(init, vs, ctx.cfg.real("pde.stiffness"), T, dt);
  } else {
    throw ConfigError("pde.equation", "expected scalar, ns or hydro, got '" + eq + "'");
  }
  {
    std::vector<std::string> head;
    for (int a = 0; a < d; ++a) head.push_back("x" + std::to_string(a));
    for (std::size_t c = 0; c < res.field.comp.size(); ++c) head.push_back("c" + std::to_string(c));
    std::ostringstream line;
    for (std::size_t i = 0; i < head.size(); ++i) line << (i ? "," : "") << head[i];
    std::ofstream out(ctx.dir / "field.csv");
    out << line.str() << '\n';
    for (std::size_t i = 0; i < res.field.points(); ++i) {
      const auto pos = res.field.position(i);
      for (int a = 0; a < d; ++a) out << (a ? "," : "") << num(pos[a]);
      for (const auto& c : res.field.comp) out << ',' << num(c[i]);
      out << '\n';
    }
    ctx.outputs.push_back("field.csv");
    std::ofstream side(ctx.dir / "field.json");
    side << json{{"n", n}, {"d", d}, {"t", res.field.t}, {"equation", eq}, {"components", res.field.comp.size()}}.dump(2)
         << '\n';
    ctx.outputs.push_back("field.json");
  }
  json s;
  s["equation"] = eq;
  s["dt"] = res.dt;
  s["steps"] = res.steps;
  s["max_divergence"] = res.max_divergence;
  s["max_mass_change"] = res.max_mass_change;
  json rows = json::array();
  for (std::size_t c = 0; c < res.field.comp.size(); ++c)
    for (int m = 1; m <= 4; ++m) {
      int wave[3] = {0, 0, 0};
      wave[0] = m;
      const auto z0 = grid_mode(init, static_cast<int>(c), std::span<const int>(wave, d));
      const auto z1 = grid_mode(res.field, static_cast<int>(c), std::span<const int>(wave, d));
      rows.push_back({{"component", c}, {"n", m}, {"initial_re", z0.real()}, {"initial_im", z0.imag()},
                      {"final_re", z1.real()}, {"final_im", z1.imag()}});
    }
  s["modes"] = rows;
  return s;
}

json run_compare(RunContext& ctx) {
  CompareSpec spec;
  spec.sizes = ctx.cfg.integers("compare.sizes");
  spec.times = ctx.cfg.reals("compare.times");
  spec.a = ctx.cfg.real("sim.a");
  spec.b = ctx.cfg.real("sim.b");
  spec.amplitude = ctx.cfg.real("profile.amplitude");
  spec.replicas = static_cast<int>(ctx.cfg.integer("run.replicas"));
  spec.modes = static_cast<int>(ctx.cfg.integer("compare.modes"));
  spec.pde_grid = static_cast<int>(ctx.cfg.integer("compare.pde_grid"));
  spec.seed = ctx.seed;
  if (spec.sizes.empty()) throw ConfigError("compare.sizes", "needs at least one size");
  if (spec.times.empty()) throw ConfigError("compare.times", "needs at least one time");
  if (spec.replicas < 1) throw ConfigError("run.replicas", "must be positive");
  ctx.streams.push_back("exclusion-incompressible/init");
  ctx.streams.push_back("exclusion-incompressible/run");
  const auto rows = exclusion_incompressible(spec);
  Csv csv(ctx.dir / "compare.csv");
  csv.row("N", "M", "t", "mean_error", "stderr", "mean_events");
  json s, jr = json::array();
  for (const auto& r : rows) {
    csv.row(r.N, r.M, r.t, r.mean_error, r.stderr_error, r.mean_events);
    jr.push_back({{"N", r.N}, {"M", r.M}, {"t", r.t}, {"mean_error", r.mean_error}, {"stderr", r.stderr_error},
                  {"mean_events", r.mean_events}});
  }
  ctx.outputs.push_back("compare.csv");
  s["rows"] = jr;
  bool mono = true;
  for (double t : spec.times) {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : rows)
      if (r.t == t) {
        mono = mono && r.mean_error < prev;
        prev = r.mean_error;
      }
  }
  s["monotone_in_N"] = mono;
  return s;
}

json run_gap(RunContext& ctx) {
  const std::string model = ctx.cfg.text("gap.model");
  const int d = static_cast<int>(ctx.cfg.integer("gap.d"));
  const auto Ms = ctx.cfg.integers("gap.M");
  const std::string region_kind = ctx.cfg.text("gap.region");
  const bool bounded = ctx.cfg.flag("gap.bounded");
  if (d < 1 || d > 3) throw ConfigError("gap.d", "must be 1, 2 or 3");
  if (Ms.empty()) throw ConfigError("gap.M", "needs at least one range");
  for (long M : Ms)
    if (M < 1) throw ConfigError("gap.M", "ranges must be >= 1");
  if (region_kind != "cube" && region_kind != "box") throw ConfigError("gap.region", "expected cube or box");
  SpeciesTable species = SpeciesTable::scalar(d);
  std::vector<CollisionQuadruple> quads;
  if (model != "scalar") {
    const auto vs = velocity_set_named(model, d, "gap.model");
    species = SpeciesTable::of(vs);
    quads = collision_quadruples(vs);
  }
  GapOptions opt;
  opt.dense_limit = static_cast<std::size_t>(ctx.cfg.integer("gap.dense_limit"));

  Csv csv(ctx.dir / "gaps.csv");
  csv.row("region", "M", "sector", "dim_H", "gap", "bound_ratio", "method");
  json rows = json::array();
  double c2 = 0.0;
  for (long M : Ms) {
    const Region region = region_kind == "cube" ? Region::cube(static_cast<int>(M), d)
                                                : Region::box(static_cast<int>(ctx.cfg.integer("gap.side")), d);
    if (region.size() * species.size() > 64) throw ConfigError("gap.M", "region too large for exact enumeration");
    const std::string rname = region_kind == "cube" ? "cube(M=" + std::to_string(M) + ",d=" + std::to_string(d) + ")"
                                                    : "box(side=" + ctx.cfg.text("gap.side") + ",d=" + std::to_string(d) + ")";
    const auto sectors = sector_list(region, species);
    std::vector<GapReport> reps(sectors.size());
    parallel_for(sectors.size(), [&](std::size_t i) {
      if (sectors[i].second < 1.5) {
        reps[i].sector = sectors[i].first.to_string();
        reps[i].dim = 1;
        reps[i].trivial = true;
        reps[i].method = "trivial";
        return;
      }
      const auto g = build_sector(region, species, quads, sectors[i].first, static_cast<int>(M),
                                  bounded ? ExchangeKind::bounded : ExchangeKind::uniform, false);
      reps[i] = spectral_gap(g, opt);
    });
    for (const auto& r : reps) {
      if (r.trivial) continue;
      csv.row(rname, M, r.sector, r.dim, r.gap, r.bound_ratio, r.method);
      rows.push_back({{"region", rname}, {"M", M}, {"sector", r.sector}, {"dim_H", r.dim}, {"gap", r.gap},
                      {"bound_ratio", r.bound_ratio}});
      c2 = std::max(c2, r.bound_ratio);
    }
  }
  ctx.outputs.push_back("gaps.csv");
  json s;
  s["rows"] = rows;
  s["fitted_C2"] = c2;
  return s;
}

json run_modes(RunContext& ctx) {
  const int maxL = static_cast<int>(ctx.cfg.integer("modes.max_Lbar"));
  const int maxd = static_cast<int>(ctx.cfg.integer("modes.max_d"));
  if (maxL < 1) throw ConfigError("modes.max_Lbar", "must be >= 1");
  if (maxd < 1) throw ConfigError("modes.max_d", "must be >= 1");
  Csv csv(ctx.dir / "modes.csv");
  csv.row("Lbar", "d", "I0", "I", "points", "solutions", "greedy_ok", "equal_weight", "diameter");
  json rows = json::array();
  std::size_t instances = 0, failures = 0;
  for (int d = 1; d <= maxd; ++d)
    for (int L = 1; L <= maxL; ++L)
      for (const auto& c : feasible_instances(L, d)) {
        const auto pts = hyperplane(c);
        if (pts.empty()) continue;
        ++instances;
        const auto ms = all_modes_bruteforce(c);
        bool greedy_ok = true;
        for (const auto& s : pts) {
          const auto g = greedy_mode(c, s);
          greedy_ok = greedy_ok && std::find(ms.solutions.begin(), ms.solutions.end(), g) != ms.solutions.end();
        }
        bool equal = ms.solutions == ms.maximizers;
        for (const auto& s : ms.solutions) equal = equal && weight(c, s) == ms.max_weight;
        const int diam = solution_diameter(c, ms.solutions);
        if (!greedy_ok || !equal || diam < 0 || diam > d / 2) ++failures;
        std::string I;
        for (std::size_t j = 0; j < c.I.size(); ++j) I += (j ? " " : "") + std::to_string(c.I[j]);
        csv.row(L, d, c.I0, I, pts.size(), ms.solutions.size(), greedy_ok ? 1 : 0, equal ? 1 : 0, diam);
        rows.push_back({{"Lbar", L}, {"d", d}, {"solutions", ms.solutions.size()}});
      }
  ctx.outputs.push_back("modes.csv");
  json s;
  s["instances"] = instances;
  s["failures"] = failures;
  s["rows"] = rows;
  return s;
}

json run_ensembles(RunContext& ctx) {
  const std::string model = ctx.cfg.text("ensembles.model");
  const int d = static_cast<int>(ctx.cfg.integer("ensembles.d"));
  const auto sides = ctx.cfg.integers("ensembles.sides");
  const int nf = static_cast<int>(ctx.cfg.integer("ensembles.functions"));
  const int block = static_cast<int>(ctx.cfg.integer("ensembles.block"));
  const double mf = ctx.cfg.real("ensembles.mass_fraction");
  const double pf = ctx.cfg.real("ensembles.momentum_fraction");
  if (d < 1 || d > 3) throw ConfigError("ensembles.d", "must be 1, 2 or 3");
  if (block < 1) throw ConfigError("ensembles.block", "must be >= 1");
  if (nf < 1) throw ConfigError("ensembles.functions", "must be >= 1");
  if (sides.empty()) throw ConfigError("ensembles.sides", "needs at least one side");
  std::optional<VelocitySet> vs;
  SpeciesTable species = SpeciesTable::scalar(d);
  if (model != "scalar") {
    vs = velocity_set_named(model, d, "ensembles.model");
    species = SpeciesTable::of(*vs);
  }
  if (static_cast<std::size_t>(block) * species.size() > 20)
    throw ConfigError("ensembles.block", "block too large to enumerate");
  const auto sector_of = [&](long L) {
    double sites = 1;
    for (int k = 0; k < d; ++k) sites *= static_cast<double>(L);
    ConservedVector t = species.zero();
    t.mass = std::llround(mf * sites);
    if (!t.momentum.empty()) t.momentum[0] = ExactCoord{std::llround(pf * sites), 0};
    return t;
  };
  // Function 0: two-point function of the first species; the rest random tables.
  const std::size_t per = std::size_t{1} << species.size();
  std::size_t states = 1;
  for (int i = 0; i < block; ++i) states *= per;
  std::vector<LocalFunction> fs;
  fs.push_back([](std::span<const std::uint32_t> m) {
    return m.size() >= 2 ? double((m[0] & 1u) * (m[1] & 1u)) : double(m[0] & 1u);
  });
  ctx.streams.push_back("ensembles/f");
  for (int i = 1; i < nf; ++i) {
    Rng rng(ctx.seed, "ensembles/f", static_cast<std::uint64_t>(i));
    auto table = std::make_shared<std::vector<double>>(states);
    for (auto& v : *table) v = 2.0 * rng.uniform() - 1.0;
    fs.push_back([table, per](std::span<const std::uint32_t> m) {
      std::size_t idx = 0;
      for (std::size_t k = m.size(); k-- > 0;) idx = idx * per + m[k];
      return (*table)[idx];
    });
  }
  std::vector<ScalingReport> reps(fs.size());
  std::vector<long> sv(sides.begin(), sides.end());
  parallel_for(fs.size(), [&](std::size_t i) {
    reps[i] = hs1_scaling(fs[i], static_cast<std::size_t>(block), species, vs ? &*vs : nullptr, sector_of, sv);
  });
  Csv csv(ctx.dir / "ensembles.csv");
  csv.row("function", "L", "canonical", "grand", "difference", "bound");
  json rows = json::array(), slopes = json::array();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (const auto& r : reps[i].rows) {
      csv.row(i, r.L, r.canonical, r.grand, r.difference, r.bound_ref);
      rows.push_back({{"function", i}, {"L", r.L}, {"difference", r.difference}, {"bound", r.bound_ref}});
    }
    slopes.push_back(reps[i].slope);
  }
  ctx.outputs.push_back("ensembles.csv");
  json s;
  s["rows"] = rows;
  s["slopes"] = slopes;
  return s;
}

} // namespace

json run_scenario(const ExperimentConfig& config) {
  const std::string scenario = config.text("run.scenario");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end())
    throw ConfigError("run.scenario", "unknown scenario '" + scenario + "'");
  const long seed = config.integer("run.seed");
  if (seed < 0) throw ConfigError("run.seed", "must be nonnegative");
  RunContext ctx{config, fs::path(config.text("run.output")), static_cast<std::uint64_t>(seed), {}, {}};
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  if (ec) throw IoError("cannot create output directory " + ctx.dir.string() + ": " + ec.message());

  json summary;
  if (scenario == "validate")
    summary = run_validate(ctx);
  else if (scenario == "latticegas")
    summary = run_latticegas(ctx);
  else if (scenario == "pde")
    summary = run_pde(ctx);
  else if (scenario == "exclusion-incompressible")
    summary = run_compare(ctx);
  else if (scenario == "gap-scan")
    summary = run_gap(ctx);
  else if (scenario == "modes-scan")
    summary = run_modes(ctx);
  else
    summary = run_ensembles(ctx);

  json manifest;
  manifest["scenario"] = scenario;
  manifest["version"] = library_version();
  manifest["config"] = config.to_json();
  manifest["seeds"] = {{"root", ctx.seed}, {"streams", ctx.streams}};
  manifest["outputs"] = ctx.outputs;
  manifest["summary"] = summary;
  std::ofstream out(ctx.dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + ctx.dir.string());
  out << manifest.dump(2) << '\n';
  return summary;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<double>> read_numeric_csv(const fs::path& p, std::vector<std::string>& header) {
  std::ifstream in(p);
  if (!in) throw IoError("missing artifact " + p.string());
  std::string line;
  std::getline(in, line);
  header.clear();
  boost::algorithm::split(header, line, boost::is_any_of(","));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    boost::algorithm::split(cells, line, boost::is_any_of(","));
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(std::stod(c));
    rows.push_back(std::move(r));
  }
  return rows;
}

} // namespace

std::vector<std::string> emit_plotdata(const std::string& dir) {
  const fs::path root(dir);
  const fs::path mpath = root / "manifest.json";
  if (!fs::exists(mpath)) throw IoError("no manifest.json in '" + dir + "' (not a completed run)");
  json m;
  {
    std::ifstream in(mpath);
    try {
      in >> m;
    } catch (const json::exception& e) {
      throw IoError(std::string("unreadable manifest: ") + e.what());
    }
  }
  const fs::path out = root / "plotdata";
  fs::create_directories(out);
  std::vector<std::string> written;
  const std::string scenario = m.value("scenario", "");
  const json& s = m["summary"];
  auto series = [&](const std::string& name) {
    written.push_back((out / name).string());
    auto csv = std::make_unique<Csv>(out / name);
    csv->row("series", "x", "y", "stderr");
    return csv;
  };
  if (scenario == "exclusion-incompressible") {
    auto csv = series("compare.csv");
    for (const auto& r : s["rows"])
      csv->row("t=" + num(r["t"].get<double>()), r["N"].get<double>(), r["mean_error"].get<double>(),
               r["stderr"].get<double>());
  } else if (scenario == "gap-scan") {
    auto csv = series("gap.csv");
    for (const auto& r : s["rows"])
      csv->row(r["sector"].get<std::string>(), r["M"].get<double>(), r["gap"].get<double>(), 0.0);
  } else if (scenario == "ensembles-scan") {
    auto csv = series("ensembles.csv");
    for (const auto& r : s["rows"])
      csv->row("f" + std::to_string(r["function"].get<int>()), r["L"].get<double>(),
               std::abs(r["difference"].get<double>()), 0.0);
  } else if (scenario == "latticegas") {
    auto csv = series("modes.csv");
    for (const auto& r : s["rows"])
      csv->row("channel" + std::to_string(r["channel"].get<int>()) + "_axis" + std::to_string(r["axis"].get<int>()) +
                   "_n" + std::to_string(r["n"].get<int>()),
               r["t"].get<double>(), r["mean_re"].get<double>(), r["stderr"].get<double>());
  } else if (scenario == "modes-scan") {
    auto csv = series("modes.csv");
    for (const auto& r : s["rows"])
      csv->row("d=" + std::to_string(r["d"].get<int>()), r["Lbar"].get<double>(), r["solutions"].get<double>(), 0.0);
  } else if (scenario == "pde") {
    std::vector<std::string> header;
    const auto rows = read_numeric_csv(root / "field.csv", header);
    std::size_t d = 0;
    while (d < header.size() && header[d].starts_with("x")) ++d;
    const std::size_t ncomp = header.size() - d;
    for (std::size_t c = 0; c < ncomp; ++c) {
      const std::string name = "field_c" + std::to_string(c) + ".csv";
      std::ofstream g(out / name);
      written.push_back((out / name).string());
      if (d == 1) {
        g << "x";
        for (const auto& r : rows) g << ',' << num(r[0]);
        g << "\nvalue";
        for (const auto& r : rows) g << ',' << num(r[1 + c]);
        g << '\n';
      } else {
        // Grid of the first two axes at the first value of the remaining ones;
        // rows are ordered with the last axis fastest.
        std::size_t n = 0;
        while (n < rows.size() && rows[n][0] == rows[0][0]) ++n;
        const std::size_t side =
            d == 2 ? n : static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
        const std::size_t stride1 = d == 2 ? 1 : side;
        const std::size_t stride0 = n;
        g << "x0\\x1";
        for (std::size_t j = 0; j < side; ++j) g << ',' << num(rows[j * stride1][1]);
        g << '\n';
        for (std::size_t i = 0; i < side; ++i) {
          g << num(rows[i * stride0][0]);
          for (std::size_t j = 0; j < side; ++j) g << ',' << num(rows[i * stride0 + j * stride1][d + c]);
          g << '\n';
        }
      }
    }
  } else if (scenario == "validate") {
    auto csv = series("validate.csv");
    if (s.contains("moments"))
      for (const auto& [k, v] : s["moments"].items()) csv->row(k, 0.0, v.get<double>(), 0.0);
    if (s.contains("coefficients"))
      for (const auto& [k, v] : s["coefficients"].items()) csv->row(k, 0.0, v.get<double>(), 0.0);
  } else {
    throw IoError("manifest names an unknown scenario '" + scenario + "'");
  }
  return written;
}

} // namespace latgas
