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

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latgas/latgas.h"

namespace {

struct RunOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string output;
  long long seed = -1;
  int replicas = 0;
};

int report(latgas_status s) {
  if (s == LATGAS_OK) return 0;
  std::cerr << "latgas: " << latgas_last_error() << '\n';
  return static_cast<int>(s);
}

int run(const std::string& scenario, const RunOptions& o) {
  latgas_experiment* exp = nullptr;
  if (latgas_status s = latgas_experiment_create(&exp); s != LATGAS_OK) return report(s);
  auto step = [&](latgas_status s) { return s == LATGAS_OK ? 0 : report(s); };
  int rc = 0;
  if (!o.config.empty()) rc = step(latgas_experiment_load(exp, o.config.c_str()));
  if (!rc) rc = step(latgas_experiment_set(exp, "run.scenario", scenario.c_str()));
  if (!rc && !o.output.empty()) rc = step(latgas_experiment_set(exp, "run.output", o.output.c_str()));
  if (!rc && o.seed >= 0) rc = step(latgas_experiment_set(exp, "run.seed", std::to_string(o.seed).c_str()));
  if (!rc && o.replicas > 0)
    rc = step(latgas_experiment_set(exp, "run.replicas", std::to_string(o.replicas).c_str()));
  for (const auto& s : o.sets)
    if (!rc) rc = step(latgas_experiment_override(exp, s.c_str()));
  if (!rc) rc = step(latgas_experiment_run(exp));
  if (!rc) {
    const auto summary = nlohmann::json::parse(latgas_experiment_summary(exp));
    char dir[4096];
    latgas_experiment_get(exp, "run.output", dir, sizeof dir);
    nlohmann::json brief = summary;
    // Long tables stay in the run directory.
    if (brief.contains("rows") && brief["rows"].size() > 20) brief["rows"] = std::to_string(brief["rows"].size()) + " rows";
    std::cout << brief.dump(2) << "\noutput: " << dir << '\n';
  }
  latgas_experiment_destroy(exp);
  return rc;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice gas simulator and validation harness"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "Worker threads (overrides LATGAS_WORKERS)")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", std::string(latgas_version()));

  struct Sub {
    const char* name;
    const char* scenario;
    const char* help;
  };
  const std::vector<Sub> subs = {
      {"validate", "validate", "Moment, kernel and exponent audits"},
      {"simulate", "latticegas", "Run particle trajectories and record observables"},
      {"pde", "pde", "Solve a limiting equation on its own"},
      {"compare", "exclusion-incompressible", "Particle fluctuation field against the limiting equation"},
      {"gap", "gap-scan", "Spectral gaps of every sector of a block"},
      {"modes", "modes-scan", "Exhaustive check of the count-vector mode structure"},
      {"ensembles", "ensembles-scan", "Canonical against grand-canonical expectations"},
  };
  std::vector<RunOptions> opts(subs.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* c = app.add_subcommand(subs[i].name, subs[i].help);
    c->add_option("-c,--config", opts[i].config, "INI config or manifest.json of a previous run");
    c->add_option("-s,--set", opts[i].sets, "Override, section.key=value (repeatable)");
    c->add_option("-o,--output", opts[i].output, "Output directory");
    c->add_option("--seed", opts[i].seed, "Root seed");
    c->add_option("-r,--replicas", opts[i].replicas, "Replica count");
    cmds.push_back(c);
  }
  std::string plot_dir;
  auto* plot = app.add_subcommand("emit-plotdata", "Write long-format plot tables for a finished run");
  plot->add_option("dir", plot_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return LATGAS_CONFIG_ERROR;
  }
  if (workers > 0) setenv("LATGAS_WORKERS", std::to_string(workers).c_str(), 1);

  if (plot->parsed()) {
    size_t n = 0;
    if (latgas_status s = latgas_emit_plotdata(plot_dir.c_str(), &n); s != LATGAS_OK) return report(s);
    std::cout << "wrote " << n << " plot table(s) under " << plot_dir << "/plotdata\n";
    return 0;
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (cmds[i]->parsed()) return run(subs[i].scenario, opts[i]);
  return LATGAS_CONFIG_ERROR;
}
