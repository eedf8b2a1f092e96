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
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latgas/dynamics.hpp"

namespace latgas {

/// Library version string written into manifests.
const char* library_version();

/// Flat "section.key" -> value configuration checked against a fixed schema.
/// Values are stored as text so a manifest reproduces the run exactly.
class ExperimentConfig {
public:
  ExperimentConfig();

  /// INI-style file ([section] key = value) or a JSON manifest written by a
  /// previous run.
  static ExperimentConfig load(const std::string& path);

  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// "section.key=value".
  void apply_override(const std::string& assignment);
  const std::string& get(const std::string& key) const;

  std::string text(const std::string& key) const { return get(key); }
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<long> integers(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  nlohmann::json to_json() const;

  /// SimParams assembled from the sim.* keys.
  SimParams sim_params() const;

private:
  std::map<std::string, std::string> values_;
};

/// Names accepted by run.scenario.
const std::vector<std::string>& scenario_names();

/// Runs the scenario named in the config, writes its outputs and manifest.json
/// into run.output, and returns the summary that is also stored there.
nlohmann::json run_scenario(const ExperimentConfig& config);

/// Turns a finished run directory into long-format plot tables under
/// <dir>/plotdata. Returns the files written. Throws IoError when the
/// directory holds no manifest.
std::vector<std::string> emit_plotdata(const std::string& dir);

// Experiments shared by the runner and the acceptance checks.

struct CompareRow {
  long N = 0;
  int M = 0;
  double t = 0.0;
  double mean_error = 0.0;
  double stderr_error = 0.0;
  double mean_events = 0.0;
};

struct CompareSpec {
  std::vector<long> sizes{256, 512, 1024};
  std::vector<double> times{0.02, 0.05};
  double a = 0.6;
  double b = 0.1;
  double amplitude = 0.25;
  int replicas = 32;
  int modes = 4;
  int pde_grid = 256;
  std::uint64_t seed = 1;
};

/// Scalar exclusion started from 1/2 + N^{-b} A sin(2 pi u): per replica, the
/// L2 distance between the first Fourier modes of the fluctuation field and
/// of the limiting equation, averaged over replicas.
std::vector<CompareRow> exclusion_incompressible(const CompareSpec& spec);

struct ShearSpec {
  long N = 64;
  double a = 0.88;
  double b = 0.05;
  int M = 0;
  double amplitude = 0.2;
  double T = 0.0176;
  int replicas = 16;
  std::uint64_t seed = 1;
};

struct ShearReport {
  double initial = 0.0;   ///< mean pairing of momentum with sin(2 pi u_2) at t = 0
  double final = 0.0;     ///< same at T
  double final_stderr = 0.0;
  double rate = 0.0;      ///< -log(final / initial) / T
  bool conserved = true;  ///< totals unchanged in every replica
  std::uint64_t events = 0;
};

/// Model I, d = 2 shear perturbation p_1 = A sin(2 pi u_2) of the uniform
/// state; measures the decay rate of the perturbed mode.
ShearReport shear_decay(const ShearSpec& spec);

} // namespace latgas
