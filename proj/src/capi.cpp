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

#include "latgas/latgas.h"

#include <cstring>
#include <exception>
#include <string>

#include "latgas/dynamics.hpp"
#include "latgas/error.hpp"
#include "latgas/experiment.hpp"
#include "latgas/velocity.hpp"

struct latgas_experiment {
  latgas::ExperimentConfig config;
  std::string summary;
  std::string config_json;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_field;

latgas_status fail(latgas_status s, std::string msg, std::string field = {}) {
  g_error = std::move(msg);
  g_field = std::move(field);
  return s;
}

template <class F>
latgas_status guarded(F&& f) {
  g_error.clear();
  g_field.clear();
  try {
    f();
    return LATGAS_OK;
  } catch (const latgas::ConfigError& e) {
    return fail(LATGAS_CONFIG_ERROR, e.what(), e.field());
  } catch (const latgas::InvalidParameters& e) {
    return fail(LATGAS_CONFIG_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(LATGAS_RUNTIME_ERROR, e.what());
  } catch (...) {
    return fail(LATGAS_RUNTIME_ERROR, "unknown failure");
  }
}

} // namespace

extern "C" {

const char* latgas_version(void) { return latgas::library_version(); }

unsigned latgas_worker_count(void) { return latgas::worker_count(); }

const char* latgas_last_error(void) { return g_error.c_str(); }

const char* latgas_last_error_field(void) { return g_field.c_str(); }

latgas_status latgas_experiment_create(latgas_experiment** out) {
  if (!out) return fail(LATGAS_INVALID_ARGUMENT, "null output handle");
  return guarded([&] { *out = new latgas_experiment(); });
}

void latgas_experiment_destroy(latgas_experiment* exp) { delete exp; }

latgas_status latgas_experiment_load(latgas_experiment* exp, const char* path) {
  if (!exp || !path) return fail(LATGAS_INVALID_ARGUMENT, "null argument");
  return guarded([&] { exp->config = latgas::ExperimentConfig::load(path); });
}

latgas_status latgas_experiment_set(latgas_experiment* exp, const char* key, const char* value) {
  if (!exp || !key || !value) return fail(LATGAS_INVALID_ARGUMENT, "null argument");
  return guarded([&] { exp->config.set(key, value); });
}

latgas_status latgas_experiment_override(latgas_experiment* exp, const char* assignment) {
  if (!exp || !assignment) return fail(LATGAS_INVALID_ARGUMENT, "null argument");
  return guarded([&] { exp->config.apply_override(assignment); });
}

latgas_status latgas_experiment_get(const latgas_experiment* exp, const char* key, char* buf, size_t len) {
  if (!exp || !key || !buf) return fail(LATGAS_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string& v = exp->config.get(key);
    if (v.size() + 1 > len) throw latgas::Error("buffer too small for value of " + std::string(key));
    std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

const char* latgas_experiment_config_json(latgas_experiment* exp) {
  if (!exp) return "";
  exp->config_json = exp->config.to_json().dump();
  return exp->config_json.c_str();
}

latgas_status latgas_experiment_run(latgas_experiment* exp) {
  if (!exp) return fail(LATGAS_INVALID_ARGUMENT, "null handle");
  return guarded([&] { exp->summary = latgas::run_scenario(exp->config).dump(); });
}

const char* latgas_experiment_summary(const latgas_experiment* exp) { return exp ? exp->summary.c_str() : ""; }

latgas_status latgas_emit_plotdata(const char* dir, size_t* count) {
  if (!dir) return fail(LATGAS_INVALID_ARGUMENT, "null directory");
  return guarded([&] {
    const auto files = latgas::emit_plotdata(dir);
    if (count) *count = files.size();
  });
}

latgas_status latgas_ns_coefficients(const char* model, int dim, double out[3]) {
  if (!model || !out) return fail(LATGAS_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    latgas::SimParams p;
    p.model = model;
    p.d = dim;
    if (dim < 1 || dim > 3) throw latgas::InvalidParameters("dim must be 1, 2 or 3");
    const auto c = latgas::ns_coefficients(latgas::moments(latgas::velocity_set_for(p)));
    out[0] = c.A0;
    out[1] = c.A1;
    out[2] = c.A2;
  });
}

} // extern "C"
