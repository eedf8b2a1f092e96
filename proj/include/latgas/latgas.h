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

#ifndef LATGAS_LATGAS_H
#define LATGAS_LATGAS_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LATGAS_API __declspec(dllexport)
#else
#define LATGAS_API __attribute__((visibility("default")))
#endif

/* Status codes; the CLI uses the same numbers as process exit codes. */
typedef enum latgas_status {
  LATGAS_OK = 0,
  LATGAS_INVALID_ARGUMENT = 1,
  LATGAS_CONFIG_ERROR = 2,
  LATGAS_RUNTIME_ERROR = 3
} latgas_status;

typedef struct latgas_experiment latgas_experiment;

LATGAS_API const char* latgas_version(void);
/* Worker threads used for replicas and sector sweeps (LATGAS_WORKERS). */
LATGAS_API unsigned latgas_worker_count(void);
/* Message of the last failure on this thread, "" if none. */
LATGAS_API const char* latgas_last_error(void);
/* Configuration key blamed by the last config error on this thread, "" if none. */
LATGAS_API const char* latgas_last_error_field(void);

LATGAS_API latgas_status latgas_experiment_create(latgas_experiment** out);
LATGAS_API void latgas_experiment_destroy(latgas_experiment* exp);
/* INI file or a manifest.json from an earlier run. */
LATGAS_API latgas_status latgas_experiment_load(latgas_experiment* exp, const char* path);
/* key is "section.key". */
LATGAS_API latgas_status latgas_experiment_set(latgas_experiment* exp, const char* key, const char* value);
/* "section.key=value". */
LATGAS_API latgas_status latgas_experiment_override(latgas_experiment* exp, const char* assignment);
/* Copies the value into buf (NUL-terminated); fails if it does not fit. */
LATGAS_API latgas_status latgas_experiment_get(const latgas_experiment* exp, const char* key, char* buf, size_t len);
/* Whole configuration as a JSON object; valid until the next call on exp. */
LATGAS_API const char* latgas_experiment_config_json(latgas_experiment* exp);
LATGAS_API latgas_status latgas_experiment_run(latgas_experiment* exp);
/* Summary JSON of the last successful run, "" before any run. */
LATGAS_API const char* latgas_experiment_summary(const latgas_experiment* exp);

/* Writes plot tables for a finished run directory; returns the number of
   files through *count when count is non-null. */
LATGAS_API latgas_status latgas_emit_plotdata(const char* dir, size_t* count);

/* Coefficients (A0, A1, A2) of the limiting incompressible equation for
   "model1" (dim 1..3) or "model2" (dim 3). */
LATGAS_API latgas_status latgas_ns_coefficients(const char* model, int dim, double out[3]);

#ifdef __cplusplus
}
#endif

#endif
