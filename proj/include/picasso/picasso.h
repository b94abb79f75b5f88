// Copyright 2026 The Picasso Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// C interface to the colored-capability temporal-safety simulator.
//
// All objects are opaque and owned by the caller once returned. Functions
// return a picasso_status; on failure picasso_last_error() describes the
// problem until the next call on the same thread. Strings returned through
// char** out-parameters must be released with picasso_string_free().

#ifndef PICASSO_PICASSO_H_
#define PICASSO_PICASSO_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PICASSO_API __declspec(dllexport)
#elif defined(__GNUC__)
#define PICASSO_API __attribute__((visibility("default")))
#else
#define PICASSO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum picasso_status {
  PICASSO_OK = 0,
  PICASSO_ERR_INVALID_ARGUMENT = 1,
  PICASSO_ERR_CONFIG = 2,
  PICASSO_ERR_PARSE = 3,
  PICASSO_ERR_IO = 4,
  PICASSO_ERR_NOT_FOUND = 5,
  PICASSO_ERR_INTERNAL = 6,
} picasso_status;

typedef enum picasso_format {
  PICASSO_FORMAT_JSON = 0,
  PICASSO_FORMAT_CSV = 1,
  PICASSO_FORMAT_HUMAN = 2,
} picasso_format;

typedef struct picasso_config picasso_config_t;
typedef struct picasso_source picasso_source_t;
typedef struct picasso_result picasso_result_t;

PICASSO_API const char* picasso_last_error(void);
PICASSO_API const char* picasso_status_string(picasso_status status);
PICASSO_API void picasso_string_free(char* s);

// Run configuration. Defaults: scheme picasso, 21 color bits, threshold
// 0.01, quarantine fraction 0.25, 32 MiB heap, PVT buffer on, sync sweeps,
// seed 1, JSON output.
PICASSO_API picasso_status picasso_config_create(picasso_config_t** out);
PICASSO_API void picasso_config_destroy(picasso_config_t* config);
// Keys: scheme, color_bits, threshold, quarantine_fraction, heap_size,
// pvt_buffer (on|off), sweep (sync|windowed:N), seed, format
// (json|csv|human), versioning_exhaustion (on|off), record_outcomes
// (on|off), capture_dumps (on|off).
PICASSO_API picasso_status picasso_config_set(picasso_config_t* config,
                                              const char* key,
                                              const char* value);
PICASSO_API picasso_status picasso_config_validate(
    const picasso_config_t* config);
PICASSO_API picasso_format picasso_config_format(
    const picasso_config_t* config);
PICASSO_API uint64_t picasso_config_seed(const picasso_config_t* config);

// Op sources. A generator spec looks like "churn:n=1000,live=10,seed=1";
// default_seed applies when the spec has no seed.
PICASSO_API picasso_status picasso_source_from_text(const char* text,
                                                    picasso_source_t** out);
PICASSO_API picasso_status picasso_source_from_file(const char* path,
                                                    picasso_source_t** out);
PICASSO_API picasso_status picasso_source_from_generator(
    const char* spec, uint64_t default_seed, picasso_source_t** out);
PICASSO_API void picasso_source_destroy(picasso_source_t* source);
// The source as trace text.
PICASSO_API picasso_status picasso_source_format(
    const picasso_source_t* source, char** out_text);

PICASSO_API picasso_status picasso_run(const picasso_source_t* source,
                                       const picasso_config_t* config,
                                       picasso_result_t** out);
PICASSO_API void picasso_result_destroy(picasso_result_t* result);
// Numeric report fields by name, e.g. "revocations" or "faults_DoubleFree".
PICASSO_API picasso_status picasso_result_get(const picasso_result_t* result,
                                              const char* key,
                                              uint64_t* out);
PICASSO_API picasso_status picasso_result_get_double(
    const picasso_result_t* result, const char* key, double* out);
PICASSO_API picasso_status picasso_result_render(
    const picasso_result_t* result, picasso_format format, char** out_text);
// One line per expectation that did not hold; empty if all matched.
PICASSO_API picasso_status picasso_result_mismatches(
    const picasso_result_t* result, char** out_text);
// which: "memory", "pvt" or "unr". Requires capture_dumps.
PICASSO_API picasso_status picasso_result_dump(const picasso_result_t* result,
                                               const char* which,
                                               char** out_text);

// Runs the same source under each scheme (config supplies everything
// else) and renders one row per scheme. *out_mismatches receives the total
// number of unmet expectations over all runs.
PICASSO_API picasso_status picasso_compare(const picasso_source_t* source,
                                           const picasso_config_t* config,
                                           const char* const* schemes,
                                           size_t scheme_count,
                                           picasso_format format,
                                           char** out_text,
                                           uint64_t* out_mismatches);

// Runs the built-in corpus under each scheme. *out_picasso_perfect is 1 if
// the picasso scheme was requested and detected every bad case without a
// false positive, else 0.
PICASSO_API picasso_status picasso_corpus(const picasso_config_t* config,
                                          const char* const* schemes,
                                          size_t scheme_count,
                                          picasso_format format,
                                          char** out_text,
                                          int* out_picasso_perfect);
PICASSO_API size_t picasso_corpus_size(void);
// Name ("<pattern>/<size>/<good|bad>") and trace text of corpus case i.
PICASSO_API picasso_status picasso_corpus_case(size_t index, char** out_name,
                                               char** out_text);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // PICASSO_PICASSO_H_
