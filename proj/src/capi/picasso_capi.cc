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

#include "picasso/picasso.h"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "core/generators.h"
#include "core/report.h"
#include "core/runner.h"
#include "core/scheme.h"
#include "core/trace.h"

struct picasso_config {
  picasso::RunConfig config;
};

struct picasso_source {
  std::unique_ptr<picasso::OpSource> prototype;
};

struct picasso_result {
  picasso::RunConfig config;
  picasso::RunResult result;
  nlohmann::ordered_json fields;
};

namespace {

thread_local std::string last_error;

picasso_status Fail(picasso_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

picasso_status Ok() {
  last_error.clear();
  return PICASSO_OK;
}

char* Dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

picasso::OutputFormat ToFormat(picasso_format f) {
  switch (f) {
    case PICASSO_FORMAT_CSV:
      return picasso::OutputFormat::kCsv;
    case PICASSO_FORMAT_HUMAN:
      return picasso::OutputFormat::kHuman;
    default:
      return picasso::OutputFormat::kJson;
  }
}

std::optional<bool> ParseSwitch(std::string_view v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  return std::nullopt;
}

template <typename T>
std::optional<T> ParseNumber(std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    return std::nullopt;
  return out;
}

picasso_status Emit(const std::string& s, char** out) {
  *out = Dup(s);
  if (!*out) return Fail(PICASSO_ERR_INTERNAL, "out of memory");
  return Ok();
}

picasso_status SchemeList(const char* const* schemes, size_t n,
                          std::vector<picasso::SchemeKind>* out) {
  if (n > 0 && !schemes)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "scheme list is null");
  for (size_t i = 0; i < n; ++i) {
    auto k = schemes[i] ? picasso::ParseSchemeKind(schemes[i]) : std::nullopt;
    if (!k)
      return Fail(PICASSO_ERR_CONFIG,
                  std::string("unknown scheme '") +
                      (schemes[i] ? schemes[i] : "(null)") + "'");
    out->push_back(*k);
  }
  return PICASSO_OK;
}

}  // namespace

extern "C" {

const char* picasso_last_error(void) { return last_error.c_str(); }

const char* picasso_status_string(picasso_status status) {
  switch (status) {
    case PICASSO_OK:
      return "ok";
    case PICASSO_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case PICASSO_ERR_CONFIG:
      return "configuration error";
    case PICASSO_ERR_PARSE:
      return "parse error";
    case PICASSO_ERR_IO:
      return "i/o error";
    case PICASSO_ERR_NOT_FOUND:
      return "not found";
    case PICASSO_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void picasso_string_free(char* s) { std::free(s); }

picasso_status picasso_config_create(picasso_config_t** out) {
  if (!out) return Fail(PICASSO_ERR_INVALID_ARGUMENT, "out is null");
  *out = new picasso_config;
  return Ok();
}

void picasso_config_destroy(picasso_config_t* config) { delete config; }

picasso_status picasso_config_set(picasso_config_t* config, const char* key,
                                  const char* value) {
  if (!config || !key || !value)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  picasso::RunConfig& c = config->config;
  const std::string_view k = key;
  const std::string_view v = value;
  auto bad = [&] {
    return Fail(PICASSO_ERR_CONFIG,
                "invalid value '" + std::string(v) + "' for " + std::string(k));
  };

  if (k == "scheme") {
    auto s = picasso::ParseSchemeKind(v);
    if (!s) return bad();
    c.scheme = *s;
  } else if (k == "color_bits") {
    auto n = ParseNumber<unsigned>(v);
    if (!n) return bad();
    c.color_bits = *n;
  } else if (k == "threshold") {
    auto d = ParseNumber<double>(v);
    if (!d) return bad();
    c.threshold_fraction = *d;
  } else if (k == "quarantine_fraction") {
    auto d = ParseNumber<double>(v);
    if (!d) return bad();
    c.quarantine_fraction = *d;
  } else if (k == "heap_size") {
    auto n = ParseNumber<uint64_t>(v);
    if (!n) return bad();
    c.heap_size = *n;
  } else if (k == "pvt_buffer") {
    auto b = ParseSwitch(v);
    if (!b) return bad();
    c.pvt_buffer = *b;
  } else if (k == "sweep") {
    auto s = picasso::ParseSweepMode(v);
    if (!s) return bad();
    c.sweep = *s;
  } else if (k == "seed") {
    auto n = ParseNumber<uint64_t>(v);
    if (!n) return bad();
    c.seed = *n;
  } else if (k == "format") {
    auto f = picasso::ParseOutputFormat(v);
    if (!f) return bad();
    c.format = *f;
  } else if (k == "versioning_exhaustion") {
    auto b = ParseSwitch(v);
    if (!b) return bad();
    c.versioning_exhaustion = *b;
  } else if (k == "record_outcomes") {
    auto b = ParseSwitch(v);
    if (!b) return bad();
    c.record_outcomes = *b;
  } else if (k == "capture_dumps") {
    auto b = ParseSwitch(v);
    if (!b) return bad();
    c.capture_dumps = *b;
  } else {
    return Fail(PICASSO_ERR_NOT_FOUND, "unknown key '" + std::string(k) + "'");
  }
  return Ok();
}

picasso_status picasso_config_validate(const picasso_config_t* config) {
  if (!config) return Fail(PICASSO_ERR_INVALID_ARGUMENT, "config is null");
  auto v = config->config.Validate();
  if (!v) return Fail(PICASSO_ERR_CONFIG, v.error());
  return Ok();
}

picasso_format picasso_config_format(const picasso_config_t* config) {
  if (!config) return PICASSO_FORMAT_JSON;
  switch (config->config.format) {
    case picasso::OutputFormat::kCsv:
      return PICASSO_FORMAT_CSV;
    case picasso::OutputFormat::kHuman:
      return PICASSO_FORMAT_HUMAN;
    default:
      return PICASSO_FORMAT_JSON;
  }
}

uint64_t picasso_config_seed(const picasso_config_t* config) {
  return config ? config->config.seed : 0;
}

picasso_status picasso_source_from_text(const char* text,
                                        picasso_source_t** out) {
  if (!text || !out) return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  auto trace = picasso::ParseTrace(text);
  if (!trace) return Fail(PICASSO_ERR_PARSE, trace.error().ToString());
  *out = new picasso_source{
      std::make_unique<picasso::TraceSource>(std::move(*trace))};
  return Ok();
}

picasso_status picasso_source_from_file(const char* path,
                                        picasso_source_t** out) {
  if (!path || !out) return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  std::ifstream in(path, std::ios::binary);
  if (!in) return Fail(PICASSO_ERR_IO, std::string("cannot open ") + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto trace = picasso::ParseTrace(ss.str());
  if (!trace)
    return Fail(PICASSO_ERR_PARSE,
                std::string(path) + ": " + trace.error().ToString());
  *out = new picasso_source{
      std::make_unique<picasso::TraceSource>(std::move(*trace))};
  return Ok();
}

picasso_status picasso_source_from_generator(const char* spec,
                                             uint64_t default_seed,
                                             picasso_source_t** out) {
  if (!spec || !out) return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  auto gen = picasso::MakeGenerator(spec, default_seed);
  if (!gen) return Fail(PICASSO_ERR_CONFIG, gen.error());
  *out = new picasso_source{std::move(*gen)};
  return Ok();
}

void picasso_source_destroy(picasso_source_t* source) { delete source; }

picasso_status picasso_source_format(const picasso_source_t* source,
                                     char** out_text) {
  if (!source || !out_text)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  auto ops = source->prototype->Clone();
  std::string text;
  while (auto op = ops->Next()) {
    text += picasso::FormatOp(*op);
    text += '\n';
  }
  return Emit(text, out_text);
}

picasso_status picasso_run(const picasso_source_t* source,
                           const picasso_config_t* config,
                           picasso_result_t** out) {
  if (!source || !config || !out)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  auto ops = source->prototype->Clone();
  auto res = picasso::RunTrace(*ops, config->config);
  if (!res) return Fail(PICASSO_ERR_CONFIG, res.error());
  auto* r = new picasso_result{config->config, std::move(*res), {}};
  r->fields = picasso::RunToJson(r->result, r->config);
  *out = r;
  return Ok();
}

void picasso_result_destroy(picasso_result_t* result) { delete result; }

picasso_status picasso_result_get(const picasso_result_t* result,
                                  const char* key, uint64_t* out) {
  if (!result || !key || !out)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  auto it = result->fields.find(key);
  if (it == result->fields.end() || !it->is_number_unsigned())
    return Fail(PICASSO_ERR_NOT_FOUND,
                std::string("no integer field '") + key + "'");
  *out = it->get<uint64_t>();
  return Ok();
}

picasso_status picasso_result_get_double(const picasso_result_t* result,
                                         const char* key, double* out) {
  if (!result || !key || !out)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  auto it = result->fields.find(key);
  if (it == result->fields.end() || !it->is_number())
    return Fail(PICASSO_ERR_NOT_FOUND,
                std::string("no numeric field '") + key + "'");
  *out = it->get<double>();
  return Ok();
}

picasso_status picasso_result_render(const picasso_result_t* result,
                                     picasso_format format, char** out_text) {
  if (!result || !out_text)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  return Emit(
      picasso::RenderRun(result->result, result->config, ToFormat(format)),
      out_text);
}

picasso_status picasso_result_mismatches(const picasso_result_t* result,
                                         char** out_text) {
  if (!result || !out_text)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  return Emit(picasso::RenderMismatches(result->result), out_text);
}

picasso_status picasso_result_dump(const picasso_result_t* result,
                                   const char* which, char** out_text) {
  if (!result || !which || !out_text)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  if (!result->config.capture_dumps)
    return Fail(PICASSO_ERR_CONFIG, "run was made without capture_dumps");
  const std::string_view w = which;
  if (w == "memory") return Emit(result->result.memory_dump, out_text);
  if (w == "pvt") return Emit(result->result.pvt_dump, out_text);
  if (w == "unr") return Emit(result->result.unr_dump, out_text);
  return Fail(PICASSO_ERR_NOT_FOUND, "unknown dump '" + std::string(w) + "'");
}

picasso_status picasso_compare(const picasso_source_t* source,
                               const picasso_config_t* config,
                               const char* const* schemes, size_t scheme_count,
                               picasso_format format, char** out_text,
                               uint64_t* out_mismatches) {
  if (!source || !config || !out_text)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  std::vector<picasso::SchemeKind> kinds;
  if (auto s = SchemeList(schemes, scheme_count, &kinds); s != PICASSO_OK)
    return s;
  std::vector<picasso::SchemeRun> runs;
  uint64_t mismatches = 0;
  for (picasso::SchemeKind k : kinds) {
    picasso::RunConfig c = config->config;
    c.scheme = k;
    c.record_outcomes = false;
    auto ops = source->prototype->Clone();
    auto res = picasso::RunTrace(*ops, c);
    if (!res) return Fail(PICASSO_ERR_CONFIG, res.error());
    mismatches += res->metrics.expectation_mismatches;
    runs.push_back({c, std::move(*res)});
  }
  if (out_mismatches) *out_mismatches = mismatches;
  return Emit(picasso::RenderCompare(std::move(runs), ToFormat(format)),
              out_text);
}

picasso_status picasso_corpus(const picasso_config_t* config,
                              const char* const* schemes, size_t scheme_count,
                              picasso_format format, char** out_text,
                              int* out_picasso_perfect) {
  if (!config || !out_text)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  std::vector<picasso::SchemeKind> kinds;
  if (auto s = SchemeList(schemes, scheme_count, &kinds); s != PICASSO_OK)
    return s;
  auto report = picasso::RunCorpus(kinds, config->config);
  if (!report) return Fail(PICASSO_ERR_CONFIG, report.error());
  if (out_picasso_perfect) {
    *out_picasso_perfect = 0;
    for (const auto& s : report->summaries)
      if (s.scheme == picasso::SchemeKind::kPicasso && s.perfect())
        *out_picasso_perfect = 1;
  }
  return Emit(picasso::RenderCorpus(*report, ToFormat(format)), out_text);
}

size_t picasso_corpus_size(void) { return picasso::GenCorpus().size(); }

picasso_status picasso_corpus_case(size_t index, char** out_name,
                                   char** out_text) {
  if (!out_name || !out_text)
    return Fail(PICASSO_ERR_INVALID_ARGUMENT, "null argument");
  const auto cases = picasso::GenCorpus();
  if (index >= cases.size())
    return Fail(PICASSO_ERR_NOT_FOUND, "corpus index out of range");
  const auto& c = cases[index];
  std::string text = "# " + c.name + " (" +
                     std::string(picasso::ToString(c.category)) + ")\n" +
                     picasso::FormatTrace(c.trace);
  if (auto s = Emit(c.name, out_name); s != PICASSO_OK) return s;
  return Emit(text, out_text);
}

}  // extern "C"
