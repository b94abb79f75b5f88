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

#ifndef PICASSO_CORE_REPORT_H_
#define PICASSO_CORE_REPORT_H_

#include <string>
#include <vector>

#include "json.hpp"

#include "core/runner.h"
#include "core/scheme.h"

namespace picasso {

// Flat key/value document for one run. Key order is stable and shared by
// the CSV header.
nlohmann::ordered_json RunToJson(const RunResult& result,
                                 const RunConfig& config);

std::string RenderRun(const RunResult& result, const RunConfig& config,
                      OutputFormat format);

struct SchemeRun {
  RunConfig config;
  RunResult result;
};

// One row per run, sorted by scheme name.
std::string RenderCompare(std::vector<SchemeRun> runs, OutputFormat format);

// Case x scheme matrix plus per-scheme detection totals.
std::string RenderCorpus(const CorpusReport& report, OutputFormat format);

// "line N (op I): expected X, got Y" for each recorded mismatch.
std::string RenderMismatches(const RunResult& result);

}  // namespace picasso

#endif  // PICASSO_CORE_REPORT_H_
