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

#ifndef PICASSO_CORE_RUNNER_H_
#define PICASSO_CORE_RUNNER_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/expected.h"
#include "core/generators.h"
#include "core/scheme.h"
#include "core/trace.h"

namespace picasso {

// What the lifetime oracle thinks of an op, independent of any scheme.
enum class Verdict : uint8_t {
  kNotApplicable,  // no temporal question (allocation, copy, spatial error)
  kLegal,
  kUseAfterFree,
  kDoubleFree,
  kInvalidFree,  // interior, non-heap or null pointer
};

std::string_view ToString(Verdict v);

struct Metrics {
  uint64_t ops = 0;
  uint64_t allocations = 0;
  uint64_t frees = 0;
  uint64_t live_at_end = 0;
  uint64_t revocations = 0;
  uint64_t swept_tags = 0;
  uint64_t cleared_tags = 0;
  std::array<uint64_t, kFaultKindCount> faults{};
  uint64_t oom = 0;
  uint64_t exhausted = 0;
  uint64_t violations = 0;  // oracle-flagged ops
  uint64_t detected = 0;    // of which faulted
  uint64_t uaf_escapes = 0;
  uint64_t df_escapes = 0;  // double and invalid frees that went through
  uint64_t false_positives = 0;
  uint64_t expectation_mismatches = 0;
  uint64_t peak_live_bytes = 0;
  uint64_t peak_quarantine_bytes = 0;
  uint64_t peak_metadata_bytes = 0;
  uint64_t peak_resident_bytes = 0;
  uint64_t pvt_lookups = 0;
  uint64_t pvt_buffer_hits = 0;
  uint64_t pvt_buffer_misses = 0;
  uint64_t pvt_buffer_invalidations = 0;
  uint64_t read_digest = 0;     // FNV-1a over all bytes returned by reads
  uint64_t outcome_digest = 0;  // FNV-1a over the outcome sequence
  uint64_t state_digest = 0;    // machine memory, tags and registers at end

  uint64_t fault_total() const;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct Mismatch {
  uint64_t op_index;
  uint32_t line;
  Outcome expected;
  Outcome actual;
};

struct RunResult {
  Metrics metrics;
  std::vector<Outcome> outcomes;  // when RunConfig::record_outcomes
  std::vector<Verdict> verdicts;  // idem
  int64_t first_fault_op = -1;
  std::vector<Mismatch> mismatches;  // first few only
  // When RunConfig::capture_dumps.
  std::string memory_dump;
  std::string pvt_dump;
  std::string unr_dump;
};

inline constexpr size_t kMaxReportedMismatches = 16;

// Deterministic: the result depends only on (ops, config).
Expected<RunResult, std::string> RunTrace(OpSource& ops,
                                          const RunConfig& config);
Expected<RunResult, std::string> RunTrace(const Trace& trace,
                                          const RunConfig& config);

// Per-case result of running the corpus under one scheme.
struct CorpusOutcome {
  enum class Kind : uint8_t { kDetected, kEscaped, kFalsePositive, kClean };
  size_t case_index;  // into CorpusReport::cases
  SchemeKind scheme;
  Kind kind;
  Outcome at_offending;
};

std::string_view ToString(CorpusOutcome::Kind k);

struct CorpusSummary {
  SchemeKind scheme;
  uint64_t bad_uaf = 0, detected_uaf = 0;
  uint64_t bad_df = 0, detected_df = 0;
  uint64_t good = 0, false_positives = 0;

  bool perfect() const {
    return detected_uaf == bad_uaf && detected_df == bad_df &&
           false_positives == 0;
  }
};

struct CorpusReport {
  std::vector<CorpusCase> cases;
  std::vector<CorpusOutcome> outcomes;  // sorted by case name, then scheme
  std::vector<CorpusSummary> summaries;  // in the order requested
};

Expected<CorpusReport, std::string> RunCorpus(
    const std::vector<SchemeKind>& schemes, const RunConfig& base);

}  // namespace picasso

#endif  // PICASSO_CORE_RUNNER_H_
