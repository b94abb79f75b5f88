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

#include "core/report.h"

#include <algorithm>
#include <cstdio>
#include <map>

namespace picasso {
namespace {

using nlohmann::ordered_json;

std::string Hex(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string SweepName(const SweepMode& s) {
  return s.windowed ? "windowed:" + std::to_string(s.window_words) : "sync";
}

std::string Scalar(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvHeader(const ordered_json& row) {
  std::string out;
  for (auto it = row.begin(); it != row.end(); ++it) {
    if (it != row.begin()) out += ',';
    out += CsvField(it.key());
  }
  return out + "\n";
}

std::string CsvRow(const ordered_json& row) {
  std::string out;
  for (auto it = row.begin(); it != row.end(); ++it) {
    if (it != row.begin()) out += ',';
    out += CsvField(Scalar(it.value()));
  }
  return out + "\n";
}

std::string Human(const ordered_json& row) {
  size_t width = 0;
  for (auto it = row.begin(); it != row.end(); ++it)
    width = std::max(width, it.key().size());
  std::string out;
  for (auto it = row.begin(); it != row.end(); ++it) {
    out += it.key();
    out.append(width + 2 - it.key().size(), ' ');
    out += Scalar(it.value());
    out += '\n';
  }
  return out;
}

}  // namespace

ordered_json RunToJson(const RunResult& result, const RunConfig& config) {
  const Metrics& m = result.metrics;
  ordered_json j;
  j["scheme"] = std::string(ToString(config.scheme));
  j["color_bits"] = config.color_bits;
  j["threshold"] = config.threshold_fraction;
  j["quarantine_fraction"] = config.quarantine_fraction;
  j["heap_size"] = config.heap_size;
  j["pvt_buffer"] = config.pvt_buffer;
  j["sweep"] = SweepName(config.sweep);
  j["seed"] = config.seed;
  j["ops"] = m.ops;
  j["allocations"] = m.allocations;
  j["frees"] = m.frees;
  j["live_at_end"] = m.live_at_end;
  j["revocations"] = m.revocations;
  j["swept_tags"] = m.swept_tags;
  j["cleared_tags"] = m.cleared_tags;
  for (size_t k = 0; k < kFaultKindCount; ++k)
    j["faults_" + std::string(ToString(FaultKind(k)))] = m.faults[k];
  j["faults_total"] = m.fault_total();
  j["oom"] = m.oom;
  j["exhausted"] = m.exhausted;
  j["violations"] = m.violations;
  j["detected"] = m.detected;
  j["uaf_escapes"] = m.uaf_escapes;
  j["df_escapes"] = m.df_escapes;
  j["false_positives"] = m.false_positives;
  j["expectation_mismatches"] = m.expectation_mismatches;
  j["peak_live_bytes"] = m.peak_live_bytes;
  j["peak_quarantine_bytes"] = m.peak_quarantine_bytes;
  j["peak_metadata_bytes"] = m.peak_metadata_bytes;
  j["peak_resident_bytes"] = m.peak_resident_bytes;
  j["pvt_lookups"] = m.pvt_lookups;
  j["pvt_buffer_hits"] = m.pvt_buffer_hits;
  j["pvt_buffer_misses"] = m.pvt_buffer_misses;
  j["pvt_buffer_invalidations"] = m.pvt_buffer_invalidations;
  const uint64_t probes = m.pvt_buffer_hits + m.pvt_buffer_misses;
  j["pvt_buffer_hit_rate"] =
      probes ? double(m.pvt_buffer_hits) / double(probes) : 0.0;
  j["read_digest"] = Hex(m.read_digest);
  j["outcome_digest"] = Hex(m.outcome_digest);
  j["state_digest"] = Hex(m.state_digest);
  return j;
}

std::string RenderRun(const RunResult& result, const RunConfig& config,
                      OutputFormat format) {
  const ordered_json j = RunToJson(result, config);
  switch (format) {
    case OutputFormat::kJson:
      return j.dump(2) + "\n";
    case OutputFormat::kCsv:
      return CsvHeader(j) + CsvRow(j);
    case OutputFormat::kHuman:
      return Human(j);
  }
  return {};
}

std::string RenderCompare(std::vector<SchemeRun> runs, OutputFormat format) {
  std::stable_sort(runs.begin(), runs.end(),
                   [](const SchemeRun& a, const SchemeRun& b) {
                     return ToString(a.config.scheme) <
                            ToString(b.config.scheme);
                   });
  std::vector<ordered_json> rows;
  for (const auto& r : runs) rows.push_back(RunToJson(r.result, r.config));
  if (rows.empty()) return format == OutputFormat::kJson ? "[]\n" : "";

  switch (format) {
    case OutputFormat::kJson:
      return ordered_json(rows).dump(2) + "\n";
    case OutputFormat::kCsv: {
      std::string out = CsvHeader(rows[0]);
      for (const auto& r : rows) out += CsvRow(r);
      return out;
    }
    case OutputFormat::kHuman: {
      std::string out;
      for (const auto& r : rows) {
        if (!out.empty()) out += '\n';
        out += Human(r);
      }
      return out;
    }
  }
  return {};
}

std::string RenderCorpus(const CorpusReport& report, OutputFormat format) {
  std::vector<std::string> schemes;
  for (const auto& s : report.summaries)
    schemes.emplace_back(ToString(s.scheme));
  std::vector<std::string> sorted = schemes;
  std::sort(sorted.begin(), sorted.end());

  // case name -> scheme -> outcome
  std::map<std::string, std::map<std::string, std::string>> cells;
  for (const auto& o : report.outcomes)
    cells[report.cases[o.case_index].name][std::string(ToString(o.scheme))] =
        std::string(ToString(o.kind));
  std::map<std::string, const CorpusCase*> by_name;
  for (const auto& c : report.cases) by_name[c.name] = &c;

  auto summary_json = [&](const CorpusSummary& s) {
    ordered_json j;
    j["scheme"] = std::string(ToString(s.scheme));
    j["bad_uaf"] = s.bad_uaf;
    j["detected_uaf"] = s.detected_uaf;
    j["bad_df"] = s.bad_df;
    j["detected_df"] = s.detected_df;
    j["good"] = s.good;
    j["false_positives"] = s.false_positives;
    return j;
  };

  switch (format) {
    case OutputFormat::kJson: {
      ordered_json j;
      j["cases"] = ordered_json::array();
      for (const auto& [name, row] : cells) {
        const CorpusCase& c = *by_name[name];
        ordered_json e;
        e["case"] = name;
        e["category"] = std::string(ToString(c.category));
        e["variant"] = c.bad ? "bad" : "good";
        for (const auto& s : sorted) e[s] = row.at(s);
        j["cases"].push_back(e);
      }
      j["summary"] = ordered_json::array();
      for (const auto& s : report.summaries)
        j["summary"].push_back(summary_json(s));
      return j.dump(2) + "\n";
    }
    case OutputFormat::kCsv: {
      std::string out = "case,category,variant";
      for (const auto& s : sorted) out += "," + s;
      out += "\n";
      for (const auto& [name, row] : cells) {
        const CorpusCase& c = *by_name[name];
        out += name + "," + std::string(ToString(c.category)) + "," +
               (c.bad ? "bad" : "good");
        for (const auto& s : sorted) out += "," + row.at(s);
        out += "\n";
      }
      return out;
    }
    case OutputFormat::kHuman: {
      size_t w = 4;
      for (const auto& [name, row] : cells) w = std::max(w, name.size());
      std::string out = "case";
      out.append(w + 2 - 4, ' ');
      for (const auto& s : sorted) {
        out += s;
        out.append(s.size() < 16 ? 16 - s.size() : 1, ' ');
      }
      out += "\n";
      for (const auto& [name, row] : cells) {
        out += name;
        out.append(w + 2 - name.size(), ' ');
        for (const auto& s : sorted) {
          const std::string& v = row.at(s);
          out += v;
          out.append(v.size() < 16 ? 16 - v.size() : 1, ' ');
        }
        out += "\n";
      }
      out += "\n";
      for (const auto& s : report.summaries) {
        out += std::string(ToString(s.scheme)) + ": UAF " +
               std::to_string(s.detected_uaf) + "/" +
               std::to_string(s.bad_uaf) + ", DF " +
               std::to_string(s.detected_df) + "/" +
               std::to_string(s.bad_df) + ", false positives " +
               std::to_string(s.false_positives) + "/" +
               std::to_string(s.good) + "\n";
      }
      return out;
    }
  }
  return {};
}

std::string RenderMismatches(const RunResult& result) {
  std::string out;
  for (const auto& m : result.mismatches) {
    out += "line " + std::to_string(m.line) + " (op " +
           std::to_string(m.op_index) + "): expected " + ToString(m.expected) +
           ", got " + ToString(m.actual) + "\n";
  }
  const uint64_t total = result.metrics.expectation_mismatches;
  if (total > result.mismatches.size())
    out += "... " + std::to_string(total - result.mismatches.size()) +
           " more\n";
  return out;
}

}  // namespace picasso
