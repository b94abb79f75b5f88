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

#include "core/runner.h"

#include <algorithm>
#include <unordered_map>

#include "core/picasso_mrs.h"

namespace picasso {

std::string_view ToString(Verdict v) {
  switch (v) {
    case Verdict::kNotApplicable:
      return "n/a";
    case Verdict::kLegal:
      return "legal";
    case Verdict::kUseAfterFree:
      return "use-after-free";
    case Verdict::kDoubleFree:
      return "double-free";
    case Verdict::kInvalidFree:
      return "invalid-free";
  }
  return "?";
}

std::string_view ToString(CorpusOutcome::Kind k) {
  switch (k) {
    case CorpusOutcome::Kind::kDetected:
      return "detected";
    case CorpusOutcome::Kind::kEscaped:
      return "escaped";
    case CorpusOutcome::Kind::kFalsePositive:
      return "false-positive";
    case CorpusOutcome::Kind::kClean:
      return "clean";
  }
  return "?";
}

uint64_t Metrics::fault_total() const {
  uint64_t n = 0;
  for (uint64_t f : faults) n += f;
  return n;
}

namespace {

// Where a register or spill slot points, as far as the oracle knows.
struct Provenance {
  enum class Kind : uint8_t { kNone, kHeap, kGlobal };
  Kind kind = Kind::kNone;
  uint64_t alloc = 0;
  int64_t offset = 0;
  uint64_t size = 0;  // for globals
};

class Interpreter {
 public:
  Interpreter(const RunConfig& config)
      : config_(config),
        machine_(config.ToMachineConfig()),
        scheme_(MakeScheme(config, machine_)) {
    const MachineConfig& mc = machine_.config();
    const PermissionSet perms = PermissionSet::UserHeap();
    spill_auth_ = Capability::Root(mc.spill_base, mc.spill_size, perms);
    global_auth_ = Capability::Root(mc.globals_base, mc.globals_size, perms);
    global_next_ = mc.globals_base;
  }

  RunResult Run(OpSource& ops) {
    RunResult r;
    Metrics& m = r.metrics;
    uint64_t index = 0;
    m.outcome_digest = Fnv1aU64(0, 0xcbf29ce484222325ull);
    m.read_digest = 0xcbf29ce484222325ull;
    while (auto op = ops.Next()) {
      Verdict verdict = Verdict::kNotApplicable;
      const Outcome out = Step(*op, index, &verdict, &m.read_digest);
      Tally(m, out, verdict);
      if (out.kind == Outcome::Kind::kFault && r.first_fault_op < 0)
        r.first_fault_op = static_cast<int64_t>(index);
      m.outcome_digest = Fnv1aU64(
          uint64_t(out.kind) << 8 |
              (out.kind == Outcome::Kind::kFault ? uint64_t(out.fault) : 0),
          m.outcome_digest);
      if (op->expect && !(*op->expect == out)) {
        ++m.expectation_mismatches;
        if (r.mismatches.size() < kMaxReportedMismatches)
          r.mismatches.push_back({index, op->line, *op->expect, out});
      }
      if (config_.record_outcomes) {
        r.outcomes.push_back(out);
        r.verdicts.push_back(verdict);
      }
      scheme_->Tick();
      ++index;
    }
    m.ops = index;

    const SchemeCounters& c = scheme_->counters();
    m.allocations = c.allocations;
    m.frees = c.frees;
    m.live_at_end = scheme_->live_allocations();
    m.revocations = c.revocations;
    m.swept_tags = c.swept_tags;
    m.cleared_tags = c.cleared_tags;
    m.peak_live_bytes = c.peak_live_bytes;
    m.peak_quarantine_bytes = c.peak_quarantine_bytes;
    m.peak_metadata_bytes = c.peak_metadata_bytes;
    m.peak_resident_bytes = c.peak_resident_bytes;
    m.pvt_lookups = machine_.pvt_lookups();
    m.pvt_buffer_hits = machine_.pvt_buffer().hits();
    m.pvt_buffer_misses = machine_.pvt_buffer().misses();
    m.pvt_buffer_invalidations = machine_.pvt_buffer().invalidations();
    m.state_digest = machine_.StateDigest();
    if (config_.capture_dumps) {
      r.memory_dump = machine_.memory().Dump();
      r.pvt_dump = machine_.pvt().Dump();
      r.unr_dump = scheme_->DebugDump();
    }
    return r;
  }

 private:
  void Tally(Metrics& m, const Outcome& out, Verdict v) {
    const bool faulted = out.kind == Outcome::Kind::kFault;
    if (faulted) ++m.faults[static_cast<size_t>(out.fault)];
    if (out.kind == Outcome::Kind::kOom) ++m.oom;
    if (out.kind == Outcome::Kind::kExhausted) ++m.exhausted;
    switch (v) {
      case Verdict::kNotApplicable:
        break;
      case Verdict::kLegal:
        if (faulted) ++m.false_positives;
        break;
      case Verdict::kUseAfterFree:
      case Verdict::kDoubleFree:
      case Verdict::kInvalidFree:
        ++m.violations;
        if (faulted) {
          ++m.detected;
        } else if (v == Verdict::kUseAfterFree) {
          ++m.uaf_escapes;
        } else {
          ++m.df_escapes;
        }
        break;
    }
  }

  // Oracle view of an access of [off, off + width) through register r.
  Verdict AccessVerdict(const Provenance& p, uint64_t off,
                        uint64_t width) const {
    auto in_bounds = [&](uint64_t size) {
      const int64_t lo = p.offset + static_cast<int64_t>(off);
      return p.offset >= 0 && off <= size && lo >= 0 &&
             uint64_t(lo) + width <= size;
    };
    switch (p.kind) {
      case Provenance::Kind::kNone:
        return Verdict::kNotApplicable;
      case Provenance::Kind::kGlobal:
        return in_bounds(p.size) ? Verdict::kLegal : Verdict::kNotApplicable;
      case Provenance::Kind::kHeap:
        if (!in_bounds(alloc_size_[p.alloc])) return Verdict::kNotApplicable;
        return alloc_live_[p.alloc] ? Verdict::kLegal : Verdict::kUseAfterFree;
    }
    return Verdict::kNotApplicable;
  }

  Verdict FreeVerdict(const Provenance& p) const {
    if (p.kind != Provenance::Kind::kHeap) return Verdict::kInvalidFree;
    if (!alloc_live_[p.alloc]) return Verdict::kDoubleFree;
    if (p.offset != 0) return Verdict::kInvalidFree;
    return Verdict::kLegal;
  }

  static Outcome FromFault(const Fault& f) { return Outcome::Of(f.kind); }

  Outcome Step(const TraceOp& op, uint64_t index, Verdict* verdict,
               uint64_t* read_digest) {
    Capability& ra = machine_.reg(op.a);
    Provenance& pa = regs_[op.a];
    switch (op.kind) {
      case OpKind::kMalloc: {
        auto cap = scheme_->Malloc(op.x);
        if (!cap) {
          ra = Capability::Null();
          pa = {};
          return {cap.error() == AllocError::kExhausted
                      ? Outcome::Kind::kExhausted
                      : Outcome::Kind::kOom};
        }
        ra = *cap;
        pa = {Provenance::Kind::kHeap, alloc_size_.size(), 0, 0};
        alloc_size_.push_back(op.x);
        alloc_live_.push_back(true);
        return Outcome::Ok();
      }
      case OpKind::kGlobal: {
        const MachineConfig& mc = machine_.config();
        const uint64_t size = RoundToGranule(op.x);
        if (size > mc.globals_base + mc.globals_size - global_next_) {
          ra = Capability::Null();
          pa = {};
          return {Outcome::Kind::kOom};
        }
        auto cap = Derive(global_auth_, global_next_, size,
                          PermissionSet::UserHeap(), mc.otypeth);
        global_next_ += size;
        ra = *cap;
        pa = {Provenance::Kind::kGlobal, 0, 0, op.x};
        return Outcome::Ok();
      }
      case OpKind::kFree: {
        *verdict = FreeVerdict(pa);
        auto st = scheme_->Free(ra);
        if (!st) return FromFault(st.error());
        if (*verdict == Verdict::kLegal) alloc_live_[pa.alloc] = false;
        return Outcome::Ok();
      }
      case OpKind::kRead: {
        *verdict = AccessVerdict(pa, op.x, op.y);
        auto data = machine_.LoadData(ra, op.x, op.y);
        if (!data) return FromFault(data.error());
        *read_digest = Fnv1a(*data, *read_digest);
        return Outcome::Ok();
      }
      case OpKind::kWrite: {
        *verdict = AccessVerdict(pa, op.x, op.y);
        std::vector<uint8_t> bytes(op.y);
        for (uint64_t i = 0; i < op.y; ++i)
          bytes[i] = static_cast<uint8_t>(index * 131 + i * 7 + 1);
        auto st = machine_.StoreData(ra, op.x, bytes);
        if (!st) return FromFault(st.error());
        return Outcome::Ok();
      }
      case OpKind::kCopy:
        ra = machine_.reg(op.b);
        pa = regs_[op.b];
        return Outcome::Ok();
      case OpKind::kIncAddr: {
        const Capability src = machine_.reg(op.b);
        Provenance p = regs_[op.b];
        ra = WithAddress(src, src.address + op.x);
        p.offset += static_cast<int64_t>(op.x);
        pa = p;
        return Outcome::Ok();
      }
      case OpKind::kSpill: {
        if (op.x >= machine_.config().spill_size / kCapabilityWidth)
          return Outcome::Of(FaultKind::kSpatialOutOfBounds);
        auto st = machine_.StoreCap(spill_auth_, op.x * kCapabilityWidth, ra);
        if (!st) return FromFault(st.error());
        slots_[op.x] = pa;
        return Outcome::Ok();
      }
      case OpKind::kReload: {
        if (op.x >= machine_.config().spill_size / kCapabilityWidth)
          return Outcome::Of(FaultKind::kSpatialOutOfBounds);
        auto cap = machine_.LoadCap(spill_auth_, op.x * kCapabilityWidth);
        if (!cap) return FromFault(cap.error());
        ra = *cap;
        auto it = slots_.find(op.x);
        pa = it == slots_.end() ? Provenance{} : it->second;
        return Outcome::Ok();
      }
    }
    return Outcome::Ok();
  }

  RunConfig config_;
  Machine machine_;
  std::unique_ptr<Scheme> scheme_;
  Capability spill_auth_;
  Capability global_auth_;
  uint64_t global_next_ = 0;
  std::array<Provenance, kTraceRegisters> regs_{};
  std::unordered_map<uint64_t, Provenance> slots_;
  std::vector<uint64_t> alloc_size_;
  std::vector<bool> alloc_live_;
};

}  // namespace

Expected<RunResult, std::string> RunTrace(OpSource& ops,
                                          const RunConfig& config) {
  if (auto v = config.Validate(); !v) return Unexpected{v.error()};
  Interpreter interp(config);
  return interp.Run(ops);
}

Expected<RunResult, std::string> RunTrace(const Trace& trace,
                                          const RunConfig& config) {
  TraceSource src(trace);
  return RunTrace(src, config);
}

Expected<CorpusReport, std::string> RunCorpus(
    const std::vector<SchemeKind>& schemes, const RunConfig& base) {
  CorpusReport report;
  report.cases = GenCorpus();
  for (SchemeKind s : schemes) {
    RunConfig cfg = base;
    cfg.scheme = s;
    cfg.record_outcomes = true;
    cfg.capture_dumps = false;
    CorpusSummary sum{s};
    for (size_t i = 0; i < report.cases.size(); ++i) {
      const CorpusCase& c = report.cases[i];
      auto res = RunTrace(c.trace, cfg);
      if (!res) return Unexpected{res.error()};
      CorpusOutcome o{i, s, CorpusOutcome::Kind::kClean,
                      res->outcomes[c.offending_op]};
      if (c.bad) {
        const bool hit =
            res->first_fault_op == static_cast<int64_t>(c.offending_op);
        o.kind = hit ? CorpusOutcome::Kind::kDetected
                     : CorpusOutcome::Kind::kEscaped;
        const bool uaf = c.category == CorpusCase::Category::kUaf;
        ++(uaf ? sum.bad_uaf : sum.bad_df);
        if (hit) ++(uaf ? sum.detected_uaf : sum.detected_df);
      } else {
        ++sum.good;
        if (res->first_fault_op >= 0) {
          o.kind = CorpusOutcome::Kind::kFalsePositive;
          ++sum.false_positives;
        }
      }
      report.outcomes.push_back(o);
    }
    report.summaries.push_back(sum);
  }
  std::stable_sort(report.outcomes.begin(), report.outcomes.end(),
                   [&](const CorpusOutcome& a, const CorpusOutcome& b) {
                     const std::string& na = report.cases[a.case_index].name;
                     const std::string& nb = report.cases[b.case_index].name;
                     if (na != nb) return na < nb;
                     return ToString(a.scheme) < ToString(b.scheme);
                   });
  return report;
}

}  // namespace picasso
