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

#include "core/generators.h"

#include <algorithm>
#include <charconv>
#include <map>

namespace picasso {

std::optional<TraceOp> BufferedSource::Next() {
  while (buf_.empty() && !ended_) ended_ = !Refill(buf_);
  if (buf_.empty()) return std::nullopt;
  TraceOp op = buf_.front();
  buf_.pop_front();
  return op;
}

// ---------------------------------------------------------------------------
// churn

namespace {
constexpr unsigned kChurnReg = 1;
constexpr unsigned kChurnStaleReg = 2;
}  // namespace

ChurnSource::ChurnSource(ChurnParams p)
    : p_(std::move(p)), rng_(p_.seed), phase_(Phase::kSetup) {
  if (p_.sizes.empty()) p_.sizes.push_back(32);
  if (p_.live == 0) phase_ = Phase::kDone;
}

std::unique_ptr<OpSource> ChurnSource::Clone() const {
  return std::make_unique<ChurnSource>(p_);
}

uint64_t ChurnSource::Size() {
  if (p_.sizes.size() == 1) return p_.sizes[0];
  return p_.sizes[rng_() % p_.sizes.size()];
}

bool ChurnSource::Refill(std::deque<TraceOp>& out) {
  const unsigned r = kChurnReg;
  switch (phase_) {
    case Phase::kSetup:
      out.push_back(TraceOp::Malloc(r, Size()));
      out.push_back(TraceOp::Write(r, 0, 8));
      out.push_back(TraceOp::Spill(r, step_));
      if (++step_ == p_.live) {
        step_ = 0;
        phase_ = p_.pairs > p_.live ? Phase::kSteady : Phase::kTeardown;
      }
      return true;
    case Phase::kSteady: {
      const uint64_t slot = rng_() % p_.live;
      out.push_back(TraceOp::Reload(r, slot));
      out.push_back(TraceOp::Free(r));
      if (p_.stale_slots > 0)
        out.push_back(TraceOp::Spill(r, p_.live + step_ % p_.stale_slots));
      if (Chance(rng_, p_.uaf_rate)) {
        if (p_.stale_slots > 0 && rng_() % 2) {
          // Dangle through an older parked copy instead.
          const uint64_t j =
              rng_() % std::min<uint64_t>(step_ + 1, p_.stale_slots);
          out.push_back(TraceOp::Reload(kChurnStaleReg, p_.live + j));
          out.push_back(TraceOp::Read(kChurnStaleReg, 0, 8));
        } else {
          out.push_back(TraceOp::Read(r, 0, 8));
        }
      }
      if (Chance(rng_, p_.df_rate)) out.push_back(TraceOp::Free(r));
      out.push_back(TraceOp::Malloc(r, Size()));
      out.push_back(TraceOp::Write(r, 0, 8));
      out.push_back(TraceOp::Spill(r, slot));
      if (++step_ == p_.pairs - p_.live) {
        step_ = 0;
        phase_ = Phase::kTeardown;
      }
      return true;
    }
    case Phase::kTeardown:
      out.push_back(TraceOp::Reload(r, step_));
      out.push_back(TraceOp::Free(r));
      if (++step_ == p_.live) phase_ = Phase::kDone;
      return true;
    case Phase::kDone:
      return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// random

namespace {
constexpr uint64_t kRandomSizes[] = {16, 32, 48, 64, 128, 256};
}  // namespace

RandomSource::RandomSource(RandomParams p) : p_(p), rng_(p.seed) {
  std::fill(std::begin(regs_), std::end(regs_), kEmpty);
  std::fill(std::begin(slots_), std::end(slots_), kEmpty);
}

std::unique_ptr<OpSource> RandomSource::Clone() const {
  return std::make_unique<RandomSource>(p_);
}

bool RandomSource::Refill(std::deque<TraceOp>& out) {
  if (emitted_ >= p_.ops) return false;
  ++emitted_;

  std::vector<unsigned> live, stale;
  for (unsigned r = 0; r < kRegs; ++r) {
    if (regs_[r] == kEmpty) continue;
    (allocs_[regs_[r]].live ? live : stale).push_back(r);
  }
  auto pick = [&](const std::vector<unsigned>& v) {
    return v[rng_() % v.size()];
  };

  const uint64_t roll = rng_() % 1000000;
  const auto uaf = static_cast<uint64_t>(p_.uaf_rate * 1e6);
  const auto df = static_cast<uint64_t>(p_.df_rate * 1e6);
  if (roll < uaf + df && !stale.empty()) {
    const unsigned r = pick(stale);
    if (roll < uaf)
      out.push_back(TraceOp::Read(
          r, 0, std::min<uint64_t>(8, allocs_[regs_[r]].size)));
    else
      out.push_back(TraceOp::Free(r));
    return true;
  }

  unsigned choice = rng_() % 8;
  if (choice >= 2 && choice <= 4 && live.empty()) choice = 0;
  switch (choice) {
    case 0:
    case 1: {
      const unsigned r = rng_() % kRegs;
      const uint64_t size = kRandomSizes[rng_() % std::size(kRandomSizes)];
      out.push_back(TraceOp::Malloc(r, size));
      regs_[r] = static_cast<int64_t>(allocs_.size());
      allocs_.push_back({size, true});
      break;
    }
    case 2: {
      const unsigned r = pick(live);
      allocs_[regs_[r]].live = false;
      out.push_back(TraceOp::Free(r));
      break;
    }
    case 3:
    case 4: {
      const unsigned r = pick(live);
      const uint64_t size = allocs_[regs_[r]].size;
      const uint64_t w = 1 + rng_() % std::min<uint64_t>(16, size);
      const uint64_t off = rng_() % (size - w + 1);
      out.push_back(choice == 3 ? TraceOp::Read(r, off, w)
                                : TraceOp::Write(r, off, w));
      break;
    }
    case 5: {
      const unsigned d = rng_() % kRegs;
      const unsigned s = rng_() % kRegs;
      out.push_back(TraceOp::Copy(d, s));
      regs_[d] = regs_[s];
      break;
    }
    case 6: {
      const unsigned r = rng_() % kRegs;
      const unsigned k = rng_() % kSlots;
      out.push_back(TraceOp::Spill(r, k));
      slots_[k] = regs_[r];
      break;
    }
    default: {
      const unsigned r = rng_() % kRegs;
      const unsigned k = rng_() % kSlots;
      out.push_back(TraceOp::Reload(r, k));
      regs_[r] = slots_[k];
      break;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// locality

Trace GenLocality(const LocalityParams& p) {
  constexpr uint64_t kSizes[] = {512, 1024, 2048, 4096};
  constexpr uint64_t kStride = 8;
  constexpr uint64_t kSpan = 256;
  const unsigned n = std::min(p.allocations, kTraceRegisters);
  Rng rng(p.seed);
  std::vector<uint64_t> sizes(n);
  Trace t;
  for (unsigned i = 0; i < n; ++i) {
    sizes[i] = kSizes[rng() % std::size(kSizes)];
    t.push_back(TraceOp::Malloc(i, sizes[i]));
  }
  for (unsigned pass = 0; pass < p.passes; ++pass) {
    for (unsigned i = 0; i < n; ++i) {
      const uint64_t span = std::min(kSpan, sizes[i]);
      for (uint64_t off = 0; off < span; off += kStride)
        t.push_back(TraceOp::Write(i, off, kStride));
    }
    for (unsigned i = 0; i < n; ++i) {
      const uint64_t span = std::min(kSpan, sizes[i]);
      for (uint64_t off = 0; off < span; off += kStride)
        t.push_back(TraceOp::Read(i, off, kStride));
    }
  }
  for (unsigned i = 0; i < n; ++i) t.push_back(TraceOp::Free(i));
  return t;
}

// ---------------------------------------------------------------------------
// corpus

std::string_view ToString(CorpusCase::Category c) {
  return c == CorpusCase::Category::kUaf ? "UAF" : "DF";
}

namespace {

using Category = CorpusCase::Category;

// Case body: ops before the offending one, the bad and good variants of the
// offending op, and what the colored scheme must report for the bad one.
struct Pattern {
  std::string_view name;
  Category category;
  Trace (*prefix)(uint64_t size);
  TraceOp bad;
  TraceOp good;
  FaultKind fault;
};

constexpr unsigned kBallast = 31;
constexpr unsigned kNeighbour = 5;
constexpr uint64_t kBallastBytes = 65536;

Trace AllocFree(uint64_t s) {
  return {TraceOp::Malloc(0, s), TraceOp::Write(0, 0, 8), TraceOp::Free(0)};
}

const Pattern kPatterns[] = {
    {"uaf-read", Category::kUaf, AllocFree, TraceOp::Read(0, 0, 8),
     TraceOp::Read(kNeighbour, 0, 8), FaultKind::kProvenanceRetracted},
    {"uaf-write", Category::kUaf, AllocFree, TraceOp::Write(0, 0, 8),
     TraceOp::Write(kNeighbour, 0, 8), FaultKind::kProvenanceRetracted},
    {"uaf-spilled", Category::kUaf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::Spill(0, 3), TraceOp::Free(0),
               TraceOp::Malloc(0, s), TraceOp::Reload(1, 3)};
     },
     TraceOp::Read(1, 0, 8), TraceOp::Read(0, 0, 8),
     FaultKind::kProvenanceRetracted},
    {"uaf-regcopy", Category::kUaf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::Copy(1, 0), TraceOp::Free(0)};
     },
     TraceOp::Read(1, 0, 8), TraceOp::Read(kNeighbour, 0, 8),
     FaultKind::kProvenanceRetracted},
    {"uar-same-address", Category::kUaf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::Copy(1, 0), TraceOp::Free(0),
               TraceOp::Malloc(2, s), TraceOp::Write(2, 0, 8)};
     },
     TraceOp::Read(1, 0, 8), TraceOp::Read(2, 0, 8),
     FaultKind::kProvenanceRetracted},
    {"uaf-interior", Category::kUaf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::IncAddr(1, 0, 16),
               TraceOp::Free(0)};
     },
     TraceOp::Read(1, 0, 8), TraceOp::Read(kNeighbour, 0, 8),
     FaultKind::kProvenanceRetracted},
    {"uaf-late", Category::kUaf,
     [](uint64_t s) -> Trace {
       Trace t = AllocFree(s);
       for (int i = 0; i < 5; ++i) {
         t.push_back(TraceOp::Malloc(6, 48));
         t.push_back(TraceOp::Write(6, 0, 8));
         t.push_back(TraceOp::Free(6));
       }
       return t;
     },
     TraceOp::Read(0, 0, 8), TraceOp::Read(kNeighbour, 0, 8),
     FaultKind::kProvenanceRetracted},
    {"df-direct", Category::kDf,
     [](uint64_t s) -> Trace { return {TraceOp::Malloc(0, s), TraceOp::Free(0)}; },
     TraceOp::Free(0), TraceOp::Free(kNeighbour), FaultKind::kDoubleFree},
    {"df-copy", Category::kDf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::Copy(1, 0), TraceOp::Free(0)};
     },
     TraceOp::Free(1), TraceOp::Free(kNeighbour), FaultKind::kDoubleFree},
    {"df-spilled", Category::kDf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::Spill(0, 2), TraceOp::Free(0),
               TraceOp::Reload(1, 2)};
     },
     TraceOp::Free(1), TraceOp::Free(kNeighbour), FaultKind::kDoubleFree},
    {"free-interior", Category::kDf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::IncAddr(1, 0, 16)};
     },
     TraceOp::Free(1), TraceOp::Free(0), FaultKind::kMalformedFree},
    {"free-uncolored", Category::kDf,
     [](uint64_t s) -> Trace { return {TraceOp::Global(1, s)}; },
     TraceOp::Free(1), TraceOp::Free(kNeighbour), FaultKind::kMalformedFree},
    {"df-after-realloc", Category::kDf,
     [](uint64_t s) -> Trace {
       return {TraceOp::Malloc(0, s), TraceOp::Copy(1, 0), TraceOp::Free(0),
               TraceOp::Malloc(2, s)};
     },
     TraceOp::Free(1), TraceOp::Free(2), FaultKind::kDoubleFree},
};

constexpr uint64_t kCorpusSizes[] = {32, 256};

}  // namespace

std::vector<CorpusCase> GenCorpus() {
  std::vector<CorpusCase> out;
  for (const Pattern& p : kPatterns) {
    for (uint64_t size : kCorpusSizes) {
      for (bool bad : {false, true}) {
        CorpusCase c;
        c.pattern = std::string(p.name);
        c.size = size;
        c.bad = bad;
        c.category = p.category;
        c.name = c.pattern + "/" + std::to_string(size) +
                 (bad ? "/bad" : "/good");
        // A large live block and a live neighbour keep quarantine pressure
        // far below any sweep limit, so only the pattern itself decides.
        c.trace = {TraceOp::Malloc(kBallast, kBallastBytes),
                   TraceOp::Malloc(kNeighbour, size),
                   TraceOp::Write(kNeighbour, 0, 8)};
        for (const TraceOp& op : p.prefix(size)) c.trace.push_back(op);
        c.offending_op = c.trace.size();
        TraceOp last = bad ? p.bad : p.good;
        last.expect = bad ? Outcome::Of(p.fault) : Outcome::Ok();
        c.trace.push_back(last);
        for (size_t i = 0; i < c.trace.size(); ++i)
          c.trace[i].line = static_cast<uint32_t>(i + 1);
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// generator specs

namespace {

std::optional<uint64_t> ToU64(std::string_view s) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    return std::nullopt;
  return v;
}

std::optional<double> ToRate(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || v < 0 ||
      v > 1)
    return std::nullopt;
  return v;
}

}  // namespace

Expected<std::unique_ptr<OpSource>, std::string> MakeGenerator(
    std::string_view spec, uint64_t default_seed) {
  auto fail = [&](const std::string& why) {
    return Unexpected{"generator '" + std::string(spec) + "': " + why};
  };
  const size_t colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  std::map<std::string, std::string, std::less<>> kv;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      const size_t comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
      const size_t eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0)
        return fail("expected key=value, got '" + std::string(item) + "'");
      kv[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    }
  }

  std::string err;
  auto u64 = [&](std::string_view key, uint64_t& dst) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    if (auto v = ToU64(it->second)) dst = *v;
    else if (err.empty()) err = std::string(key) + " must be an integer";
    kv.erase(it);
  };
  auto rate = [&](std::string_view key, double& dst) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    if (auto v = ToRate(it->second)) dst = *v;
    else if (err.empty()) err = std::string(key) + " must be in [0, 1]";
    kv.erase(it);
  };
  auto leftovers = [&]() -> std::string {
    if (!err.empty()) return err;
    if (!kv.empty()) return "unknown key '" + kv.begin()->first + "'";
    return {};
  };

  if (name == "churn") {
    ChurnParams p;
    p.seed = default_seed;
    u64("n", p.pairs);
    u64("live", p.live);
    u64("seed", p.seed);
    u64("stale", p.stale_slots);
    rate("uaf", p.uaf_rate);
    rate("df", p.df_rate);
    if (auto it = kv.find("sizes"); it != kv.end()) {
      p.sizes.clear();
      std::string_view s = it->second;
      while (!s.empty()) {
        const size_t slash = s.find('/');
        auto v = ToU64(s.substr(0, slash));
        if (!v || *v == 0) return fail("sizes must be positive integers");
        p.sizes.push_back(*v);
        s = slash == std::string_view::npos ? std::string_view{}
                                            : s.substr(slash + 1);
      }
      kv.erase(it);
    }
    if (auto e = leftovers(); !e.empty()) return fail(e);
    if (p.live == 0 || p.pairs < p.live) return fail("need n >= live >= 1");
    std::unique_ptr<OpSource> src = std::make_unique<ChurnSource>(p);
    return src;
  }
  if (name == "random") {
    RandomParams p;
    p.seed = default_seed;
    u64("n", p.ops);
    u64("seed", p.seed);
    rate("uaf", p.uaf_rate);
    rate("df", p.df_rate);
    if (auto e = leftovers(); !e.empty()) return fail(e);
    if (p.uaf_rate + p.df_rate > 1) return fail("uaf + df must be <= 1");
    std::unique_ptr<OpSource> src = std::make_unique<RandomSource>(p);
    return src;
  }
  if (name == "locality") {
    LocalityParams p;
    p.seed = default_seed;
    uint64_t allocs = p.allocations, passes = p.passes;
    u64("allocs", allocs);
    u64("passes", passes);
    u64("seed", p.seed);
    if (auto e = leftovers(); !e.empty()) return fail(e);
    if (allocs == 0 || allocs > kTraceRegisters)
      return fail("allocs must be in [1, 32]");
    p.allocations = static_cast<unsigned>(allocs);
    p.passes = static_cast<unsigned>(passes);
    std::unique_ptr<OpSource> src =
        std::make_unique<TraceSource>(GenLocality(p));
    return src;
  }
  return fail("unknown generator (churn, random, locality)");
}

}  // namespace picasso
