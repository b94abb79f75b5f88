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

#ifndef PICASSO_CORE_GENERATORS_H_
#define PICASSO_CORE_GENERATORS_H_

#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "core/expected.h"
#include "core/trace.h"

namespace picasso {

// All generators draw from std::mt19937_64 (the 64-bit Mersenne Twister,
// MT19937-64) and reduce raw outputs with modulo, so a seed names the same
// trace everywhere.
using Rng = std::mt19937_64;

// Probability given in parts per million.
inline bool Chance(Rng& rng, double p) {
  return rng() % 1000000 < static_cast<uint64_t>(p * 1e6);
}

// Source that produces ops in small batches.
class BufferedSource : public OpSource {
 public:
  std::optional<TraceOp> Next() override;

 protected:
  // Appends the next batch; returns false when the stream has ended.
  virtual bool Refill(std::deque<TraceOp>& out) = 0;

 private:
  std::deque<TraceOp> buf_;
  bool ended_ = false;
};

struct ChurnParams {
  uint64_t pairs = 1000;
  uint64_t live = 10;
  std::vector<uint64_t> sizes{32};
  uint64_t seed = 1;
  // Stale copies of freed capabilities parked in memory, round-robin over
  // this many spill slots.
  uint64_t stale_slots = 0;
  double uaf_rate = 0.0;
  double df_rate = 0.0;
};

// Steady-state churn. The live set sits in spill slots [0, live); each
// step reloads a random member, frees it, replaces it with a fresh
// allocation and spills that back. Exactly `pairs` allocations and frees.
class ChurnSource : public BufferedSource {
 public:
  explicit ChurnSource(ChurnParams p);
  std::unique_ptr<OpSource> Clone() const override;

 protected:
  bool Refill(std::deque<TraceOp>& out) override;

 private:
  uint64_t Size();

  ChurnParams p_;
  Rng rng_;
  uint64_t step_ = 0;
  enum class Phase : uint8_t { kSetup, kSteady, kTeardown, kDone } phase_;
};

struct RandomParams {
  uint64_t ops = 1000;
  uint64_t seed = 1;
  double uaf_rate = 0.05;
  double df_rate = 0.02;
};

// Random mix over registers r0..r7 and spill slots 0..7. Ordinary ops only
// touch live allocations in bounds; injected violations use a register
// whose allocation has been freed.
class RandomSource : public BufferedSource {
 public:
  static constexpr unsigned kRegs = 8;
  static constexpr unsigned kSlots = 8;

  explicit RandomSource(RandomParams p);
  std::unique_ptr<OpSource> Clone() const override;

 protected:
  bool Refill(std::deque<TraceOp>& out) override;

 private:
  struct Alloc {
    uint64_t size;
    bool live;
  };
  static constexpr int64_t kEmpty = -1;

  RandomParams p_;
  Rng rng_;
  uint64_t emitted_ = 0;
  std::vector<Alloc> allocs_;
  int64_t regs_[kRegs];
  int64_t slots_[kSlots];
};

struct LocalityParams {
  unsigned allocations = 29;
  unsigned passes = 8;
  uint64_t seed = 1;
};

// Compress/decompress-shaped loop: a fixed working set of buffers written
// sequentially and read back, pass after pass.
Trace GenLocality(const LocalityParams& p);

struct CorpusCase {
  enum class Category : uint8_t { kUaf, kDf };

  std::string name;     // "<pattern>/<size>/<good|bad>"
  std::string pattern;
  uint64_t size = 0;
  bool bad = false;
  Category category = Category::kUaf;
  Trace trace;
  size_t offending_op = 0;  // index into trace
};

std::string_view ToString(CorpusCase::Category c);

// Hand-built good/bad pairs for use-after-free, use-after-reallocation and
// double/invalid free, at two allocation sizes.
std::vector<CorpusCase> GenCorpus();

// Parses "churn:k=v,...", "random:k=v,..." or "locality:k=v,...". A seed
// given in the spec wins over default_seed.
Expected<std::unique_ptr<OpSource>, std::string> MakeGenerator(
    std::string_view spec, uint64_t default_seed);

}  // namespace picasso

#endif  // PICASSO_CORE_GENERATORS_H_
