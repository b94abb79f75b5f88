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

#ifndef PICASSO_CORE_PICASSO_MRS_H_
#define PICASSO_CORE_PICASSO_MRS_H_

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "core/capability.h"
#include "core/heap.h"
#include "core/scheme.h"
#include "core/tagged_machine.h"
#include "core/unr.h"

namespace picasso {

// An in-flight revocation. The PVT snapshot decides which colors the sweep
// revokes; colors retracted after it was taken wait for the next job.
struct RevocationJob {
  enum class State : uint8_t { kScanning, kDone };

  std::vector<uint64_t> pvt_snapshot;
  std::vector<uint32_t> target_colors;  // ascending
  State state = State::kScanning;
  uint64_t cursor = 0;  // next memory address for windowed steps

  bool targets(uint32_t color) const {
    return (pvt_snapshot[color >> 6] >> (color & 63)) & 1;
  }
};

struct MrsOptions {
  double threshold_fraction = 0.01;
  SweepMode sweep;
};

// Malloc revocation shim for colored capabilities. Every allocation gets the
// lowest unclaimed color; free retracts the color in the PVT and hands the
// memory straight back to the heap. Colors return to the pool only after a
// sweep has removed every capability that carries them.
class PicassoMrs : public Scheme {
 public:
  PicassoMrs(Machine& machine, MrsOptions options);

  SchemeKind kind() const override { return SchemeKind::kPicasso; }
  Expected<Capability, AllocError> Malloc(uint64_t size) override;
  Expected<Capability, AllocError> Calloc(uint64_t size);
  FaultStatus Free(const Capability& cap) override;
  void Tick() override;

  // Starts a job when fewer than ceil(threshold * pool) colors are
  // unclaimed and none is running. In sync mode the job also runs to
  // completion and is finalized before returning.
  bool MaybeRevoke();
  // Sweeps up to max_words tagged memory words (UINT64_MAX = all of memory
  // plus registers). Returns true once scanning is complete.
  bool RevocationStep(uint64_t max_words);
  // Clears the PVBs of the job's targets and batch-releases them into the
  // unr. Returns the number of colors reclaimed.
  size_t RevocationFinalize();

  size_t live_allocations() const override { return live_.size(); }
  uint64_t ResidentBytes() const override;
  uint64_t MetadataBytes() const override;
  std::string DebugDump() const override { return unr_.Dump(); }

  const UnrAllocator& unr() const { return unr_; }
  const std::optional<RevocationJob>& job() const { return job_; }
  // Colors freed since the last snapshot, ascending.
  std::vector<uint32_t> retracted_pending() const;
  size_t pending_count() const { return pending_.size(); }
  uint32_t pool() const { return unr_.total(); }
  uint64_t threshold_count() const { return threshold_; }
  const Capability& authority() const { return authority_; }

 private:
  void StartJob();
  void CompleteJob();

  Machine& machine_;
  MrsOptions options_;
  Capability authority_;
  FirstFitHeap heap_;
  UnrAllocator unr_;
  uint64_t threshold_;
  struct Allocation {
    uint64_t size;
    uint32_t color;
  };
  std::unordered_map<uint64_t, Allocation> live_;
  std::vector<uint32_t> pending_;
  std::optional<RevocationJob> job_;
};

}  // namespace picasso

#endif  // PICASSO_CORE_PICASSO_MRS_H_
