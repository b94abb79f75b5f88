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

#include "core/picasso_mrs.h"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace picasso {

PicassoMrs::PicassoMrs(Machine& machine, MrsOptions options)
    : machine_(machine),
      options_(options),
      authority_(Capability::Root(machine.config().heap_base,
                                  machine.config().heap_size,
                                  PermissionSet::All())),
      heap_(machine.config().heap_base, machine.config().heap_size),
      unr_(machine.config().color_space() - 1) {
  threshold_ = static_cast<uint64_t>(
      std::ceil(options_.threshold_fraction * unr_.total() - 1e-9));
  NoteResident();
}

Expected<Capability, AllocError> PicassoMrs::Malloc(uint64_t size) {
  // Poll the outstanding job before claiming anything.
  if (job_ && job_->state == RevocationJob::State::kDone) RevocationFinalize();
  MaybeRevoke();

  const uint64_t rounded = RoundToGranule(std::max<uint64_t>(size, 1));
  const auto addr = heap_.Allocate(rounded);
  if (!addr) return Unexpected{AllocError::kOutOfMemory};

  auto color = unr_.AllocFirstFree();
  if (!color) {
    // Nothing can be handed out until a sweep reclaims colors.
    if (!job_ && !pending_.empty()) StartJob();
    if (job_) {
      CompleteJob();
      color = unr_.AllocFirstFree();
    }
    if (!color) {
      heap_.Release(*addr, rounded);
      return Unexpected{AllocError::kExhausted};
    }
  }

  const uint32_t otypeth = machine_.config().otypeth;
  auto bounded =
      Derive(authority_, *addr, rounded, PermissionSet::UserHeap(), otypeth);
  assert(bounded.has_value());
  auto colored = SetColor(*bounded, authority_, *color, otypeth);
  assert(colored.has_value());
  if (machine_.PvbRetracted(*color)) {
    [[maybe_unused]] auto st = machine_.PvtSet(*color, PvbState::kValid);
    assert(st.has_value());
  }

  live_.emplace(*addr, Allocation{rounded, *color});
  ++counters_.allocations;
  counters_.live_bytes += rounded;
  NoteResident();
  return *colored;
}

Expected<Capability, AllocError> PicassoMrs::Calloc(uint64_t size) {
  auto cap = Malloc(size);
  if (!cap) return cap;
  const std::vector<uint8_t> zeros(cap->length, 0);
  [[maybe_unused]] auto st = machine_.StoreData(*cap, 0, zeros);
  assert(st.has_value());
  return cap;
}

FaultStatus PicassoMrs::Free(const Capability& cap) {
  if (!cap.tag) return Unexpected{Fault{FaultKind::kMalformedFree}};
  const OtypeInterpretation interp = machine_.Interpretation(cap);
  if (!interp.colored()) return Unexpected{Fault{FaultKind::kMalformedFree}};
  const uint32_t color = interp.color;
  if (machine_.PvbRetracted(color))
    return Unexpected{Fault{FaultKind::kDoubleFree, color}};

  auto it = live_.find(cap.address);
  if (it == live_.end() || it->second.color != color || cap.base != cap.address)
    return Unexpected{Fault{FaultKind::kMalformedFree}};

  [[maybe_unused]] auto st = machine_.PvtSet(color, PvbState::kRetracted);
  assert(st.has_value());
  pending_.push_back(color);
  heap_.Release(it->first, it->second.size);
  counters_.live_bytes -= it->second.size;
  live_.erase(it);
  ++counters_.frees;
  NoteResident();
  return {};
}

void PicassoMrs::Tick() {
  if (options_.sweep.windowed && job_ &&
      job_->state == RevocationJob::State::kScanning)
    RevocationStep(options_.sweep.window_words);
}

bool PicassoMrs::MaybeRevoke() {
  if (job_ || unr_.available() >= threshold_) return false;
  StartJob();
  if (!options_.sweep.windowed) CompleteJob();
  return true;
}

void PicassoMrs::StartJob() {
  RevocationJob job;
  job.pvt_snapshot = machine_.pvt().raw();
  job.target_colors = std::move(pending_);
  pending_.clear();
  std::sort(job.target_colors.begin(), job.target_colors.end());
  job_ = std::move(job);
  ++counters_.revocations;
  NoteResident();

  if (options_.sweep.windowed) {
    // Registers are swept up front; from then on a load barrier keeps stale
    // copies from moving out of not-yet-swept memory.
    auto pred = [this](const Capability& c) {
      const auto i = machine_.Interpretation(c);
      return i.colored() && job_->targets(i.color);
    };
    const SweepStats s = machine_.SweepRegisters(pred);
    counters_.swept_tags += s.visited;
    counters_.cleared_tags += s.cleared;
    machine_.set_load_barrier(pred);
  }
}

void PicassoMrs::CompleteJob() {
  RevocationStep(UINT64_MAX);
  RevocationFinalize();
}

bool PicassoMrs::RevocationStep(uint64_t max_words) {
  if (!job_) return true;
  if (job_->state == RevocationJob::State::kDone) return true;

  auto pred = [this](const Capability& c) {
    const auto i = machine_.Interpretation(c);
    return i.colored() && job_->targets(i.color);
  };
  SweepStats s;
  bool done = false;
  if (max_words == UINT64_MAX) {
    s = machine_.SweepCapabilities(pred);
    done = true;
  } else {
    s = machine_.SweepMemoryWindow(pred, &job_->cursor, max_words, &done);
    if (done) s += machine_.SweepRegisters(pred);
  }
  counters_.swept_tags += s.visited;
  counters_.cleared_tags += s.cleared;
  if (done) job_->state = RevocationJob::State::kDone;
  return done;
}

size_t PicassoMrs::RevocationFinalize() {
  if (!job_) return 0;
  if (job_->state != RevocationJob::State::kDone) RevocationStep(UINT64_MAX);

  const std::vector<uint32_t>& targets = job_->target_colors;
  auto cleared = machine_.PvtSetBatch(targets, PvbState::kValid);
  assert(cleared.has_value());
  auto released = unr_.BatchRelease(targets);
  assert(released.has_value());
  (void)cleared;
  (void)released;

  const size_t n = targets.size();
  machine_.set_load_barrier(nullptr);
  job_.reset();
  NoteResident();
  return n;
}

std::vector<uint32_t> PicassoMrs::retracted_pending() const {
  std::vector<uint32_t> v = pending_;
  std::sort(v.begin(), v.end());
  return v;
}

uint64_t PicassoMrs::MetadataBytes() const {
  const uint64_t pvt = machine_.pvt().size_bytes();
  return pvt * (job_ ? 2 : 1) + unr_.node_memory_bytes();
}

uint64_t PicassoMrs::ResidentBytes() const {
  return counters_.live_bytes + MetadataBytes();
}

}  // namespace picasso
