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

#ifndef PICASSO_CORE_BASELINE_SCHEMES_H_
#define PICASSO_CORE_BASELINE_SCHEMES_H_

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "core/capability.h"
#include "core/heap.h"
#include "core/scheme.h"
#include "core/tagged_machine.h"

namespace picasso {

// Quarantining allocator with a shadow bitmap of freed granules. Freed
// blocks stay out of the heap until a sweep has cleared every capability
// that reaches into them. In revoke-on-free mode every free sweeps.
class CornucopiaScheme : public Scheme {
 public:
  CornucopiaScheme(Machine& machine, double quarantine_fraction,
                   bool revoke_on_free);

  SchemeKind kind() const override {
    return rof_ ? SchemeKind::kCornucopiaRof : SchemeKind::kCornucopia;
  }
  Expected<Capability, AllocError> Malloc(uint64_t size) override;
  FaultStatus Free(const Capability& cap) override;

  // Sweeps memory and registers, then hands the quarantine back to the heap
  // in FIFO order. Returns the bytes reclaimed.
  uint64_t Revoke();

  size_t live_allocations() const override { return live_.size(); }
  uint64_t ResidentBytes() const override;
  uint64_t MetadataBytes() const override;

  bool Shadowed(uint64_t addr) const;
  size_t quarantined_blocks() const { return quarantine_.size(); }

 private:
  struct Block {
    uint64_t base;
    uint64_t size;
  };
  uint64_t Granule(uint64_t addr) const {
    return (addr - heap_.base()) / kHeapGranule;
  }
  bool InHeap(uint64_t addr) const {
    return addr >= heap_.base() && addr < heap_.base() + heap_.size();
  }
  bool HitsQuarantine(const Capability& cap) const;

  Machine& machine_;
  double fraction_;
  bool rof_;
  Capability authority_;
  FirstFitHeap heap_;
  std::map<uint64_t, uint64_t> live_;         // base -> size
  std::map<uint64_t, uint64_t> quarantined_;  // base -> size
  std::deque<Block> quarantine_;              // FIFO exit order
  std::vector<bool> shadow_;
};

// 4-bit memory versioning. Each heap granule carries an epoch whose low four
// bits are its version; capabilities carry the version of their allocation
// in the otype (stored as version + 1 so it reads as colored). Free bumps
// the epoch of every granule in the block.
//
// With the exhaustion policy on, a block whose granules would start reusing
// a version seen since the last sweep is quarantined instead of released,
// and the quarantine drains through a sweep that clears every capability
// with a stale version.
class VersioningScheme : public Scheme {
 public:
  static constexpr uint32_t kVersions = 16;
  static constexpr uint16_t kAllVersions = 0xFFFF;

  VersioningScheme(Machine& machine, double quarantine_fraction,
                   bool exhaustion_policy);
  ~VersioningScheme() override;

  SchemeKind kind() const override { return SchemeKind::kVersioning; }
  Expected<Capability, AllocError> Malloc(uint64_t size) override;
  FaultStatus Free(const Capability& cap) override;

  uint64_t Sweep();

  size_t live_allocations() const override { return live_.size(); }
  uint64_t ResidentBytes() const override;
  uint64_t MetadataBytes() const override;

  uint32_t GranuleVersion(uint64_t addr) const {
    return static_cast<uint32_t>(epoch_[Granule(addr)] % kVersions);
  }
  // Version carried by a heap capability, or -1 if it carries none.
  int CapVersion(const Capability& cap) const;

 private:
  uint64_t Granule(uint64_t addr) const {
    return (addr - heap_.base()) / kHeapGranule;
  }
  bool InHeap(uint64_t addr) const {
    return addr >= heap_.base() && addr < heap_.base() + heap_.size();
  }
  std::optional<Fault> Check(const Capability& cap, uint64_t addr,
                             uint64_t width) const;
  bool Stale(const Capability& cap) const;

  Machine& machine_;
  double fraction_;
  bool exhaustion_;
  Capability authority_;
  FirstFitHeap heap_;
  std::map<uint64_t, uint64_t> live_;  // base -> size
  std::map<uint64_t, uint64_t> quarantined_;
  std::deque<std::pair<uint64_t, uint64_t>> quarantine_;
  std::vector<uint32_t> epoch_;
  // Per granule: versions that may still be held by stale capabilities.
  std::vector<uint16_t> stale_;
};

// No temporal protection: plain bounded capabilities over a first-fit heap.
// Frees of anything that is not a live allocation start are ignored.
class NoneScheme : public Scheme {
 public:
  explicit NoneScheme(Machine& machine);

  SchemeKind kind() const override { return SchemeKind::kNone; }
  Expected<Capability, AllocError> Malloc(uint64_t size) override;
  FaultStatus Free(const Capability& cap) override;

  size_t live_allocations() const override { return live_.size(); }
  uint64_t ResidentBytes() const override { return counters_.live_bytes; }

 private:
  Machine& machine_;
  Capability authority_;
  FirstFitHeap heap_;
  std::map<uint64_t, uint64_t> live_;
};

}  // namespace picasso

#endif  // PICASSO_CORE_BASELINE_SCHEMES_H_
