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

#ifndef PICASSO_CORE_TAGGED_MACHINE_H_
#define PICASSO_CORE_TAGGED_MACHINE_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/capability.h"
#include "core/expected.h"

namespace picasso {

enum class FaultKind : uint8_t {
  kSpatialOutOfBounds,
  kUntaggedOperand,
  kPermissionDenied,
  kProvenanceRetracted,
  kSealedDereference,
  kMalformedFree,
  kDoubleFree,
  kPvtUnmapped,
};
inline constexpr size_t kFaultKindCount = 8;

std::string_view ToString(FaultKind k);
std::optional<FaultKind> ParseFaultKind(std::string_view s);

struct Fault {
  FaultKind kind;
  uint32_t color = 0;  // set for kProvenanceRetracted

  friend bool operator==(const Fault&, const Fault&) = default;
};

template <typename T>
using FaultOr = Expected<T, Fault>;
using FaultStatus = Expected<void, Fault>;

enum class AccessKind : uint8_t { kRead, kWrite, kReadCap, kWriteCap };

// Word-granular memory with one out-of-band validity tag per 16-byte word.
// Untouched words read as zero with a clear tag.
class TaggedMemory {
 public:
  struct Word {
    CapabilityBytes bytes{};
    bool tag = false;
  };

  void Read(uint64_t addr, std::span<uint8_t> out) const;
  // Clears the tag of every word the write overlaps.
  void Write(uint64_t addr, std::span<const uint8_t> in);

  // addr must be 16-byte aligned and cap representable.
  void WriteCapability(uint64_t addr, const Capability& cap);
  Capability ReadCapability(uint64_t addr) const;

  bool TagAt(uint64_t addr) const;
  void ClearTag(uint64_t addr);

  // Ascending addresses of words whose tag is set.
  const std::set<uint64_t>& tagged_words() const { return tagged_; }
  size_t word_count() const { return words_.size(); }

  // One line per materialized word:
  //   addr=<10 hex digits> tag=<0|1> bytes=<32 hex chars>
  std::string Dump() const;
  uint64_t Digest() const;

 private:
  std::unordered_map<uint64_t, Word> words_;
  std::set<uint64_t> tagged_;
};

using PvtWord = std::array<uint64_t, 2>;

// Provenance-validity table: one bit per color, 1 = retracted.
class Pvt {
 public:
  Pvt(unsigned color_bits, uint64_t base);

  uint64_t base() const { return base_; }
  uint32_t colors() const { return colors_; }
  uint64_t size_bytes() const { return colors_ / 8; }

  bool retracted(uint32_t color) const {
    return (bits_[color >> 6] >> (color & 63)) & 1;
  }
  void set(uint32_t color, bool retracted);

  // The PVB for `color` lives at bit (color & 127) of the 128-bit word at
  // this virtual address.
  uint64_t WordAddress(uint32_t color) const {
    return base_ + uint64_t{color >> 7} * 16;
  }
  PvtWord WordAt(uint64_t word_addr) const;

  const std::vector<uint64_t>& raw() const { return bits_; }

  // Run-length listing, one "lo-hi:state" line per maximal range.
  std::string Dump() const;

 private:
  uint64_t base_;
  uint32_t colors_;
  std::vector<uint64_t> bits_;
};

// Set-associative cache of PVT words, tagged by word virtual address.
// Round-robin replacement within a set.
class PvtBuffer {
 public:
  PvtBuffer(unsigned sets, unsigned ways);

  std::optional<PvtWord> Lookup(uint64_t word_addr);
  void Fill(uint64_t word_addr, const PvtWord& word);
  void InvalidateAll();

  unsigned SetIndex(uint64_t word_addr) const {
    return static_cast<unsigned>((word_addr >> 4) & (sets_ - 1));
  }
  unsigned capacity_words() const { return sets_ * ways_; }

  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }
  uint64_t invalidations() const { return invalidations_; }

 private:
  struct Entry {
    bool valid = false;
    uint64_t addr = 0;
    PvtWord data{};
  };
  unsigned sets_;
  unsigned ways_;
  std::vector<Entry> entries_;
  std::vector<unsigned> victim_;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
  uint64_t invalidations_ = 0;
};

inline constexpr size_t kRegisterCount = 32;

struct SweepStats {
  uint64_t visited = 0;  // tagged capabilities examined
  uint64_t cleared = 0;

  SweepStats& operator+=(const SweepStats& o) {
    visited += o.visited;
    cleared += o.cleared;
    return *this;
  }
};

enum class PvbState : uint8_t { kValid, kRetracted };

class Machine {
 public:
  // Extra check run after the architectural ones and before any mutation.
  using AccessHook = std::function<std::optional<Fault>(
      const Capability& cap, uint64_t addr, uint64_t width, AccessKind kind)>;
  // Returns true if a capability loaded from memory must lose its tag.
  using LoadBarrier = std::function<bool(const Capability&)>;
  using CapPredicate = std::function<bool(const Capability&)>;
  using ColorPredicate = std::function<bool(uint32_t)>;

  // config must already have passed Validate().
  explicit Machine(const MachineConfig& config);

  const MachineConfig& config() const { return config_; }
  TaggedMemory& memory() { return memory_; }
  const TaggedMemory& memory() const { return memory_; }
  const Pvt& pvt() const { return pvt_; }
  const PvtBuffer& pvt_buffer() const { return buffer_; }

  Capability& reg(size_t i) { return regs_.at(i); }
  const Capability& reg(size_t i) const { return regs_.at(i); }

  OtypeInterpretation Interpretation(const Capability& cap) const {
    return Interpret(cap.otype, config_.otypeth);
  }

  // Faults are reported in priority order: UntaggedOperand,
  // SealedDereference, PermissionDenied, SpatialOutOfBounds, PvtUnmapped,
  // ProvenanceRetracted, then the access hook.
  FaultStatus CheckAccess(const Capability& cap, uint64_t offset,
                          uint64_t width, AccessKind kind);

  FaultOr<std::vector<uint8_t>> LoadData(const Capability& cap,
                                         uint64_t offset, uint64_t width);
  FaultStatus StoreData(const Capability& cap, uint64_t offset,
                        std::span<const uint8_t> bytes);

  // Stores retain retracted-color values; only the authority is checked.
  FaultStatus StoreCap(const Capability& auth, uint64_t offset,
                       const Capability& value);
  FaultOr<Capability> LoadCap(const Capability& auth, uint64_t offset);

  // Every PVT write flushes the whole buffer.
  Expected<void, CapError> PvtSet(uint32_t color, PvbState state);
  Expected<void, CapError> PvtSetBatch(std::span<const uint32_t> colors,
                                       PvbState state);
  bool PvbRetracted(uint32_t color) const { return pvt_.retracted(color); }

  // Clears the tag of every capability in memory (ascending address) and
  // then in registers (ascending index) whose color satisfies pred.
  SweepStats SweepScan(const ColorPredicate& pred);
  // Same traversal with an arbitrary capability predicate.
  SweepStats SweepCapabilities(const CapPredicate& pred);
  // Memory-only step over at most max_words tagged words starting at
  // *cursor. Advances *cursor; returns done = true once memory is exhausted.
  SweepStats SweepMemoryWindow(const CapPredicate& pred, uint64_t* cursor,
                               uint64_t max_words, bool* done);
  SweepStats SweepRegisters(const CapPredicate& pred);

  void set_access_hook(AccessHook hook) { hook_ = std::move(hook); }
  void set_load_barrier(LoadBarrier barrier) { barrier_ = std::move(barrier); }

  uint64_t pvt_lookups() const { return pvt_lookups_; }

  // Hash over memory contents, tags and registers.
  uint64_t StateDigest() const;

 private:
  std::optional<Fault> CheckProvenance(uint32_t color);
  CapPredicate ColoredWith(const ColorPredicate& pred) const;

  MachineConfig config_;
  TaggedMemory memory_;
  Pvt pvt_;
  PvtBuffer buffer_;
  std::array<Capability, kRegisterCount> regs_{};
  AccessHook hook_;
  LoadBarrier barrier_;
  uint64_t pvt_lookups_ = 0;
};

// FNV-1a, used for stable digests of memory and outcome streams.
uint64_t Fnv1a(std::span<const uint8_t> bytes, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t Fnv1aU64(uint64_t value, uint64_t seed);

}  // namespace picasso

#endif  // PICASSO_CORE_TAGGED_MACHINE_H_
