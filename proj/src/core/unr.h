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

#ifndef PICASSO_CORE_UNR_H_
#define PICASSO_CORE_UNR_H_

#include <array>
#include <cstdint>
#include <list>
#include <span>
#include <string>
#include <string_view>

#include "core/expected.h"

namespace picasso {

enum class UnrError : uint8_t {
  kExhausted,
  kNotClaimed,
  kOutOfRange,
  kNotAscending,
};

std::string_view ToString(UnrError e);

inline constexpr uint32_t kUnrBitmapBits = 512;

// One element of the compressed ID list: a run of uniformly claimed or
// available IDs, or a fixed 512-bit bitmap covering up to 512 IDs
// (bit set = claimed).
struct UnrNode {
  enum class Kind : uint8_t { kClaimedRun, kAvailableRun, kBitmap };

  Kind kind = Kind::kAvailableRun;
  uint32_t len = 0;
  std::array<uint64_t, kUnrBitmapBits / 64> bits{};

  bool is_run() const { return kind != Kind::kBitmap; }
  bool bit(uint32_t i) const { return (bits[i >> 6] >> (i & 63)) & 1; }
  void set_bit(uint32_t i, bool v) {
    const uint64_t m = uint64_t{1} << (i & 63);
    bits[i >> 6] = v ? bits[i >> 6] | m : bits[i >> 6] & ~m;
  }
  uint32_t claimed() const;
};

// Node accounting, in bytes: a list node (two links, length, state and a
// payload pointer) and the 512-bit payload a bitmap adds on top of it.
// A bitmap costs less than three runs and more than two, so converting
// three or more runs saves memory.
inline constexpr size_t kUnrNodeBytes = 40;
inline constexpr size_t kUnrBitmapPayloadBytes = kUnrBitmapBits / 8;

// Compressed allocator for integer IDs in [1, total], returning the lowest
// available ID first.
//
// Canonical form maintained after every operation:
//  - node extents cover [1, total] in order without gaps;
//  - no two adjacent runs share a state;
//  - no bitmap is uniform (uniform bitmaps dissolve into runs);
//  - bitmaps are only ever created from three or more consecutive runs
//    spanning at most 512 IDs, and grow only by absorbing a neighbour that
//    keeps them within 512 IDs.
class UnrAllocator {
 public:
  explicit UnrAllocator(uint32_t total);

  Expected<uint32_t, UnrError> AllocFirstFree();
  Expected<void, UnrError> FreeOne(uint32_t id);
  // ids must be strictly ascending and all claimed. Runs in one forward pass
  // over the list, forming the first bitmap that saves memory as it goes.
  // Fails without modifying anything.
  Expected<void, UnrError> BatchRelease(std::span<const uint32_t> ids);

  bool IsClaimed(uint32_t id) const;

  uint32_t total() const { return total_; }
  uint32_t population() const { return population_; }
  uint32_t available() const { return total_ - population_; }

  size_t node_count() const { return nodes_.size(); }
  size_t run_count() const { return runs_; }
  size_t bitmap_count() const { return bitmaps_; }
  size_t node_memory_bytes() const {
    return runs_ * kUnrNodeBytes +
           bitmaps_ * (kUnrNodeBytes + kUnrBitmapPayloadBytes);
  }

  // Walks over the list from its head made by mutating operations.
  uint64_t list_passes() const { return passes_; }

  const std::list<UnrNode>& nodes() const { return nodes_; }

  // Space-separated: "R:c:<len>", "R:a:<len>", "B:len=<len>:<hex>" where hex
  // lists ceil(len/8) bytes, bit i of the bitmap in byte i/8 at position i%8.
  std::string Dump() const;

  // Empty if the canonical form holds, else a description of the breach.
  std::string CheckInvariants() const;

 private:
  friend class UnrEmitter;

  // Replaces *it with its contents after flipping `id` (given as an offset
  // into the node), re-normalizing locally.
  void RewriteWithFlip(std::list<UnrNode>::iterator it, uint32_t offset,
                       bool claim);

  uint32_t total_;
  uint32_t population_ = 0;
  size_t runs_ = 0;
  size_t bitmaps_ = 0;
  uint64_t passes_ = 0;
  std::list<UnrNode> nodes_;
};

}  // namespace picasso

#endif  // PICASSO_CORE_UNR_H_
