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

#ifndef PICASSO_CORE_HEAP_H_
#define PICASSO_CORE_HEAP_H_

#include <cstdint>
#include <map>
#include <optional>

namespace picasso {

inline constexpr uint64_t kHeapGranule = 16;

inline constexpr uint64_t RoundToGranule(uint64_t size) {
  return (size + kHeapGranule - 1) & ~(kHeapGranule - 1);
}

// Address-ordered first-fit free list over [base, base + size) with
// coalescing on release. Sizes are rounded up to 16 bytes.
class FirstFitHeap {
 public:
  FirstFitHeap(uint64_t base, uint64_t size);

  // Returns the block base, or nullopt when no free block is large enough.
  std::optional<uint64_t> Allocate(uint64_t size);
  // [base, base + size) must be allocated and size already rounded.
  void Release(uint64_t base, uint64_t size);

  uint64_t base() const { return base_; }
  uint64_t size() const { return size_; }
  uint64_t free_bytes() const { return free_bytes_; }
  size_t free_blocks() const { return free_.size(); }
  bool IsFree(uint64_t addr) const;

 private:
  uint64_t base_;
  uint64_t size_;
  uint64_t free_bytes_;
  std::map<uint64_t, uint64_t> free_;  // base -> size
};

}  // namespace picasso

#endif  // PICASSO_CORE_HEAP_H_
