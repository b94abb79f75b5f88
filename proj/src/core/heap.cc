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

#include "core/heap.h"

#include <cassert>
#include <iterator>

namespace picasso {

FirstFitHeap::FirstFitHeap(uint64_t base, uint64_t size)
    : base_(base), size_(size), free_bytes_(size) {
  if (size > 0) free_.emplace(base, size);
}

std::optional<uint64_t> FirstFitHeap::Allocate(uint64_t size) {
  const uint64_t need = RoundToGranule(size == 0 ? 1 : size);
  for (auto it = free_.begin(); it != free_.end(); ++it) {
    if (it->second < need) continue;
    const uint64_t addr = it->first;
    const uint64_t rest = it->second - need;
    free_.erase(it);
    if (rest > 0) free_.emplace(addr + need, rest);
    free_bytes_ -= need;
    return addr;
  }
  return std::nullopt;
}

void FirstFitHeap::Release(uint64_t base, uint64_t size) {
  assert(size % kHeapGranule == 0);
  auto [it, inserted] = free_.emplace(base, size);
  assert(inserted);
  free_bytes_ += size;
  if (auto next = std::next(it);
      next != free_.end() && it->first + it->second == next->first) {
    it->second += next->second;
    free_.erase(next);
  }
  if (it != free_.begin()) {
    auto prev = std::prev(it);
    if (prev->first + prev->second == it->first) {
      prev->second += it->second;
      free_.erase(it);
    }
  }
}

bool FirstFitHeap::IsFree(uint64_t addr) const {
  auto it = free_.upper_bound(addr);
  if (it == free_.begin()) return false;
  --it;
  return addr < it->first + it->second;
}

}  // namespace picasso
