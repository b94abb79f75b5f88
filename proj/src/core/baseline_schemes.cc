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

#include "core/baseline_schemes.h"

#include <algorithm>
#include <bit>
#include <cassert>

namespace picasso {
namespace {

Capability HeapAuthority(const Machine& m) {
  return Capability::Root(m.config().heap_base, m.config().heap_size,
                          PermissionSet::All());
}

Capability Bounded(const Capability& auth, uint64_t base, uint64_t size,
                   uint32_t otypeth) {
  auto c = Derive(auth, base, size, PermissionSet::UserHeap(), otypeth);
  assert(c.has_value());
  return *c;
}

bool OverLimit(uint64_t quarantine, uint64_t live, double fraction) {
  return quarantine > 0 &&
         static_cast<double>(quarantine) >=
             fraction * static_cast<double>(live + quarantine);
}

}  // namespace

// ---------------------------------------------------------------------------
// Cornucopia

CornucopiaScheme::CornucopiaScheme(Machine& machine,
                                   double quarantine_fraction,
                                   bool revoke_on_free)
    : machine_(machine),
      fraction_(quarantine_fraction),
      rof_(revoke_on_free),
      authority_(HeapAuthority(machine)),
      heap_(machine.config().heap_base, machine.config().heap_size),
      shadow_(machine.config().heap_size / kHeapGranule, false) {
  NoteResident();
}

Expected<Capability, AllocError> CornucopiaScheme::Malloc(uint64_t size) {
  const uint64_t rounded = RoundToGranule(std::max<uint64_t>(size, 1));
  auto addr = heap_.Allocate(rounded);
  if (!addr && !quarantine_.empty()) {
    Revoke();
    addr = heap_.Allocate(rounded);
  }
  if (!addr) return Unexpected{AllocError::kOutOfMemory};
  live_.emplace(*addr, rounded);
  ++counters_.allocations;
  counters_.live_bytes += rounded;
  NoteResident();
  return Bounded(authority_, *addr, rounded, machine_.config().otypeth);
}

bool CornucopiaScheme::Shadowed(uint64_t addr) const {
  return InHeap(addr) && shadow_[Granule(addr)];
}

FaultStatus CornucopiaScheme::Free(const Capability& cap) {
  if (!cap.tag || cap.otype != kUnsealed)
    return Unexpected{Fault{FaultKind::kMalformedFree}};
  if (Shadowed(cap.address))
    return Unexpected{Fault{FaultKind::kDoubleFree}};
  auto it = live_.find(cap.address);
  if (it == live_.end() || cap.base != cap.address)
    return Unexpected{Fault{FaultKind::kMalformedFree}};

  const Block b{it->first, it->second};
  live_.erase(it);
  for (uint64_t g = Granule(b.base); g < Granule(b.base + b.size); ++g)
    shadow_[g] = true;
  quarantine_.push_back(b);
  quarantined_.emplace(b.base, b.size);
  counters_.live_bytes -= b.size;
  counters_.quarantine_bytes += b.size;
  ++counters_.frees;
  NoteResident();

  if (rof_ || OverLimit(counters_.quarantine_bytes, counters_.live_bytes,
                        fraction_))
    Revoke();
  return {};
}

bool CornucopiaScheme::HitsQuarantine(const Capability& cap) const {
  if (quarantined_.empty() || cap.length == 0) return false;
  // First quarantined block starting at or after top, then step back one.
  auto it = quarantined_.lower_bound(cap.top());
  if (it == quarantined_.begin()) return false;
  --it;
  return it->first + it->second > cap.base;
}

uint64_t CornucopiaScheme::Revoke() {
  ++counters_.revocations;
  const SweepStats s = machine_.SweepCapabilities(
      [this](const Capability& c) { return HitsQuarantine(c); });
  counters_.swept_tags += s.visited;
  counters_.cleared_tags += s.cleared;

  uint64_t reclaimed = 0;
  while (!quarantine_.empty()) {
    const Block b = quarantine_.front();
    quarantine_.pop_front();
    for (uint64_t g = Granule(b.base); g < Granule(b.base + b.size); ++g)
      shadow_[g] = false;
    heap_.Release(b.base, b.size);
    reclaimed += b.size;
  }
  quarantined_.clear();
  counters_.quarantine_bytes = 0;
  NoteResident();
  return reclaimed;
}

uint64_t CornucopiaScheme::MetadataBytes() const {
  return shadow_.size() / 8;
}

uint64_t CornucopiaScheme::ResidentBytes() const {
  return counters_.live_bytes + counters_.quarantine_bytes + MetadataBytes();
}

// ---------------------------------------------------------------------------
// Versioning

VersioningScheme::VersioningScheme(Machine& machine,
                                   double quarantine_fraction,
                                   bool exhaustion_policy)
    : machine_(machine),
      fraction_(quarantine_fraction),
      exhaustion_(exhaustion_policy),
      authority_(HeapAuthority(machine)),
      heap_(machine.config().heap_base, machine.config().heap_size),
      epoch_(machine.config().heap_size / kHeapGranule, 0),
      stale_(epoch_.size(), 0) {
  machine_.set_access_hook(
      [this](const Capability& cap, uint64_t addr, uint64_t width,
             AccessKind) { return Check(cap, addr, width); });
  NoteResident();
}

VersioningScheme::~VersioningScheme() { machine_.set_access_hook(nullptr); }

int VersioningScheme::CapVersion(const Capability& cap) const {
  const auto i = machine_.Interpretation(cap);
  if (!i.colored() || i.color > kVersions) return -1;
  return static_cast<int>(i.color - 1);
}

std::optional<Fault> VersioningScheme::Check(const Capability& cap,
                                             uint64_t addr,
                                             uint64_t width) const {
  const int v = CapVersion(cap);
  if (v < 0 || !InHeap(addr)) return std::nullopt;
  const uint64_t last = addr + std::max<uint64_t>(width, 1) - 1;
  for (uint64_t g = Granule(addr); g <= Granule(last); ++g) {
    if (epoch_[g] % kVersions != static_cast<uint32_t>(v))
      return Fault{FaultKind::kProvenanceRetracted, static_cast<uint32_t>(v)};
  }
  return std::nullopt;
}

Expected<Capability, AllocError> VersioningScheme::Malloc(uint64_t size) {
  const uint64_t rounded = RoundToGranule(std::max<uint64_t>(size, 1));
  auto addr = heap_.Allocate(rounded);
  if (!addr && !quarantine_.empty()) {
    Sweep();
    addr = heap_.Allocate(rounded);
  }
  if (!addr) return Unexpected{AllocError::kOutOfMemory};

  const uint64_t g0 = Granule(*addr);
  const uint64_t g1 = Granule(*addr + rounded);
  uint16_t used = 0;
  for (uint64_t g = g0; g < g1; ++g) used |= stale_[g];
  if (exhaustion_ && used == kAllVersions) {
    Sweep();
    used = 0;
  }
  // Lowest epoch at or above every granule's whose version has no stale
  // references left; with the policy off a full mask forces a wrap.
  const uint32_t top =
      *std::max_element(epoch_.begin() + g0, epoch_.begin() + g1);
  uint32_t v = top;
  while (v - top < kVersions && (used >> (v % kVersions)) & 1) ++v;
  if (v - top == kVersions) v = top;
  std::fill(epoch_.begin() + g0, epoch_.begin() + g1, v);

  const uint32_t otypeth = machine_.config().otypeth;
  Capability cap = Bounded(authority_, *addr, rounded, otypeth);
  auto colored = SetColor(cap, authority_, v % kVersions + 1, otypeth);
  assert(colored.has_value());

  live_.emplace(*addr, rounded);
  ++counters_.allocations;
  counters_.live_bytes += rounded;
  NoteResident();
  return *colored;
}

FaultStatus VersioningScheme::Free(const Capability& cap) {
  const int v = CapVersion(cap);
  if (!cap.tag || v < 0 || !InHeap(cap.address))
    return Unexpected{Fault{FaultKind::kMalformedFree}};
  const uint64_t g = Granule(cap.address);
  if (epoch_[g] % kVersions != static_cast<uint32_t>(v) ||
      quarantined_.count(cap.address))
    return Unexpected{Fault{FaultKind::kDoubleFree}};
  auto it = live_.find(cap.address);
  if (it == live_.end() || cap.base != cap.address)
    return Unexpected{Fault{FaultKind::kMalformedFree}};

  const uint64_t base = it->first;
  const uint64_t size = it->second;
  live_.erase(it);
  counters_.live_bytes -= size;
  ++counters_.frees;

  bool exhausted = false;
  for (uint64_t i = Granule(base); i < Granule(base + size); ++i) {
    uint16_t& mask = stale_[i];
    mask |= static_cast<uint16_t>(1u << (epoch_[i] % kVersions));
    ++epoch_[i];
    if (mask != kAllVersions) {
      while ((mask >> (epoch_[i] % kVersions)) & 1) ++epoch_[i];
    }
    // Once the current version is the last unused one, the granule must
    // not be handed out again before a sweep.
    if (std::popcount(mask) >= static_cast<int>(kVersions) - 1)
      exhausted = true;
  }
  if (exhaustion_ && exhausted) {
    quarantine_.emplace_back(base, size);
    quarantined_.emplace(base, size);
    counters_.quarantine_bytes += size;
    NoteResident();
    if (OverLimit(counters_.quarantine_bytes, counters_.live_bytes,
                  fraction_))
      Sweep();
  } else {
    heap_.Release(base, size);
    NoteResident();
  }
  return {};
}

bool VersioningScheme::Stale(const Capability& cap) const {
  const int v = CapVersion(cap);
  if (v < 0 || !InHeap(cap.base)) return false;
  const uint64_t top = std::min(std::max(cap.top(), cap.base + 1),
                                heap_.base() + heap_.size());
  for (uint64_t g = Granule(cap.base); g < Granule(top + kHeapGranule - 1);
       ++g) {
    if (epoch_[g] % kVersions != static_cast<uint32_t>(v)) return true;
  }
  return false;
}

uint64_t VersioningScheme::Sweep() {
  ++counters_.revocations;
  const SweepStats s = machine_.SweepCapabilities(
      [this](const Capability& c) { return Stale(c); });
  counters_.swept_tags += s.visited;
  counters_.cleared_tags += s.cleared;

  // No stale version survives the sweep.
  std::fill(stale_.begin(), stale_.end(), 0);
  uint64_t reclaimed = 0;
  while (!quarantine_.empty()) {
    const auto [base, size] = quarantine_.front();
    quarantine_.pop_front();
    heap_.Release(base, size);
    reclaimed += size;
  }
  quarantined_.clear();
  counters_.quarantine_bytes = 0;
  NoteResident();
  return reclaimed;
}

uint64_t VersioningScheme::MetadataBytes() const {
  return epoch_.size() / 2;  // four bits per granule
}

uint64_t VersioningScheme::ResidentBytes() const {
  return counters_.live_bytes + counters_.quarantine_bytes + MetadataBytes();
}

// ---------------------------------------------------------------------------
// None

NoneScheme::NoneScheme(Machine& machine)
    : machine_(machine),
      authority_(HeapAuthority(machine)),
      heap_(machine.config().heap_base, machine.config().heap_size) {}

Expected<Capability, AllocError> NoneScheme::Malloc(uint64_t size) {
  const uint64_t rounded = RoundToGranule(std::max<uint64_t>(size, 1));
  auto addr = heap_.Allocate(rounded);
  if (!addr) return Unexpected{AllocError::kOutOfMemory};
  live_.emplace(*addr, rounded);
  ++counters_.allocations;
  counters_.live_bytes += rounded;
  NoteResident();
  return Bounded(authority_, *addr, rounded, machine_.config().otypeth);
}

FaultStatus NoneScheme::Free(const Capability& cap) {
  auto it = live_.find(cap.address);
  if (!cap.tag || it == live_.end()) return {};
  heap_.Release(it->first, it->second);
  counters_.live_bytes -= it->second;
  live_.erase(it);
  ++counters_.frees;
  NoteResident();
  return {};
}

}  // namespace picasso
