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

#ifndef PICASSO_CORE_CAPABILITY_H_
#define PICASSO_CORE_CAPABILITY_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "core/expected.h"

namespace picasso {

// Distinguished otype for unsealed, uncolored capabilities. Serialized as an
// all-ones otype field.
inline constexpr uint32_t kUnsealed = 0xFFFFFFFFu;

inline constexpr unsigned kMaxColorBits = 21;
inline constexpr uint64_t kCapabilityWidth = 16;

// Limits of the 128-bit in-memory capability encoding.
inline constexpr unsigned kAddressBits = 40;
inline constexpr unsigned kBoundsFieldBits = 30;
inline constexpr unsigned kOtypeFieldBits = 22;

struct PermissionSet {
  bool load = false;
  bool store = false;
  bool load_cap = false;
  bool store_cap = false;
  // Held only by the trusted allocator; required to assign colors.
  bool sw_vmem = false;

  static constexpr PermissionSet All() { return {true, true, true, true, true}; }
  // What the allocator hands to application code.
  static constexpr PermissionSet UserHeap() {
    return {true, true, true, true, false};
  }
  static constexpr PermissionSet DataOnly() {
    return {true, true, false, false, false};
  }

  bool SubsetOf(const PermissionSet& other) const;
  uint8_t Bits() const;
  static PermissionSet FromBits(uint8_t bits);
  std::string ToString() const;

  friend bool operator==(const PermissionSet&, const PermissionSet&) = default;
};

struct Capability {
  uint64_t address = 0;
  uint64_t base = 0;
  uint64_t length = 0;
  PermissionSet perms;
  uint32_t otype = kUnsealed;
  bool tag = false;

  uint64_t top() const { return base + length; }

  static Capability Null() { return {}; }
  // A tagged, unsealed capability over [base, base + length).
  static Capability Root(uint64_t base, uint64_t length, PermissionSet perms);

  friend bool operator==(const Capability&, const Capability&) = default;
};

struct OtypeInterpretation {
  enum class Kind : uint8_t { kUnsealed, kColored, kSealed };
  Kind kind = Kind::kUnsealed;
  uint32_t color = 0;  // meaningful only for kColored

  bool colored() const { return kind == Kind::kColored; }
  friend bool operator==(const OtypeInterpretation&,
                         const OtypeInterpretation&) = default;
};

enum class CapError : uint8_t {
  kMonotonicityViolation,
  kSealedOperand,
  kUntaggedOperand,
  kPermissionDenied,
  kColorOutOfRange,
};

std::string_view ToString(CapError e);

// Machine geometry. Region addresses are virtual; every region must fit in
// the kAddressBits-bit space and be pairwise disjoint.
struct MachineConfig {
  unsigned color_bits = kMaxColorBits;
  uint32_t otypeth = 1u << kMaxColorBits;

  uint64_t globals_base = 0x0100'0000;
  uint64_t globals_size = 1ull << 20;
  uint64_t spill_base = 0x0200'0000;
  uint64_t spill_size = 16ull << 20;
  uint64_t heap_base = 0x1000'0000;
  uint64_t heap_size = 32ull << 20;
  uint64_t pvt_base = 0xFF'C000'0000;

  unsigned pvt_buffer_ways = 4;
  unsigned pvt_buffer_sets = 16;
  bool pvt_buffer_enabled = true;
  // When false the machine has no PVTR: colored otypes are never checked
  // against the PVT. Used by schemes that carry other data in the otype.
  bool provenance_checks = true;
  // Bytes of the PVT that are mapped; 0 means the full table. Lookups past
  // the mapped prefix raise PvtUnmapped.
  uint64_t pvt_mapped_bytes = 0;

  // Builds a config with color_bits set and otypeth = 2^color_bits.
  static MachineConfig WithColorBits(unsigned bits);

  uint32_t color_space() const { return 1u << color_bits; }
  uint64_t pvt_bytes() const { return uint64_t{1} << color_bits >> 3; }

  Expected<void, std::string> Validate() const;
};

// Total over all (otype, otypeth) pairs. otype 0 is reserved and reads as
// unsealed.
OtypeInterpretation Interpret(uint32_t otype, uint32_t otypeth);

// Narrows bounds and/or permissions. The address is kept if it still lies in
// the new bounds, otherwise it moves to new_base.
Expected<Capability, CapError> Derive(const Capability& parent,
                                      uint64_t new_base, uint64_t new_length,
                                      PermissionSet new_perms,
                                      uint32_t otypeth);

// ccsettype: stamps a color into an unsealed capability. auth must carry
// sw_vmem.
Expected<Capability, CapError> SetColor(const Capability& cap,
                                        const Capability& auth, uint32_t color,
                                        uint32_t otypeth);

Capability ClearTag(const Capability& cap);

// Moves the address. Leaving [base, top] strips the tag and collapses the
// bounds onto the new address.
Capability WithAddress(const Capability& cap, uint64_t address);

// Whether the capability fits the 128-bit encoding.
bool IsRepresentable(const Capability& cap);

using CapabilityBytes = std::array<uint8_t, 16>;

// 128-bit little-endian encoding:
//   bits   0..39   address
//   bits  40..69   address - base
//   bits  70..99   length
//   bits 100..104  permissions (load, store, load_cap, store_cap, sw_vmem)
//   bits 105..126  otype (all ones = unsealed)
//   bit  127       zero
// The tag travels out of band. Callers must check IsRepresentable first.
CapabilityBytes Encode(const Capability& cap);
Capability Decode(const CapabilityBytes& bytes, bool tag);

std::string ToString(const Capability& cap);

}  // namespace picasso

#endif  // PICASSO_CORE_CAPABILITY_H_
