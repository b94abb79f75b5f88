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

#include "core/capability.h"

#include <cstdio>

namespace picasso {
namespace {

constexpr uint64_t Mask(unsigned bits) {
  return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

constexpr uint32_t kOtypeAllOnes = (1u << kOtypeFieldBits) - 1;

// 128-bit field helpers over a little-endian byte array.
void PutBits(CapabilityBytes& out, unsigned pos, unsigned width,
             uint64_t value) {
  for (unsigned i = 0; i < width; ++i) {
    if ((value >> i) & 1) {
      unsigned bit = pos + i;
      out[bit / 8] |= static_cast<uint8_t>(1u << (bit % 8));
    }
  }
}

uint64_t GetBits(const CapabilityBytes& in, unsigned pos, unsigned width) {
  uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) {
    unsigned bit = pos + i;
    if ((in[bit / 8] >> (bit % 8)) & 1) v |= uint64_t{1} << i;
  }
  return v;
}

}  // namespace

bool PermissionSet::SubsetOf(const PermissionSet& o) const {
  return (!load || o.load) && (!store || o.store) &&
         (!load_cap || o.load_cap) && (!store_cap || o.store_cap) &&
         (!sw_vmem || o.sw_vmem);
}

uint8_t PermissionSet::Bits() const {
  return static_cast<uint8_t>(load | store << 1 | load_cap << 2 |
                              store_cap << 3 | sw_vmem << 4);
}

PermissionSet PermissionSet::FromBits(uint8_t b) {
  return {(b & 1) != 0, (b & 2) != 0, (b & 4) != 0, (b & 8) != 0,
          (b & 16) != 0};
}

std::string PermissionSet::ToString() const {
  std::string s;
  s += load ? 'r' : '-';
  s += store ? 'w' : '-';
  s += load_cap ? 'R' : '-';
  s += store_cap ? 'W' : '-';
  s += sw_vmem ? 'V' : '-';
  return s;
}

Capability Capability::Root(uint64_t base, uint64_t length,
                            PermissionSet perms) {
  return {base, base, length, perms, kUnsealed, true};
}

std::string_view ToString(CapError e) {
  switch (e) {
    case CapError::kMonotonicityViolation:
      return "MonotonicityViolation";
    case CapError::kSealedOperand:
      return "SealedOperand";
    case CapError::kUntaggedOperand:
      return "UntaggedOperand";
    case CapError::kPermissionDenied:
      return "PermissionDenied";
    case CapError::kColorOutOfRange:
      return "ColorOutOfRange";
  }
  return "?";
}

MachineConfig MachineConfig::WithColorBits(unsigned bits) {
  MachineConfig c;
  c.color_bits = bits;
  c.otypeth = bits >= 32 ? 0 : 1u << bits;
  return c;
}

Expected<void, std::string> MachineConfig::Validate() const {
  auto fail = [](std::string msg) { return Unexpected{std::move(msg)}; };
  if (color_bits < 2 || color_bits > kMaxColorBits)
    return fail("color_bits must be in [2, 21]");
  if (otypeth == 0 || otypeth > color_space())
    return fail("otypeth must be in [1, 2^color_bits]");
  if (pvt_buffer_ways == 0 || pvt_buffer_sets == 0 ||
      (pvt_buffer_sets & (pvt_buffer_sets - 1)) != 0)
    return fail("pvt buffer needs >= 1 way and a power-of-two set count");
  if (heap_size == 0 || heap_size % kCapabilityWidth != 0 ||
      heap_base % kCapabilityWidth != 0)
    return fail("heap must be 16-byte aligned and non-empty");
  if (heap_size >= (uint64_t{1} << kBoundsFieldBits))
    return fail("heap_size must be below 1 GiB");
  if (spill_base % kCapabilityWidth != 0 || pvt_base % kCapabilityWidth != 0)
    return fail("spill and PVT regions must be 16-byte aligned");

  struct Region {
    const char* name;
    uint64_t base, size;
  };
  const Region regions[] = {{"globals", globals_base, globals_size},
                            {"spill", spill_base, spill_size},
                            {"heap", heap_base, heap_size},
                            {"pvt", pvt_base, pvt_bytes()}};
  for (const auto& r : regions) {
    if (r.base + r.size > (uint64_t{1} << kAddressBits) || r.base + r.size < r.base)
      return fail(std::string(r.name) + " region exceeds the address space");
    if (r.size >= (uint64_t{1} << kBoundsFieldBits))
      return fail(std::string(r.name) + " region too large to be encoded");
  }
  for (size_t i = 0; i < std::size(regions); ++i) {
    for (size_t j = i + 1; j < std::size(regions); ++j) {
      const auto& a = regions[i];
      const auto& b = regions[j];
      if (a.base < b.base + b.size && b.base < a.base + a.size)
        return fail(std::string(a.name) + " and " + b.name + " overlap");
    }
  }
  return {};
}

OtypeInterpretation Interpret(uint32_t otype, uint32_t otypeth) {
  using K = OtypeInterpretation::Kind;
  if (otype == kUnsealed || otype == 0) return {K::kUnsealed, 0};
  if (otype < otypeth) return {K::kColored, otype};
  return {K::kSealed, 0};
}

Expected<Capability, CapError> Derive(const Capability& parent,
                                      uint64_t new_base, uint64_t new_length,
                                      PermissionSet new_perms,
                                      uint32_t otypeth) {
  if (!parent.tag) return Unexpected{CapError::kUntaggedOperand};
  if (Interpret(parent.otype, otypeth).kind ==
      OtypeInterpretation::Kind::kSealed)
    return Unexpected{CapError::kSealedOperand};
  const uint64_t new_top = new_base + new_length;
  if (new_top < new_base || new_base < parent.base || new_top > parent.top() ||
      !new_perms.SubsetOf(parent.perms))
    return Unexpected{CapError::kMonotonicityViolation};

  Capability c = parent;
  c.base = new_base;
  c.length = new_length;
  c.perms = new_perms;
  if (c.address < new_base || c.address > new_top) c.address = new_base;
  return c;
}

Expected<Capability, CapError> SetColor(const Capability& cap,
                                        const Capability& auth, uint32_t color,
                                        uint32_t otypeth) {
  if (!cap.tag || !auth.tag) return Unexpected{CapError::kUntaggedOperand};
  if (!auth.perms.sw_vmem) return Unexpected{CapError::kPermissionDenied};
  if (Interpret(cap.otype, otypeth).kind !=
      OtypeInterpretation::Kind::kUnsealed)
    return Unexpected{CapError::kSealedOperand};
  if (color == 0 || color >= otypeth)
    return Unexpected{CapError::kColorOutOfRange};
  Capability c = cap;
  c.otype = color;
  return c;
}

Capability ClearTag(const Capability& cap) {
  Capability c = cap;
  c.tag = false;
  return c;
}

Capability WithAddress(const Capability& cap, uint64_t address) {
  Capability c = cap;
  c.address = address;
  if (address < cap.base || address > cap.top()) {
    c.tag = false;
    c.base = address;
    c.length = 0;
  }
  return c;
}

bool IsRepresentable(const Capability& cap) {
  if (cap.address > Mask(kAddressBits)) return false;
  if (cap.address < cap.base || cap.address - cap.base > Mask(kBoundsFieldBits))
    return false;
  if (cap.length > Mask(kBoundsFieldBits)) return false;
  return cap.otype == kUnsealed || cap.otype < kOtypeAllOnes;
}

CapabilityBytes Encode(const Capability& cap) {
  CapabilityBytes out{};
  PutBits(out, 0, 40, cap.address);
  PutBits(out, 40, 30, cap.address - cap.base);
  PutBits(out, 70, 30, cap.length);
  PutBits(out, 100, 5, cap.perms.Bits());
  PutBits(out, 105, 22, cap.otype == kUnsealed ? kOtypeAllOnes : cap.otype);
  return out;
}

Capability Decode(const CapabilityBytes& bytes, bool tag) {
  Capability c;
  c.address = GetBits(bytes, 0, 40);
  c.base = c.address - GetBits(bytes, 40, 30);
  c.length = GetBits(bytes, 70, 30);
  c.perms = PermissionSet::FromBits(static_cast<uint8_t>(GetBits(bytes, 100, 5)));
  const auto ot = static_cast<uint32_t>(GetBits(bytes, 105, 22));
  c.otype = ot == kOtypeAllOnes ? kUnsealed : ot;
  c.tag = tag;
  return c;
}

std::string ToString(const Capability& cap) {
  char buf[160];
  char ot[16];
  if (cap.otype == kUnsealed)
    std::snprintf(ot, sizeof ot, "-");
  else
    std::snprintf(ot, sizeof ot, "%u", cap.otype);
  std::snprintf(buf, sizeof buf, "{addr=0x%llx [0x%llx,0x%llx) %s otype=%s tag=%d}",
                static_cast<unsigned long long>(cap.address),
                static_cast<unsigned long long>(cap.base),
                static_cast<unsigned long long>(cap.top()),
                cap.perms.ToString().c_str(), ot, cap.tag ? 1 : 0);
  return buf;
}

}  // namespace picasso
