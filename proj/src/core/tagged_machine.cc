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

#include "core/tagged_machine.h"

#include <algorithm>
#include <cstdio>

namespace picasso {
namespace {

constexpr std::array<std::string_view, kFaultKindCount> kFaultNames = {
    "SpatialOutOfBounds", "UntaggedOperand",   "PermissionDenied",
    "ProvenanceRetracted", "SealedDereference", "MalformedFree",
    "DoubleFree",          "PvtUnmapped",
};

uint64_t AlignDown(uint64_t a) { return a & ~(kCapabilityWidth - 1); }

}  // namespace

uint64_t Fnv1a(std::span<const uint8_t> bytes, uint64_t h) {
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t Fnv1aU64(uint64_t value, uint64_t seed) {
  std::array<uint8_t, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(value >> (8 * i));
  return Fnv1a(b, seed);
}

std::string_view ToString(FaultKind k) {
  return kFaultNames[static_cast<size_t>(k)];
}

std::optional<FaultKind> ParseFaultKind(std::string_view s) {
  for (size_t i = 0; i < kFaultNames.size(); ++i)
    if (kFaultNames[i] == s) return static_cast<FaultKind>(i);
  return std::nullopt;
}

// --- TaggedMemory -----------------------------------------------------------

void TaggedMemory::Read(uint64_t addr, std::span<uint8_t> out) const {
  size_t done = 0;
  while (done < out.size()) {
    const uint64_t a = addr + done;
    const uint64_t w = AlignDown(a);
    const size_t off = a - w;
    const size_t n = std::min<size_t>(kCapabilityWidth - off, out.size() - done);
    auto it = words_.find(w);
    if (it == words_.end())
      std::fill_n(out.begin() + done, n, uint8_t{0});
    else
      std::copy_n(it->second.bytes.begin() + off, n, out.begin() + done);
    done += n;
  }
}

void TaggedMemory::Write(uint64_t addr, std::span<const uint8_t> in) {
  size_t done = 0;
  while (done < in.size()) {
    const uint64_t a = addr + done;
    const uint64_t w = AlignDown(a);
    const size_t off = a - w;
    const size_t n = std::min<size_t>(kCapabilityWidth - off, in.size() - done);
    Word& word = words_[w];
    std::copy_n(in.begin() + done, n, word.bytes.begin() + off);
    if (word.tag) {
      word.tag = false;
      tagged_.erase(w);
    }
    done += n;
  }
}

void TaggedMemory::WriteCapability(uint64_t addr, const Capability& cap) {
  Word& word = words_[addr];
  word.bytes = Encode(cap);
  word.tag = cap.tag;
  if (cap.tag)
    tagged_.insert(addr);
  else
    tagged_.erase(addr);
}

Capability TaggedMemory::ReadCapability(uint64_t addr) const {
  auto it = words_.find(addr);
  if (it == words_.end()) return Decode(CapabilityBytes{}, false);
  return Decode(it->second.bytes, it->second.tag);
}

bool TaggedMemory::TagAt(uint64_t addr) const {
  return tagged_.count(AlignDown(addr)) != 0;
}

void TaggedMemory::ClearTag(uint64_t addr) {
  auto it = words_.find(AlignDown(addr));
  if (it == words_.end()) return;
  it->second.tag = false;
  tagged_.erase(it->first);
}

std::string TaggedMemory::Dump() const {
  std::vector<uint64_t> addrs;
  addrs.reserve(words_.size());
  for (const auto& [a, w] : words_) addrs.push_back(a);
  std::sort(addrs.begin(), addrs.end());
  std::string out;
  char line[96];
  for (uint64_t a : addrs) {
    const Word& w = words_.at(a);
    int n = std::snprintf(line, sizeof line, "addr=%010llx tag=%d bytes=",
                          static_cast<unsigned long long>(a), w.tag ? 1 : 0);
    for (uint8_t b : w.bytes)
      n += std::snprintf(line + n, sizeof line - n, "%02x", b);
    out.append(line, n);
    out += '\n';
  }
  return out;
}

uint64_t TaggedMemory::Digest() const {
  std::vector<uint64_t> addrs;
  addrs.reserve(words_.size());
  for (const auto& [a, w] : words_) addrs.push_back(a);
  std::sort(addrs.begin(), addrs.end());
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint64_t a : addrs) {
    const Word& w = words_.at(a);
    h = Fnv1aU64(a, h);
    h = Fnv1a(w.bytes, h);
    h = Fnv1aU64(w.tag, h);
  }
  return h;
}

// --- Pvt --------------------------------------------------------------------

Pvt::Pvt(unsigned color_bits, uint64_t base)
    : base_(base),
      colors_(1u << color_bits),
      bits_(std::max<size_t>(2, (size_t{1} << color_bits) / 64), 0) {}

void Pvt::set(uint32_t color, bool retracted) {
  const uint64_t m = uint64_t{1} << (color & 63);
  if (retracted)
    bits_[color >> 6] |= m;
  else
    bits_[color >> 6] &= ~m;
}

PvtWord Pvt::WordAt(uint64_t word_addr) const {
  const size_t idx = (word_addr - base_) / 16;
  return {bits_[2 * idx], bits_[2 * idx + 1]};
}

std::string Pvt::Dump() const {
  std::string out;
  uint32_t start = 0;
  bool state = retracted(0);
  auto emit = [&](uint32_t lo, uint32_t hi, bool r) {
    out += std::to_string(lo) + "-" + std::to_string(hi) +
           (r ? ":retracted\n" : ":valid\n");
  };
  for (uint32_t c = 1; c < colors_; ++c) {
    const bool r = retracted(c);
    if (r != state) {
      emit(start, c - 1, state);
      start = c;
      state = r;
    }
  }
  emit(start, colors_ - 1, state);
  return out;
}

// --- PvtBuffer --------------------------------------------------------------

PvtBuffer::PvtBuffer(unsigned sets, unsigned ways)
    : sets_(sets), ways_(ways), entries_(size_t{sets} * ways), victim_(sets, 0) {}

std::optional<PvtWord> PvtBuffer::Lookup(uint64_t word_addr) {
  const unsigned set = SetIndex(word_addr);
  for (unsigned w = 0; w < ways_; ++w) {
    const Entry& e = entries_[set * ways_ + w];
    if (e.valid && e.addr == word_addr) {
      ++hits_;
      return e.data;
    }
  }
  ++misses_;
  return std::nullopt;
}

void PvtBuffer::Fill(uint64_t word_addr, const PvtWord& word) {
  const unsigned set = SetIndex(word_addr);
  unsigned& v = victim_[set];
  entries_[set * ways_ + v] = {true, word_addr, word};
  v = (v + 1) % ways_;
}

void PvtBuffer::InvalidateAll() {
  for (Entry& e : entries_) e.valid = false;
  std::fill(victim_.begin(), victim_.end(), 0u);
  ++invalidations_;
}

// --- Machine ----------------------------------------------------------------

Machine::Machine(const MachineConfig& config)
    : config_(config),
      pvt_(config.color_bits, config.pvt_base),
      buffer_(config.pvt_buffer_sets, config.pvt_buffer_ways) {}

std::optional<Fault> Machine::CheckProvenance(uint32_t color) {
  ++pvt_lookups_;
  const uint64_t mapped =
      config_.pvt_mapped_bytes ? config_.pvt_mapped_bytes : pvt_.size_bytes();
  if (color / 8 >= mapped) return Fault{FaultKind::kPvtUnmapped, color};

  const uint64_t word_addr = pvt_.WordAddress(color);
  PvtWord word;
  if (config_.pvt_buffer_enabled) {
    if (auto hit = buffer_.Lookup(word_addr)) {
      word = *hit;
    } else {
      word = pvt_.WordAt(word_addr);
      buffer_.Fill(word_addr, word);
    }
  } else {
    word = pvt_.WordAt(word_addr);
  }
  const unsigned bit = color & 127;
  if ((word[bit >> 6] >> (bit & 63)) & 1)
    return Fault{FaultKind::kProvenanceRetracted, color};
  return std::nullopt;
}

FaultStatus Machine::CheckAccess(const Capability& cap, uint64_t offset,
                                 uint64_t width, AccessKind kind) {
  if (!cap.tag) return Unexpected{Fault{FaultKind::kUntaggedOperand}};
  const OtypeInterpretation interp = Interpretation(cap);
  if (interp.kind == OtypeInterpretation::Kind::kSealed)
    return Unexpected{Fault{FaultKind::kSealedDereference}};

  const PermissionSet& p = cap.perms;
  bool permitted = false;
  switch (kind) {
    case AccessKind::kRead:
      permitted = p.load;
      break;
    case AccessKind::kWrite:
      permitted = p.store;
      break;
    case AccessKind::kReadCap:
      permitted = p.load && p.load_cap;
      break;
    case AccessKind::kWriteCap:
      permitted = p.store && p.store_cap;
      break;
  }
  if (!permitted) return Unexpected{Fault{FaultKind::kPermissionDenied}};

  const uint64_t addr = cap.address + offset;
  const uint64_t end = addr + width;
  if (addr < cap.address || end < addr || addr < cap.base || end > cap.top())
    return Unexpected{Fault{FaultKind::kSpatialOutOfBounds}};

  if (interp.colored() && config_.provenance_checks) {
    if (auto f = CheckProvenance(interp.color)) return Unexpected{*f};
  }
  if (hook_) {
    if (auto f = hook_(cap, addr, width, kind)) return Unexpected{*f};
  }
  return {};
}

FaultOr<std::vector<uint8_t>> Machine::LoadData(const Capability& cap,
                                                uint64_t offset,
                                                uint64_t width) {
  if (auto st = CheckAccess(cap, offset, width, AccessKind::kRead); !st)
    return Unexpected{st.error()};
  std::vector<uint8_t> out(width);
  memory_.Read(cap.address + offset, out);
  return out;
}

FaultStatus Machine::StoreData(const Capability& cap, uint64_t offset,
                               std::span<const uint8_t> bytes) {
  if (auto st = CheckAccess(cap, offset, bytes.size(), AccessKind::kWrite); !st)
    return st;
  memory_.Write(cap.address + offset, bytes);
  return {};
}

FaultStatus Machine::StoreCap(const Capability& auth, uint64_t offset,
                              const Capability& value) {
  const uint64_t addr = auth.address + offset;
  if (auth.tag && addr % kCapabilityWidth != 0)
    return Unexpected{Fault{FaultKind::kSpatialOutOfBounds}};
  if (auto st = CheckAccess(auth, offset, kCapabilityWidth, AccessKind::kWriteCap);
      !st)
    return st;
  if (addr % kCapabilityWidth != 0 || !IsRepresentable(value))
    return Unexpected{Fault{FaultKind::kSpatialOutOfBounds}};
  memory_.WriteCapability(addr, value);
  return {};
}

FaultOr<Capability> Machine::LoadCap(const Capability& auth, uint64_t offset) {
  const uint64_t addr = auth.address + offset;
  if (auth.tag && addr % kCapabilityWidth != 0)
    return Unexpected{Fault{FaultKind::kSpatialOutOfBounds}};
  if (auto st = CheckAccess(auth, offset, kCapabilityWidth, AccessKind::kReadCap);
      !st)
    return Unexpected{st.error()};
  Capability c = memory_.ReadCapability(addr);
  if (c.tag && barrier_ && barrier_(c)) {
    memory_.ClearTag(addr);
    c.tag = false;
  }
  return c;
}

Expected<void, CapError> Machine::PvtSet(uint32_t color, PvbState state) {
  return PvtSetBatch(std::span<const uint32_t>(&color, 1), state);
}

Expected<void, CapError> Machine::PvtSetBatch(std::span<const uint32_t> colors,
                                              PvbState state) {
  for (uint32_t c : colors)
    if (c == 0 || c >= pvt_.colors())
      return Unexpected{CapError::kColorOutOfRange};
  for (uint32_t c : colors) pvt_.set(c, state == PvbState::kRetracted);
  if (!colors.empty()) buffer_.InvalidateAll();
  return {};
}

Machine::CapPredicate Machine::ColoredWith(const ColorPredicate& pred) const {
  return [this, &pred](const Capability& c) {
    const auto i = Interpretation(c);
    return i.colored() && pred(i.color);
  };
}

SweepStats Machine::SweepScan(const ColorPredicate& pred) {
  return SweepCapabilities(ColoredWith(pred));
}

SweepStats Machine::SweepCapabilities(const CapPredicate& pred) {
  uint64_t cursor = 0;
  bool done = false;
  SweepStats s = SweepMemoryWindow(pred, &cursor, UINT64_MAX, &done);
  s += SweepRegisters(pred);
  return s;
}

SweepStats Machine::SweepMemoryWindow(const CapPredicate& pred,
                                      uint64_t* cursor, uint64_t max_words,
                                      bool* done) {
  SweepStats s;
  // tagged_words() is mutated by ClearTag; walk a snapshot of the window.
  const auto& tagged = memory_.tagged_words();
  std::vector<uint64_t> window;
  auto it = tagged.lower_bound(*cursor);
  for (; it != tagged.end() && window.size() < max_words; ++it)
    window.push_back(*it);
  *done = it == tagged.end();
  for (uint64_t addr : window) {
    ++s.visited;
    if (pred(memory_.ReadCapability(addr))) {
      memory_.ClearTag(addr);
      ++s.cleared;
    }
  }
  if (!window.empty()) *cursor = window.back() + kCapabilityWidth;
  return s;
}

SweepStats Machine::SweepRegisters(const CapPredicate& pred) {
  SweepStats s;
  for (Capability& r : regs_) {
    if (!r.tag) continue;
    ++s.visited;
    if (pred(r)) {
      r.tag = false;
      ++s.cleared;
    }
  }
  return s;
}

uint64_t Machine::StateDigest() const {
  uint64_t h = memory_.Digest();
  for (const Capability& r : regs_) {
    h = Fnv1a(Encode(IsRepresentable(r) ? r : Capability{}), h);
    h = Fnv1aU64(r.tag, h);
  }
  return h;
}

}  // namespace picasso
