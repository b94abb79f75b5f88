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

#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace picasso {
namespace {

class MachineTest : public ::testing::Test {
 protected:
  MachineTest() : m_(MachineConfig{}) {}

  // A heap capability over [base, base + len) with the given color.
  Capability Colored(uint64_t base, uint64_t len, uint32_t color) {
    const MachineConfig& c = m_.config();
    Capability auth = Capability::Root(c.heap_base, c.heap_size,
                                       PermissionSet::All());
    auto d = Derive(auth, base, len, PermissionSet::UserHeap(), c.otypeth);
    auto s = SetColor(*d, auth, color, c.otypeth);
    return *s;
  }
  Capability Spill() {
    const MachineConfig& c = m_.config();
    return Capability::Root(c.spill_base, c.spill_size,
                            PermissionSet::UserHeap());
  }
  uint64_t heap() const { return m_.config().heap_base; }

  Machine m_;
};

TEST_F(MachineTest, ColoredValidReadSucceeds) {
  const Capability c = Colored(heap(), 64, 5);
  EXPECT_TRUE(m_.CheckAccess(c, 0, 8, AccessKind::kRead).has_value());
  EXPECT_EQ(m_.pvt_lookups(), 1u);
}

TEST_F(MachineTest, RetractedColorFaults) {
  const Capability c = Colored(heap(), 64, 5);
  ASSERT_TRUE(m_.PvtSet(5, PvbState::kRetracted).has_value());
  auto r = m_.CheckAccess(c, 0, 8, AccessKind::kRead);
  ASSERT_FALSE(r.has_value());
  EXPECT_EQ(r.error(), (Fault{FaultKind::kProvenanceRetracted, 5}));
  ASSERT_TRUE(m_.PvtSet(5, PvbState::kValid).has_value());
  EXPECT_TRUE(m_.CheckAccess(c, 0, 8, AccessKind::kRead).has_value());
}

TEST_F(MachineTest, UncoloredAccessSkipsPvt) {
  const Capability c = Capability::Root(heap(), 64, PermissionSet::UserHeap());
  EXPECT_TRUE(m_.CheckAccess(c, 0, 8, AccessKind::kRead).has_value());
  EXPECT_EQ(m_.pvt_lookups(), 0u);
}

TEST_F(MachineTest, FaultPriorityOrder) {
  Capability c = Colored(heap(), 64, 5);
  ASSERT_TRUE(m_.PvtSet(5, PvbState::kRetracted).has_value());
  c.perms.load = false;
  // Everything wrong at once: untagged wins.
  Capability all = ClearTag(c);
  all.otype = m_.config().otypeth;
  EXPECT_EQ(m_.CheckAccess(all, 100, 8, AccessKind::kRead).error().kind,
            FaultKind::kUntaggedOperand);
  Capability sealed = c;
  sealed.otype = m_.config().otypeth;
  EXPECT_EQ(m_.CheckAccess(sealed, 100, 8, AccessKind::kRead).error().kind,
            FaultKind::kSealedDereference);
  EXPECT_EQ(m_.CheckAccess(c, 100, 8, AccessKind::kRead).error().kind,
            FaultKind::kPermissionDenied);
  c.perms.load = true;
  EXPECT_EQ(m_.CheckAccess(c, 100, 8, AccessKind::kRead).error().kind,
            FaultKind::kSpatialOutOfBounds);
  EXPECT_EQ(m_.CheckAccess(c, 0, 8, AccessKind::kRead).error().kind,
            FaultKind::kProvenanceRetracted);
}

TEST_F(MachineTest, BoundsAllowExactEnd) {
  const Capability c = Colored(heap(), 64, 2);
  EXPECT_TRUE(m_.CheckAccess(c, 56, 8, AccessKind::kRead).has_value());
  EXPECT_FALSE(m_.CheckAccess(c, 57, 8, AccessKind::kRead).has_value());
}

TEST_F(MachineTest, StoreThenLoadData) {
  const Capability c = Colored(heap(), 64, 3);
  const std::vector<uint8_t> bytes = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  ASSERT_TRUE(m_.StoreData(c, 10, bytes).has_value());
  auto got = m_.LoadData(c, 10, bytes.size());
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(*got, bytes);
}

TEST_F(MachineTest, RetractedStoreLeavesMemoryUntouched) {
  const Capability c = Colored(heap(), 64, 3);
  ASSERT_TRUE(m_.StoreData(c, 0, std::vector<uint8_t>(16, 0xaa)).has_value());
  const uint64_t before = m_.memory().Digest();
  ASSERT_TRUE(m_.PvtSet(3, PvbState::kRetracted).has_value());
  auto r = m_.StoreData(c, 0, std::vector<uint8_t>(16, 0x55));
  ASSERT_FALSE(r.has_value());
  EXPECT_EQ(r.error().kind, FaultKind::kProvenanceRetracted);
  EXPECT_EQ(m_.memory().Digest(), before);
}

TEST_F(MachineTest, DataWriteClearsCapabilityTag) {
  const Capability c = Colored(heap(), 64, 3);
  ASSERT_TRUE(m_.StoreCap(Spill(), 0, c).has_value());
  EXPECT_TRUE(m_.memory().TagAt(m_.config().spill_base));
  ASSERT_TRUE(m_.StoreData(Spill(), 4, std::vector<uint8_t>{0}).has_value());
  EXPECT_FALSE(m_.memory().TagAt(m_.config().spill_base));
  auto back = m_.LoadCap(Spill(), 0);
  ASSERT_TRUE(back.has_value());
  EXPECT_FALSE(back->tag);
}

TEST_F(MachineTest, CapabilityRoundTrip) {
  Capability c = Colored(heap() + 32, 48, 1234);
  c.address += 8;
  ASSERT_TRUE(m_.StoreCap(Spill(), 32, c).has_value());
  auto back = m_.LoadCap(Spill(), 32);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, c);
}

TEST_F(MachineTest, RetractedCapabilityMayBeCopied) {
  const Capability c = Colored(heap(), 64, 9);
  ASSERT_TRUE(m_.PvtSet(9, PvbState::kRetracted).has_value());
  ASSERT_TRUE(m_.StoreCap(Spill(), 0, c).has_value());
  EXPECT_TRUE(m_.memory().TagAt(m_.config().spill_base));
}

TEST_F(MachineTest, MisalignedCapStoreIsOutOfBounds) {
  const Capability c = Colored(heap(), 64, 9);
  auto r = m_.StoreCap(Spill(), 8, c);
  ASSERT_FALSE(r.has_value());
  EXPECT_EQ(r.error().kind, FaultKind::kSpatialOutOfBounds);
}

TEST_F(MachineTest, CapStoreNeedsStoreCapPermission) {
  Capability auth = Spill();
  auth.perms.store_cap = false;
  auto r = m_.StoreCap(auth, 0, Colored(heap(), 64, 9));
  ASSERT_FALSE(r.has_value());
  EXPECT_EQ(r.error().kind, FaultKind::kPermissionDenied);
}

TEST_F(MachineTest, PvtSetRejectsOutOfRangeColor) {
  EXPECT_FALSE(m_.PvtSet(0, PvbState::kRetracted).has_value());
  EXPECT_FALSE(m_.PvtSet(m_.config().color_space(), PvbState::kRetracted)
                   .has_value());
}

TEST_F(MachineTest, PvtGeometry) {
  const Pvt& p = m_.pvt();
  EXPECT_EQ(p.size_bytes(), 256u * 1024);
  EXPECT_EQ(p.WordAddress(127), p.base());
  EXPECT_EQ(p.WordAddress(128), p.base() + 16);
  ASSERT_TRUE(m_.PvtSet(130, PvbState::kRetracted).has_value());
  const PvtWord w = p.WordAt(p.base() + 16);
  EXPECT_EQ(w[0], uint64_t{1} << 2);
  EXPECT_EQ(w[1], 0u);
}

TEST_F(MachineTest, SameWordSecondLookupHits) {
  const Capability a = Colored(heap(), 16, 10);
  const Capability b = Colored(heap() + 16, 16, 11);
  ASSERT_TRUE(m_.CheckAccess(a, 0, 8, AccessKind::kRead).has_value());
  ASSERT_TRUE(m_.CheckAccess(b, 0, 8, AccessKind::kRead).has_value());
  EXPECT_EQ(m_.pvt_buffer().misses(), 1u);
  EXPECT_EQ(m_.pvt_buffer().hits(), 1u);
}

TEST_F(MachineTest, PvtWriteFlushesBuffer) {
  const Capability a = Colored(heap(), 16, 10);
  ASSERT_TRUE(m_.CheckAccess(a, 0, 8, AccessKind::kRead).has_value());
  ASSERT_TRUE(m_.PvtSet(500, PvbState::kRetracted).has_value());
  ASSERT_TRUE(m_.CheckAccess(a, 0, 8, AccessKind::kRead).has_value());
  EXPECT_EQ(m_.pvt_buffer().misses(), 2u);
  EXPECT_EQ(m_.pvt_buffer().invalidations(), 1u);
}

TEST(PvtBuffer, RoundRobinWithinSet) {
  PvtBuffer b(16, 4);
  // Word addresses 256 bytes apart share a set.
  const uint64_t stride = 16 * 16;
  for (uint64_t i = 0; i < 4; ++i) b.Fill(i * stride, {i, 0});
  for (uint64_t i = 0; i < 4; ++i) EXPECT_TRUE(b.Lookup(i * stride));
  b.Fill(4 * stride, {4, 0});  // evicts the first fill
  EXPECT_FALSE(b.Lookup(0));
  EXPECT_TRUE(b.Lookup(stride));
  EXPECT_EQ(b.SetIndex(stride), 0u);
  EXPECT_EQ(b.SetIndex(16), 1u);
  EXPECT_EQ(b.capacity_words() * 128, 8192u);
}

TEST_F(MachineTest, SweepClearsEveryCopy) {
  const Capability c = Colored(heap(), 64, 42);
  for (uint64_t s = 0; s < 3; ++s)
    ASSERT_TRUE(m_.StoreCap(Spill(), s * 16, c).has_value());
  m_.reg(4) = c;
  m_.reg(5) = Colored(heap() + 64, 64, 43);
  const SweepStats st = m_.SweepScan([](uint32_t col) { return col == 42; });
  EXPECT_EQ(st.cleared, 4u);
  EXPECT_EQ(st.visited, 5u);
  EXPECT_FALSE(m_.reg(4).tag);
  EXPECT_TRUE(m_.reg(5).tag);
  EXPECT_TRUE(m_.memory().tagged_words().empty());
}

TEST_F(MachineTest, SweepWithEmptyPredicate) {
  m_.reg(1) = Colored(heap(), 64, 42);
  const uint64_t before = m_.StateDigest();
  EXPECT_EQ(m_.SweepScan([](uint32_t) { return false; }).cleared, 0u);
  EXPECT_EQ(m_.SweepScan([](uint32_t c) { return c == 999; }).cleared, 0u);
  EXPECT_EQ(m_.StateDigest(), before);
}

TEST_F(MachineTest, WindowedSweepCoversMemoryInOrder) {
  for (uint64_t s = 0; s < 10; ++s)
    ASSERT_TRUE(
        m_.StoreCap(Spill(), s * 16, Colored(heap(), 64, 7)).has_value());
  uint64_t cursor = 0;
  bool done = false;
  uint64_t cleared = 0;
  int steps = 0;
  while (!done) {
    cleared += m_.SweepMemoryWindow([](const Capability&) { return true; },
                                    &cursor, 3, &done)
                   .cleared;
    ++steps;
  }
  EXPECT_EQ(cleared, 10u);
  EXPECT_GE(steps, 4);
}

TEST_F(MachineTest, LoadBarrierStripsMatchingTags) {
  ASSERT_TRUE(m_.StoreCap(Spill(), 0, Colored(heap(), 64, 7)).has_value());
  m_.set_load_barrier([](const Capability& c) { return c.otype == 7; });
  auto c = m_.LoadCap(Spill(), 0);
  ASSERT_TRUE(c.has_value());
  EXPECT_FALSE(c->tag);
}

TEST(MachineConfigTest, ShrunkPvtRaisesUnmapped) {
  MachineConfig cfg;
  cfg.pvt_mapped_bytes = 16;  // colors 0..127
  Machine m(cfg);
  Capability auth =
      Capability::Root(cfg.heap_base, cfg.heap_size, PermissionSet::All());
  auto ok = SetColor(auth, auth, 100, cfg.otypeth);
  auto far = SetColor(auth, auth, 5000, cfg.otypeth);
  EXPECT_TRUE(m.CheckAccess(*ok, 0, 8, AccessKind::kRead).has_value());
  EXPECT_EQ(m.CheckAccess(*far, 0, 8, AccessKind::kRead).error().kind,
            FaultKind::kPvtUnmapped);
}

TEST_F(MachineTest, DumpFormats) {
  ASSERT_TRUE(m_.StoreCap(Spill(), 0, Colored(heap(), 64, 7)).has_value());
  const std::string d = m_.memory().Dump();
  EXPECT_EQ(d.rfind("addr=0002000000 tag=1 bytes=", 0), 0u) << d;
  EXPECT_EQ(d.size(), std::string("addr=0002000000 tag=1 bytes=").size() + 33);
  ASSERT_TRUE(m_.PvtSet(3, PvbState::kRetracted).has_value());
  ASSERT_TRUE(m_.PvtSet(4, PvbState::kRetracted).has_value());
  EXPECT_EQ(m_.pvt().Dump(),
            "0-2:valid\n3-4:retracted\n5-2097151:valid\n");
}

// Buffer on and off must produce identical fault sequences and memory.
TEST(BufferTransparency, RandomAccessStreams) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    MachineConfig on_cfg = MachineConfig::WithColorBits(12);
    MachineConfig off_cfg = on_cfg;
    off_cfg.pvt_buffer_enabled = false;
    Machine on(on_cfg), off(off_cfg);
    std::mt19937_64 rng(seed);
    Capability auth = Capability::Root(on_cfg.heap_base, 1 << 16,
                                       PermissionSet::All());
    std::vector<Fault> f_on, f_off;
    for (int i = 0; i < 3000; ++i) {
      const uint32_t color = 1 + rng() % 4000;
      const uint64_t op = rng() % 4;
      if (op == 0) {
        const auto st = rng() & 1 ? PvbState::kRetracted : PvbState::kValid;
        ASSERT_TRUE(on.PvtSet(color, st).has_value());
        ASSERT_TRUE(off.PvtSet(color, st).has_value());
        continue;
      }
      auto cap = SetColor(auth, auth, color, on_cfg.otypeth);
      const uint64_t off_bytes = (rng() % 64) * 16;
      const std::vector<uint8_t> data(8, uint8_t(i));
      auto a = on.StoreData(*cap, off_bytes, data);
      auto b = off.StoreData(*cap, off_bytes, data);
      f_on.push_back(a ? Fault{FaultKind::kMalformedFree} : a.error());
      f_off.push_back(b ? Fault{FaultKind::kMalformedFree} : b.error());
    }
    EXPECT_EQ(f_on, f_off);
    EXPECT_EQ(on.StateDigest(), off.StateDigest());
    EXPECT_GT(on.pvt_buffer().hits(), 0u);
    EXPECT_EQ(off.pvt_buffer().hits(), 0u);
  }
}

}  // namespace
}  // namespace picasso
