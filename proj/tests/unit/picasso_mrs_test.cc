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

#include "core/picasso_mrs.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

namespace picasso {
namespace {

class MrsTest : public ::testing::Test {
 protected:
  void Make(unsigned color_bits, double threshold = 0.01,
            SweepMode sweep = {}) {
    RunConfig rc;
    rc.color_bits = color_bits;
    machine_ = std::make_unique<Machine>(rc.ToMachineConfig());
    mrs_ = std::make_unique<PicassoMrs>(*machine_,
                                        MrsOptions{threshold, sweep});
  }
  uint32_t ColorOf(const Capability& c) {
    return machine_->Interpretation(c).color;
  }
  // claimed(unr) = live + pending + in-flight targets
  void ExpectConservation() {
    const size_t targets = mrs_->job() ? mrs_->job()->target_colors.size() : 0;
    EXPECT_EQ(mrs_->unr().population(),
              mrs_->live_allocations() + mrs_->pending_count() + targets);
  }
  Capability Spill() {
    const MachineConfig& c = machine_->config();
    return Capability::Root(c.spill_base, c.spill_size,
                            PermissionSet::UserHeap());
  }

  std::unique_ptr<Machine> machine_;
  std::unique_ptr<PicassoMrs> mrs_;
};

TEST_F(MrsTest, FirstAllocation) {
  Make(21);
  auto c = mrs_->Malloc(20);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->length, 32u);
  EXPECT_EQ(ColorOf(*c), 1u);
  EXPECT_FALSE(c->perms.sw_vmem);
  EXPECT_TRUE(c->perms.load && c->perms.store);
  EXPECT_EQ(c->address % 16, 0u);
}

TEST_F(MrsTest, LiveAllocationsGetDistinctColors) {
  Make(21);
  auto a = mrs_->Malloc(32);
  auto b = mrs_->Malloc(32);
  EXPECT_NE(ColorOf(*a), ColorOf(*b));
}

TEST_F(MrsTest, ImmediateReuseWithNewColor) {
  Make(21);
  auto a = mrs_->Malloc(64);
  ASSERT_TRUE(mrs_->Free(*a).has_value());
  auto b = mrs_->Malloc(64);
  EXPECT_EQ(b->base, a->base);
  EXPECT_NE(ColorOf(*b), ColorOf(*a));
  EXPECT_EQ(machine_->CheckAccess(*a, 0, 8, AccessKind::kRead).error().kind,
            FaultKind::kProvenanceRetracted);
  EXPECT_TRUE(machine_->CheckAccess(*b, 0, 8, AccessKind::kRead).has_value());
}

TEST_F(MrsTest, DoubleFreeThroughCopy) {
  Make(21);
  auto a = mrs_->Malloc(64);
  const Capability copy = *a;
  ASSERT_TRUE(mrs_->Free(*a).has_value());
  const uint64_t pending = mrs_->pending_count();
  auto r = mrs_->Free(copy);
  ASSERT_FALSE(r.has_value());
  EXPECT_EQ(r.error().kind, FaultKind::kDoubleFree);
  EXPECT_EQ(mrs_->pending_count(), pending);
}

TEST_F(MrsTest, MalformedFrees) {
  Make(21);
  auto a = mrs_->Malloc(64);
  const MachineConfig& mc = machine_->config();
  Capability plain = Capability::Root(mc.heap_base, 64, PermissionSet::UserHeap());
  EXPECT_EQ(mrs_->Free(plain).error().kind, FaultKind::kMalformedFree);
  EXPECT_EQ(mrs_->Free(ClearTag(*a)).error().kind, FaultKind::kMalformedFree);
  EXPECT_EQ(mrs_->Free(WithAddress(*a, a->base + 16)).error().kind,
            FaultKind::kMalformedFree);
  Capability narrowed = *Derive(*a, a->base + 16, 16, a->perms, mc.otypeth);
  narrowed.address = a->base;
  EXPECT_EQ(mrs_->Free(narrowed).error().kind, FaultKind::kMalformedFree);
  EXPECT_TRUE(mrs_->Free(*a).has_value());
}

TEST_F(MrsTest, ThresholdOnScaledPool) {
  // Pool 1023, threshold ceil(10.23) = 11 unclaimed.
  Make(10);
  EXPECT_EQ(mrs_->pool(), 1023u);
  EXPECT_EQ(mrs_->threshold_count(),
            static_cast<uint64_t>(std::ceil(1023 * 0.01)));
  EXPECT_FALSE(mrs_->MaybeRevoke());
  std::vector<Capability> caps;
  for (int i = 0; i < 1013; ++i) caps.push_back(*mrs_->Malloc(16));
  EXPECT_EQ(mrs_->counters().revocations, 0u);
  EXPECT_EQ(mrs_->unr().available(), 10u);
  ASSERT_TRUE(mrs_->Free(caps[0]).has_value());
  EXPECT_TRUE(mrs_->MaybeRevoke());
  EXPECT_EQ(mrs_->counters().revocations, 1u);
  EXPECT_EQ(mrs_->unr().available(), 11u);
  ExpectConservation();
}

TEST_F(MrsTest, AllocationCrossingThresholdTriggers) {
  Make(10);
  for (int i = 0; i < 1013; ++i) ASSERT_TRUE(mrs_->Malloc(16).has_value());
  EXPECT_EQ(mrs_->counters().revocations, 0u);
  ASSERT_TRUE(mrs_->Malloc(16).has_value());
  EXPECT_EQ(mrs_->counters().revocations, 1u);
}

TEST_F(MrsTest, SecondTriggerWhileScanningIsRefused) {
  Make(10, 0.01, SweepMode{true, 4});
  std::vector<Capability> caps;
  for (int i = 0; i < 1013; ++i) caps.push_back(*mrs_->Malloc(16));
  ASSERT_TRUE(mrs_->Free(caps[0]).has_value());
  EXPECT_TRUE(mrs_->MaybeRevoke());
  ASSERT_TRUE(mrs_->job().has_value());
  EXPECT_FALSE(mrs_->MaybeRevoke());
  ExpectConservation();
}

TEST_F(MrsTest, JobOverOneColorEndToEnd) {
  // Pool 15, threshold 15: any claimed color arms the trigger.
  Make(4, 0.999);
  auto a = mrs_->Malloc(32);
  const uint32_t c = ColorOf(*a);
  ASSERT_TRUE(machine_->StoreCap(Spill(), 0, *a).has_value());
  ASSERT_TRUE(mrs_->Free(*a).has_value());
  EXPECT_TRUE(machine_->PvbRetracted(c));
  EXPECT_TRUE(mrs_->unr().IsClaimed(c));
  ASSERT_TRUE(mrs_->MaybeRevoke());
  // Sync mode: already swept and finalized.
  EXPECT_FALSE(mrs_->job().has_value());
  EXPECT_EQ(mrs_->counters().cleared_tags, 1u);
  EXPECT_FALSE(machine_->memory().TagAt(machine_->config().spill_base));
  EXPECT_FALSE(machine_->PvbRetracted(c));
  EXPECT_FALSE(mrs_->unr().IsClaimed(c));
  ExpectConservation();
}

TEST_F(MrsTest, ColorsRetractedAfterSnapshotStayPending) {
  // Pool 15, threshold 14: the third claimed color arms the trigger.
  Make(4, 0.9, SweepMode{true, 1});
  auto a = mrs_->Malloc(32);
  auto b = mrs_->Malloc(32);
  ASSERT_TRUE(mrs_->Free(*a).has_value());
  ASSERT_TRUE(mrs_->MaybeRevoke());
  ASSERT_TRUE(mrs_->job().has_value());
  EXPECT_EQ(mrs_->job()->target_colors, std::vector<uint32_t>{ColorOf(*a)});
  ASSERT_TRUE(mrs_->Free(*b).has_value());
  ExpectConservation();
  while (!mrs_->RevocationStep(1)) {
  }
  EXPECT_EQ(mrs_->RevocationFinalize(), 1u);
  EXPECT_FALSE(machine_->PvbRetracted(ColorOf(*a)));
  EXPECT_TRUE(machine_->PvbRetracted(ColorOf(*b)));
  EXPECT_EQ(mrs_->retracted_pending(), std::vector<uint32_t>{ColorOf(*b)});
  ExpectConservation();
}

TEST_F(MrsTest, EmptyJobReclaimsNothing) {
  Make(4, 0.9, SweepMode{true, 8});
  ASSERT_TRUE(mrs_->Malloc(16).has_value());
  ASSERT_TRUE(mrs_->Malloc(16).has_value());
  ASSERT_TRUE(mrs_->MaybeRevoke());
  EXPECT_TRUE(mrs_->job()->target_colors.empty());
  EXPECT_TRUE(mrs_->RevocationStep(UINT64_MAX));
  EXPECT_EQ(mrs_->RevocationFinalize(), 0u);
}

TEST_F(MrsTest, JobDoublesPvtAccounting) {
  Make(4, 0.999, SweepMode{true, 1});
  ASSERT_TRUE(mrs_->Malloc(16).has_value());
  const uint64_t pvt = machine_->pvt().size_bytes();
  const uint64_t idle = mrs_->MetadataBytes();
  ASSERT_TRUE(mrs_->MaybeRevoke());
  EXPECT_EQ(mrs_->MetadataBytes(), idle + pvt);
}

TEST_F(MrsTest, ColorIsNotReusedBeforeSweep) {
  Make(6);  // 63 colors, threshold 1
  std::vector<uint32_t> freed;
  for (int i = 0; i < 40; ++i) {
    auto c = mrs_->Malloc(16);
    ASSERT_TRUE(c.has_value());
    for (uint32_t f : freed) ASSERT_NE(ColorOf(*c), f);
    ASSERT_TRUE(mrs_->Free(*c).has_value());
    freed.push_back(ColorOf(*c));
  }
  ExpectConservation();
}

TEST_F(MrsTest, ExhaustionWithoutReclaimableColors) {
  Make(4);  // 15 colors
  for (int i = 0; i < 15; ++i) ASSERT_TRUE(mrs_->Malloc(16).has_value());
  auto r = mrs_->Malloc(16);
  ASSERT_FALSE(r.has_value());
  EXPECT_EQ(r.error(), AllocError::kExhausted);
}

TEST_F(MrsTest, OutOfMemory) {
  Make(10);
  auto r = mrs_->Malloc(64ull << 20);
  ASSERT_FALSE(r.has_value());
  EXPECT_EQ(r.error(), AllocError::kOutOfMemory);
  EXPECT_EQ(mrs_->unr().population(), 0u);
}

TEST_F(MrsTest, CallocZeroes) {
  Make(10);
  auto a = mrs_->Malloc(32);
  ASSERT_TRUE(machine_->StoreData(*a, 0, std::vector<uint8_t>(32, 0xff))
                  .has_value());
  ASSERT_TRUE(mrs_->Free(*a).has_value());
  auto b = mrs_->Calloc(32);
  ASSERT_EQ(b->base, a->base);
  EXPECT_EQ(*machine_->LoadData(*b, 0, 32), std::vector<uint8_t>(32, 0));
}

// Independent counter model: unclaimed colors fall by one per allocation
// and a sync sweep brings claimed back down to the live count.
uint64_t PredictRevocations(uint64_t pool, double f, uint64_t pairs,
                            uint64_t live) {
  const uint64_t threshold = static_cast<uint64_t>(std::ceil(f * pool - 1e-9));
  uint64_t claimed = 0, cur_live = 0, revocations = 0;
  auto malloc_ = [&] {
    if (pool - claimed < threshold) {
      ++revocations;
      claimed = cur_live;
    }
    ++claimed;
    ++cur_live;
  };
  for (uint64_t i = 0; i < live; ++i) malloc_();
  for (uint64_t i = live; i < pairs; ++i) {
    --cur_live;
    malloc_();
  }
  return revocations;
}

TEST_F(MrsTest, RevocationCountMatchesCounterModel) {
  for (unsigned bits : {8u, 10u, 12u}) {
    for (uint64_t live : {1u, 5u, 20u}) {
      Make(bits);
      std::vector<Capability> set;
      for (uint64_t i = 0; i < live; ++i) set.push_back(*mrs_->Malloc(32));
      const uint64_t pairs = 20000;
      for (uint64_t i = live; i < pairs; ++i) {
        Capability& c = set[i % live];
        ASSERT_TRUE(mrs_->Free(c).has_value());
        auto n = mrs_->Malloc(32);
        ASSERT_TRUE(n.has_value());
        c = *n;
      }
      EXPECT_EQ(mrs_->counters().revocations,
                PredictRevocations((1u << bits) - 1, 0.01, pairs, live))
          << bits << " bits, live " << live;
      ExpectConservation();
    }
  }
}

}  // namespace
}  // namespace picasso
