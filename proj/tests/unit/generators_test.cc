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

#include "core/generators.h"

#include <set>

#include <gtest/gtest.h>

namespace picasso {
namespace {

uint64_t Count(const Trace& t, OpKind k) {
  uint64_t n = 0;
  for (const TraceOp& op : t) n += op.kind == k;
  return n;
}

TEST(Churn, ExactPairCountAndDeterminism) {
  ChurnParams p;
  p.pairs = 500;
  p.live = 20;
  p.sizes = {32, 64};
  p.seed = 7;
  ChurnSource a(p);
  const Trace t = Collect(a);
  EXPECT_EQ(Count(t, OpKind::kMalloc), 500u);
  EXPECT_EQ(Count(t, OpKind::kFree), 500u);
  ChurnSource b(p);
  EXPECT_EQ(FormatTrace(Collect(b)), FormatTrace(t));
  auto c = a.Clone();
  EXPECT_EQ(FormatTrace(Collect(*c)), FormatTrace(t));
  for (const TraceOp& op : t) {
    if (op.kind == OpKind::kMalloc) {
      EXPECT_TRUE(op.x == 32 || op.x == 64);
    }
  }
}

TEST(Churn, SeedChangesTrace) {
  ChurnParams p;
  p.pairs = 200;
  p.sizes = {16, 32, 48};
  ChurnSource a(p);
  p.seed = 2;
  ChurnSource b(p);
  EXPECT_NE(FormatTrace(Collect(a)), FormatTrace(Collect(b)));
}

TEST(Random, Deterministic) {
  RandomParams p;
  p.ops = 400;
  p.seed = 11;
  RandomSource a(p), b(p);
  const Trace t = Collect(a);
  EXPECT_GE(t.size(), 400u);
  EXPECT_EQ(FormatTrace(Collect(b)), FormatTrace(t));
  for (const TraceOp& op : t) EXPECT_LT(op.a, RandomSource::kRegs);
}

TEST(Locality, Shape) {
  const Trace t = GenLocality(LocalityParams{29, 2, 1});
  EXPECT_EQ(Count(t, OpKind::kMalloc), 29u);
  EXPECT_EQ(Count(t, OpKind::kFree), 29u);
  EXPECT_GT(Count(t, OpKind::kRead), 29u * 2);
}

TEST(Corpus, PairsDifferOnlyInTheLastOp) {
  const auto corpus = GenCorpus();
  EXPECT_GE(corpus.size(), 40u);
  std::set<std::string> names;
  for (const CorpusCase& c : corpus) {
    EXPECT_TRUE(names.insert(c.name).second) << c.name;
    EXPECT_EQ(c.offending_op + 1, c.trace.size()) << c.name;
  }
  for (const CorpusCase& bad : corpus) {
    if (!bad.bad) continue;
    const std::string good_name =
        bad.name.substr(0, bad.name.rfind('/')) + "/good";
    const CorpusCase* good = nullptr;
    for (const CorpusCase& c : corpus)
      if (c.name == good_name) good = &c;
    ASSERT_NE(good, nullptr) << bad.name;
    ASSERT_EQ(good->trace.size(), bad.trace.size());
    for (size_t i = 0; i + 1 < bad.trace.size(); ++i)
      EXPECT_EQ(FormatOp(good->trace[i]), FormatOp(bad.trace[i])) << bad.name;
    EXPECT_NE(FormatOp(good->trace.back()), FormatOp(bad.trace.back()));
  }
}

TEST(Corpus, CoversBothCategoriesAndSizes) {
  std::set<std::pair<CorpusCase::Category, uint64_t>> seen;
  for (const CorpusCase& c : GenCorpus())
    if (c.bad) seen.insert({c.category, c.size});
  EXPECT_EQ(seen.size(), 4u);
}

TEST(MakeGeneratorTest, Specs) {
  auto g = MakeGenerator("churn:n=50,live=5,sizes=32/64,seed=3", 1);
  ASSERT_TRUE(g.has_value()) << g.error();
  EXPECT_EQ(Count(Collect(**g), OpKind::kFree), 50u);
  EXPECT_TRUE(MakeGenerator("random:n=10,uaf=0.1,df=0", 1).has_value());
  EXPECT_TRUE(MakeGenerator("locality:allocs=4,passes=1", 1).has_value());
  EXPECT_FALSE(MakeGenerator("churn:bogus=1", 1).has_value());
  EXPECT_FALSE(MakeGenerator("churn:n=x", 1).has_value());
  EXPECT_FALSE(MakeGenerator("random:uaf=2", 1).has_value());
  EXPECT_FALSE(MakeGenerator("nope", 1).has_value());
}

TEST(MakeGeneratorTest, SpecSeedWins) {
  auto a = MakeGenerator("random:n=100,seed=5", 1);
  auto b = MakeGenerator("random:n=100", 5);
  auto c = MakeGenerator("random:n=100,seed=5", 9);
  const std::string want = FormatTrace(Collect(**a));
  EXPECT_EQ(FormatTrace(Collect(**b)), want);
  EXPECT_EQ(FormatTrace(Collect(**c)), want);
}

}  // namespace
}  // namespace picasso
