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

#include "core/trace.h"

#include <gtest/gtest.h>

namespace picasso {
namespace {

TEST(TraceParse, AllOps) {
  auto t = ParseTrace(
      "# comment\n"
      "malloc r1 64\n"
      "write r1 0 8   # trailing\n"
      "\n"
      "read r1 0x10 4 !ok\n"
      "copy r2 r1\n"
      "incaddr r3 r2 -16\n"
      "spill r1 3\n"
      "reload r4 3\n"
      "global r5 32\n"
      "free r1\n"
      "read r2 0 8 !fault=ProvenanceRetracted\n");
  ASSERT_TRUE(t.has_value()) << t.error().ToString();
  ASSERT_EQ(t->size(), 10u);
  EXPECT_EQ((*t)[0].kind, OpKind::kMalloc);
  EXPECT_EQ((*t)[0].a, 1);
  EXPECT_EQ((*t)[0].x, 64u);
  EXPECT_EQ((*t)[0].line, 2u);
  EXPECT_EQ((*t)[2].x, 16u);
  EXPECT_EQ(*(*t)[2].expect, Outcome::Ok());
  EXPECT_EQ((*t)[3].a, 2);
  EXPECT_EQ((*t)[3].b, 1);
  EXPECT_EQ(static_cast<int64_t>((*t)[4].x), -16);
  EXPECT_EQ((*t)[5].kind, OpKind::kSpill);
  EXPECT_EQ((*t)[7].kind, OpKind::kGlobal);
  EXPECT_EQ(*(*t)[9].expect, Outcome::Of(FaultKind::kProvenanceRetracted));
}

TEST(TraceParse, Expectations) {
  auto t = ParseTrace("malloc r1 8 !oom\nmalloc r2 8 !exhausted\n");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ((*t)[0].expect->kind, Outcome::Kind::kOom);
  EXPECT_EQ((*t)[1].expect->kind, Outcome::Kind::kExhausted);
}

TEST(TraceParse, BadRegisterReportsLineAndColumn) {
  auto t = ParseTrace("malloc r99 8\n");
  ASSERT_FALSE(t.has_value());
  EXPECT_EQ(t.error().line, 1u);
  EXPECT_EQ(t.error().column, 8u);
  EXPECT_EQ(t.error().ToString(), "line 1, column 8: register must be r0..r31");
}

TEST(TraceParse, Errors) {
  struct Case {
    const char* text;
    uint32_t line, column;
  };
  const Case cases[] = {
      {"frob r1\n", 1, 1},
      {"malloc r1\n", 1, 10},
      {"malloc r1 8 9\n", 1, 13},
      {"\nmalloc r1 0\n", 2, 11},
      {"read r1 0 0\n", 1, 11},
      {"read r1 0 65537\n", 1, 11},
      {"read r1 x 8\n", 1, 9},
      {"free r1 !fault=Nope\n", 1, 9},
      {"  !ok\n", 1, 1},
  };
  for (const Case& c : cases) {
    auto t = ParseTrace(c.text);
    ASSERT_FALSE(t.has_value()) << c.text;
    EXPECT_EQ(t.error().line, c.line) << c.text;
    EXPECT_EQ(t.error().column, c.column) << c.text;
  }
}

TEST(TraceFormat, RoundTrip) {
  Trace t{TraceOp::Malloc(1, 64), TraceOp::Write(1, 0, 8),
          TraceOp::IncAddr(2, 1, -8), TraceOp::Spill(1, 7),
          TraceOp::Reload(3, 7), TraceOp::Global(4, 16),
          TraceOp::Free(1).Expect(Outcome::Of(FaultKind::kDoubleFree)),
          TraceOp::Malloc(5, 8).Expect(Outcome{Outcome::Kind::kOom, {}})};
  auto back = ParseTrace(FormatTrace(t));
  ASSERT_TRUE(back.has_value()) << back.error().ToString();
  ASSERT_EQ(back->size(), t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(FormatOp((*back)[i]), FormatOp(t[i]));
    EXPECT_EQ((*back)[i].expect.has_value(), t[i].expect.has_value());
  }
  EXPECT_EQ(FormatTrace(*back), FormatTrace(t));
}

TEST(TraceSourceTest, CloneRestarts) {
  TraceSource s(Trace{TraceOp::Malloc(1, 8), TraceOp::Free(1)});
  ASSERT_TRUE(s.Next().has_value());
  auto c = s.Clone();
  EXPECT_EQ(Collect(*c).size(), 2u);
  EXPECT_EQ(Collect(s).size(), 1u);
}

}  // namespace
}  // namespace picasso
