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

#ifndef PICASSO_CORE_TRACE_H_
#define PICASSO_CORE_TRACE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/expected.h"
#include "core/tagged_machine.h"

namespace picasso {

// Trace text, one op per line; '#' starts a comment:
//
//   malloc  rN <size>          global  rN <size>
//   free    rN                 copy    rD rS
//   read    rN <off> <width>   incaddr rD rS <signed off>
//   write   rN <off> <width>   spill   rN <slot>
//   reload  rN <slot>
//
// Any op may end with one expectation: !ok, !fault=<FaultKind>, !oom or
// !exhausted. Numbers are decimal or 0x-prefixed hex.
enum class OpKind : uint8_t {
  kMalloc,
  kFree,
  kRead,
  kWrite,
  kCopy,
  kSpill,
  kReload,
  kIncAddr,
  kGlobal,
};

std::string_view ToString(OpKind k);

inline constexpr unsigned kTraceRegisters = 32;
inline constexpr uint64_t kMaxAccessWidth = 1 << 16;

// Result of one op as seen by the interpreter.
struct Outcome {
  enum class Kind : uint8_t { kOk, kFault, kOom, kExhausted };
  Kind kind = Kind::kOk;
  FaultKind fault = FaultKind::kSpatialOutOfBounds;  // for kFault

  static Outcome Ok() { return {}; }
  static Outcome Of(FaultKind f) { return {Kind::kFault, f}; }

  friend bool operator==(const Outcome& a, const Outcome& b) {
    return a.kind == b.kind && (a.kind != Kind::kFault || a.fault == b.fault);
  }
};

// "ok", "fault=<Kind>", "oom", "exhausted"
std::string ToString(const Outcome& o);

struct TraceOp {
  OpKind kind = OpKind::kMalloc;
  uint8_t a = 0;   // destination / operand register
  uint8_t b = 0;   // source register (copy, incaddr)
  uint64_t x = 0;  // size, offset, slot
  uint64_t y = 0;  // width
  std::optional<Outcome> expect;
  uint32_t line = 0;

  static TraceOp Make(OpKind k, unsigned a, unsigned b = 0, uint64_t x = 0,
                      uint64_t y = 0) {
    TraceOp op;
    op.kind = k;
    op.a = uint8_t(a);
    op.b = uint8_t(b);
    op.x = x;
    op.y = y;
    return op;
  }
  static TraceOp Malloc(unsigned r, uint64_t size) {
    return Make(OpKind::kMalloc, r, 0, size);
  }
  static TraceOp Free(unsigned r) { return Make(OpKind::kFree, r); }
  static TraceOp Read(unsigned r, uint64_t off, uint64_t w) {
    return Make(OpKind::kRead, r, 0, off, w);
  }
  static TraceOp Write(unsigned r, uint64_t off, uint64_t w) {
    return Make(OpKind::kWrite, r, 0, off, w);
  }
  static TraceOp Copy(unsigned d, unsigned s) {
    return Make(OpKind::kCopy, d, s);
  }
  static TraceOp Spill(unsigned r, uint64_t slot) {
    return Make(OpKind::kSpill, r, 0, slot);
  }
  static TraceOp Reload(unsigned r, uint64_t slot) {
    return Make(OpKind::kReload, r, 0, slot);
  }
  static TraceOp IncAddr(unsigned d, unsigned s, int64_t off) {
    return Make(OpKind::kIncAddr, d, s, uint64_t(off));
  }
  static TraceOp Global(unsigned r, uint64_t size) {
    return Make(OpKind::kGlobal, r, 0, size);
  }
  TraceOp& Expect(Outcome o) {
    expect = o;
    return *this;
  }
};

using Trace = std::vector<TraceOp>;

struct ParseError {
  uint32_t line = 0;
  uint32_t column = 0;  // 1-based
  std::string reason;

  std::string ToString() const;
};

Expected<Trace, ParseError> ParseTrace(std::string_view text);
std::string FormatOp(const TraceOp& op);
std::string FormatTrace(const Trace& trace);

// A restartable stream of ops. Large generated workloads are produced on
// the fly instead of being materialized.
class OpSource {
 public:
  virtual ~OpSource() = default;
  virtual std::optional<TraceOp> Next() = 0;
  // A fresh source positioned at the first op.
  virtual std::unique_ptr<OpSource> Clone() const = 0;
};

class TraceSource : public OpSource {
 public:
  explicit TraceSource(Trace trace)
      : trace_(std::make_shared<const Trace>(std::move(trace))) {}

  std::optional<TraceOp> Next() override {
    if (pos_ >= trace_->size()) return std::nullopt;
    return (*trace_)[pos_++];
  }
  std::unique_ptr<OpSource> Clone() const override {
    return std::unique_ptr<OpSource>(new TraceSource(trace_));
  }

 private:
  explicit TraceSource(std::shared_ptr<const Trace> t) : trace_(std::move(t)) {}

  std::shared_ptr<const Trace> trace_;
  size_t pos_ = 0;
};

// Drains a source into a vector.
Trace Collect(OpSource& source);

}  // namespace picasso

#endif  // PICASSO_CORE_TRACE_H_
