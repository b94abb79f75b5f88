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

#include <charconv>
#include <cstdio>

namespace picasso {
namespace {

struct OpSpec {
  OpKind kind;
  std::string_view name;
  // Operand shapes: 'r' register, 'u' unsigned, 's' signed.
  std::string_view operands;
};

constexpr OpSpec kOps[] = {
    {OpKind::kMalloc, "malloc", "ru"},   {OpKind::kFree, "free", "r"},
    {OpKind::kRead, "read", "ruu"},      {OpKind::kWrite, "write", "ruu"},
    {OpKind::kCopy, "copy", "rr"},       {OpKind::kSpill, "spill", "ru"},
    {OpKind::kReload, "reload", "ru"},   {OpKind::kIncAddr, "incaddr", "rrs"},
    {OpKind::kGlobal, "global", "ru"},
};

const OpSpec& SpecOf(OpKind k) {
  for (const auto& s : kOps)
    if (s.kind == k) return s;
  return kOps[0];
}

struct Token {
  std::string_view text;
  uint32_t column;
};

std::vector<Token> Tokenize(std::string_view line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r'))
      ++i;
    if (i >= line.size() || line[i] == '#') break;
    const size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r' && line[i] != '#')
      ++i;
    out.push_back({line.substr(start, i - start), uint32_t(start + 1)});
  }
  return out;
}

std::optional<uint64_t> ParseUnsigned(std::string_view s) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  if (s.empty()) return std::nullopt;
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int64_t> ParseSigned(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  auto u = ParseUnsigned(s);
  if (!u || *u > (uint64_t{1} << 62)) return std::nullopt;
  return neg ? -int64_t(*u) : int64_t(*u);
}

std::optional<unsigned> ParseRegister(std::string_view s) {
  if (s.size() < 2 || s[0] != 'r') return std::nullopt;
  auto v = ParseUnsigned(s.substr(1));
  if (!v || *v >= kTraceRegisters || (s[1] == '0' && s.size() > 2))
    return std::nullopt;
  return unsigned(*v);
}

std::optional<Outcome> ParseExpectation(std::string_view s) {
  if (s == "ok") return Outcome::Ok();
  if (s == "oom") return Outcome{Outcome::Kind::kOom};
  if (s == "exhausted") return Outcome{Outcome::Kind::kExhausted};
  constexpr std::string_view kFault = "fault=";
  if (s.substr(0, kFault.size()) == kFault) {
    if (auto k = ParseFaultKind(s.substr(kFault.size())))
      return Outcome::Of(*k);
  }
  return std::nullopt;
}

}  // namespace

std::string_view ToString(OpKind k) { return SpecOf(k).name; }

std::string ToString(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::kOk:
      return "ok";
    case Outcome::Kind::kFault:
      return "fault=" + std::string(ToString(o.fault));
    case Outcome::Kind::kOom:
      return "oom";
    case Outcome::Kind::kExhausted:
      return "exhausted";
  }
  return "?";
}

std::string ParseError::ToString() const {
  return "line " + std::to_string(line) + ", column " +
         std::to_string(column) + ": " + reason;
}

Expected<Trace, ParseError> ParseTrace(std::string_view text) {
  Trace trace;
  uint32_t lineno = 0;
  while (!text.empty() || lineno == 0) {
    ++lineno;
    const size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    auto fail = [&](uint32_t col, std::string why) {
      return Unexpected{ParseError{lineno, col, std::move(why)}};
    };

    std::vector<Token> toks = Tokenize(line);
    if (toks.empty()) {
      if (text.empty()) break;
      continue;
    }

    TraceOp op;
    op.line = lineno;
    if (toks.back().text[0] == '!') {
      auto e = ParseExpectation(toks.back().text.substr(1));
      if (!e) return fail(toks.back().column, "bad expectation");
      op.expect = e;
      toks.pop_back();
      if (toks.empty()) return fail(1, "expectation without an op");
    }

    const OpSpec* spec = nullptr;
    for (const auto& s : kOps)
      if (s.name == toks[0].text) spec = &s;
    if (!spec)
      return fail(toks[0].column,
                  "unknown op '" + std::string(toks[0].text) + "'");
    op.kind = spec->kind;
    if (toks.size() - 1 != spec->operands.size()) {
      const uint32_t col = toks.size() > spec->operands.size() + 1
                               ? toks[spec->operands.size() + 1].column
                               : uint32_t(line.size() + 1);
      return fail(col, std::string(spec->name) + " takes " +
                           std::to_string(spec->operands.size()) +
                           " operands");
    }

    unsigned regs = 0;
    unsigned nums = 0;
    for (size_t i = 0; i < spec->operands.size(); ++i) {
      const Token& t = toks[i + 1];
      uint64_t value = 0;
      switch (spec->operands[i]) {
        case 'r': {
          auto r = ParseRegister(t.text);
          if (!r) return fail(t.column, "register must be r0..r31");
          (regs++ == 0 ? op.a : op.b) = uint8_t(*r);
          continue;
        }
        case 'u': {
          auto v = ParseUnsigned(t.text);
          if (!v) return fail(t.column, "expected an unsigned number");
          value = *v;
          break;
        }
        default: {
          auto v = ParseSigned(t.text);
          if (!v) return fail(t.column, "expected a signed number");
          value = uint64_t(*v);
          break;
        }
      }
      (nums++ == 0 ? op.x : op.y) = value;
    }

    if ((op.kind == OpKind::kMalloc || op.kind == OpKind::kGlobal) &&
        op.x == 0)
      return fail(toks[2].column, "size must be positive");
    if ((op.kind == OpKind::kRead || op.kind == OpKind::kWrite) &&
        (op.y == 0 || op.y > kMaxAccessWidth))
      return fail(toks[3].column, "width must be in [1, 65536]");
    trace.push_back(op);
  }
  return trace;
}

std::string FormatOp(const TraceOp& op) {
  std::string s(ToString(op.kind));
  auto reg = [&](unsigned r) { s += " r" + std::to_string(r); };
  auto num = [&](uint64_t v) { s += " " + std::to_string(v); };
  switch (op.kind) {
    case OpKind::kMalloc:
    case OpKind::kGlobal:
    case OpKind::kSpill:
    case OpKind::kReload:
      reg(op.a);
      num(op.x);
      break;
    case OpKind::kFree:
      reg(op.a);
      break;
    case OpKind::kRead:
    case OpKind::kWrite:
      reg(op.a);
      num(op.x);
      num(op.y);
      break;
    case OpKind::kCopy:
      reg(op.a);
      reg(op.b);
      break;
    case OpKind::kIncAddr:
      reg(op.a);
      reg(op.b);
      s += " " + std::to_string(int64_t(op.x));
      break;
  }
  if (op.expect) s += " !" + ToString(*op.expect);
  return s;
}

std::string FormatTrace(const Trace& trace) {
  std::string out;
  for (const auto& op : trace) {
    out += FormatOp(op);
    out += '\n';
  }
  return out;
}

Trace Collect(OpSource& source) {
  Trace t;
  while (auto op = source.Next()) t.push_back(*op);
  return t;
}

}  // namespace picasso
