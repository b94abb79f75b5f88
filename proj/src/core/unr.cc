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

#include "core/unr.h"

#include <bit>
#include <cstdio>
#include <iterator>
#include <vector>

namespace picasso {

using NodeIter = std::list<UnrNode>::iterator;

std::string_view ToString(UnrError e) {
  switch (e) {
    case UnrError::kExhausted:
      return "Exhausted";
    case UnrError::kNotClaimed:
      return "NotClaimed";
    case UnrError::kOutOfRange:
      return "OutOfRange";
    case UnrError::kNotAscending:
      return "NotAscending";
  }
  return "?";
}

uint32_t UnrNode::claimed() const {
  switch (kind) {
    case Kind::kClaimedRun:
      return len;
    case Kind::kAvailableRun:
      return 0;
    case Kind::kBitmap: {
      uint32_t n = 0;
      for (uint64_t w : bits) n += static_cast<uint32_t>(std::popcount(w));
      return n;
    }
  }
  return 0;
}

namespace {

UnrNode MakeRun(bool claimed, uint32_t len) {
  UnrNode n;
  n.kind = claimed ? UnrNode::Kind::kClaimedRun : UnrNode::Kind::kAvailableRun;
  n.len = len;
  return n;
}

bool RunState(const UnrNode& n) { return n.kind == UnrNode::Kind::kClaimedRun; }

void SetBits(UnrNode& bm, uint32_t from, uint32_t count, bool v) {
  for (uint32_t i = 0; i < count; ++i) bm.set_bit(from + i, v);
}

}  // namespace

// Appends runs before an insertion point of a node list, keeping the tail of
// everything emitted so far canonical. The nodes preceding the insertion
// point act as context: runs extend a same-state tail, fit into a tail
// bitmap, or join the two runs before them into a new bitmap as soon as the
// three span at most 512 IDs.
class UnrEmitter {
 public:
  UnrEmitter(std::list<UnrNode>& list, size_t& runs, size_t& bitmaps,
             NodeIter insert_pos)
      : list_(list), runs_(runs), bitmaps_(bitmaps), pos_(insert_pos) {}

  void EmitRun(bool claimed, uint32_t len) {
    if (len == 0) return;
    if (HasTail()) {
      UnrNode& t = *Tail();
      if (t.is_run() && RunState(t) == claimed) {
        t.len += len;
        return;
      }
      if (!t.is_run() && t.len + len <= kUnrBitmapBits) {
        SetBits(t, t.len, len, claimed);
        t.len += len;
        return;
      }
    }
    list_.insert(pos_, MakeRun(claimed, len));
    ++runs_;
    TryFormBitmap();
  }

  void EmitNode(const UnrNode& n) {
    if (n.is_run()) {
      EmitRun(RunState(n), n.len);
      return;
    }
    uint32_t i = 0;
    while (i < n.len) {
      const bool v = n.bit(i);
      uint32_t j = i + 1;
      while (j < n.len && n.bit(j) == v) ++j;
      EmitRun(v, j - i);
      i = j;
    }
  }

  // Pulls nodes from the right of the insertion point back through the
  // emitter while they could merge with what was emitted.
  void Stabilize() {
    while (pos_ != list_.end() && HasTail() && Combinable(Tail(), pos_)) {
      UnrNode n = *pos_;
      Count(n, -1);
      pos_ = list_.erase(pos_);
      EmitNode(n);
    }
  }

 private:
  bool HasTail() const { return pos_ != list_.begin(); }
  NodeIter Tail() const { return std::prev(pos_); }

  void Count(const UnrNode& n, int delta) {
    (n.is_run() ? runs_ : bitmaps_) += delta;
  }

  void TryFormBitmap() {
    NodeIter c = Tail();
    if (c == list_.begin()) return;
    NodeIter b = std::prev(c);
    if (b == list_.begin()) return;
    NodeIter a = std::prev(b);
    if (!a->is_run() || !b->is_run() || !c->is_run()) return;
    const uint64_t span = uint64_t{a->len} + b->len + c->len;
    if (span > kUnrBitmapBits) return;

    UnrNode bm;
    bm.kind = UnrNode::Kind::kBitmap;
    for (NodeIter r : {a, b, c}) {
      SetBits(bm, bm.len, r->len, RunState(*r));
      bm.len += r->len;
    }
    list_.erase(a, pos_);
    runs_ -= 3;
    list_.insert(pos_, bm);
    ++bitmaps_;
  }

  bool Combinable(NodeIter t, NodeIter n) const {
    const uint64_t pair = uint64_t{t->len} + n->len;
    if (!t->is_run() || !n->is_run()) return pair <= kUnrBitmapBits;
    if (RunState(*t) == RunState(*n)) return true;
    // Would the three-run condition fire across this boundary?
    if (t != list_.begin()) {
      NodeIter p = std::prev(t);
      if (p->is_run() && pair + p->len <= kUnrBitmapBits) return true;
    }
    NodeIter nn = std::next(n);
    return nn != list_.end() && nn->is_run() &&
           pair + nn->len <= kUnrBitmapBits;
  }

  std::list<UnrNode>& list_;
  size_t& runs_;
  size_t& bitmaps_;
  NodeIter pos_;
};

UnrAllocator::UnrAllocator(uint32_t total) : total_(total) {
  if (total_ > 0) {
    nodes_.push_back(MakeRun(false, total_));
    runs_ = 1;
  }
}

void UnrAllocator::RewriteWithFlip(NodeIter it, uint32_t offset, bool claim) {
  UnrNode node = *it;
  (node.is_run() ? runs_ : bitmaps_) -= 1;
  NodeIter next = nodes_.erase(it);
  UnrEmitter e(nodes_, runs_, bitmaps_, next);
  if (node.is_run()) {
    const bool s = RunState(node);
    e.EmitRun(s, offset);
    e.EmitRun(claim, 1);
    e.EmitRun(s, node.len - offset - 1);
  } else {
    node.set_bit(offset, claim);
    e.EmitNode(node);
  }
  e.Stabilize();
}

Expected<uint32_t, UnrError> UnrAllocator::AllocFirstFree() {
  ++passes_;
  uint32_t start = 1;
  for (auto it = nodes_.begin(); it != nodes_.end(); ++it) {
    if (it->kind == UnrNode::Kind::kClaimedRun) {
      start += it->len;
      continue;
    }
    uint32_t offset = 0;
    if (it->kind == UnrNode::Kind::kBitmap) {
      while (offset < it->len && it->bit(offset)) ++offset;
      if (offset == it->len) {
        start += it->len;
        continue;
      }
    }
    RewriteWithFlip(it, offset, true);
    ++population_;
    return start + offset;
  }
  return Unexpected{UnrError::kExhausted};
}

Expected<void, UnrError> UnrAllocator::FreeOne(uint32_t id) {
  if (id == 0 || id > total_) return Unexpected{UnrError::kOutOfRange};
  ++passes_;
  uint32_t start = 1;
  for (auto it = nodes_.begin(); it != nodes_.end(); ++it) {
    if (id >= start + it->len) {
      start += it->len;
      continue;
    }
    const uint32_t off = id - start;
    const bool claimed = it->is_run() ? RunState(*it) : it->bit(off);
    if (!claimed) return Unexpected{UnrError::kNotClaimed};
    RewriteWithFlip(it, off, false);
    --population_;
    return {};
  }
  return Unexpected{UnrError::kOutOfRange};
}

Expected<void, UnrError> UnrAllocator::BatchRelease(
    std::span<const uint32_t> ids) {
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == 0 || ids[i] > total_) return Unexpected{UnrError::kOutOfRange};
    if (i > 0 && ids[i] <= ids[i - 1]) return Unexpected{UnrError::kNotAscending};
  }
  if (ids.empty()) return {};

  ++passes_;
  // Build the new list on the side so a NotClaimed leaves us untouched.
  std::list<UnrNode> out;
  size_t runs = 0;
  size_t bitmaps = 0;
  UnrEmitter e(out, runs, bitmaps, out.end());

  size_t k = 0;
  uint64_t start = 1;
  for (const UnrNode& n : nodes_) {
    const uint64_t end = start + n.len;
    if (k == ids.size() || ids[k] >= end) {
      e.EmitNode(n);
    } else if (n.kind == UnrNode::Kind::kAvailableRun) {
      return Unexpected{UnrError::kNotClaimed};
    } else if (n.kind == UnrNode::Kind::kClaimedRun) {
      uint64_t cur = start;
      for (; k < ids.size() && ids[k] < end; ++k) {
        e.EmitRun(true, static_cast<uint32_t>(ids[k] - cur));
        e.EmitRun(false, 1);
        cur = uint64_t{ids[k]} + 1;
      }
      e.EmitRun(true, static_cast<uint32_t>(end - cur));
    } else {
      UnrNode copy = n;
      for (; k < ids.size() && ids[k] < end; ++k) {
        const auto off = static_cast<uint32_t>(ids[k] - start);
        if (!copy.bit(off)) return Unexpected{UnrError::kNotClaimed};
        copy.set_bit(off, false);
      }
      e.EmitNode(copy);
    }
    start = end;
  }

  nodes_.swap(out);
  runs_ = runs;
  bitmaps_ = bitmaps;
  population_ -= static_cast<uint32_t>(ids.size());
  return {};
}

bool UnrAllocator::IsClaimed(uint32_t id) const {
  if (id == 0 || id > total_) return false;
  uint32_t start = 1;
  for (const UnrNode& n : nodes_) {
    if (id < start + n.len) {
      const uint32_t off = id - start;
      return n.is_run() ? RunState(n) : n.bit(off);
    }
    start += n.len;
  }
  return false;
}

std::string UnrAllocator::Dump() const {
  std::string out;
  for (const UnrNode& n : nodes_) {
    if (!out.empty()) out += ' ';
    if (n.is_run()) {
      out += RunState(n) ? "R:c:" : "R:a:";
      out += std::to_string(n.len);
      continue;
    }
    out += "B:len=" + std::to_string(n.len) + ":";
    char hex[3];
    for (uint32_t byte = 0; byte < (n.len + 7) / 8; ++byte) {
      const auto v = static_cast<unsigned>((n.bits[byte / 8] >> (8 * (byte % 8))) & 0xff);
      std::snprintf(hex, sizeof hex, "%02x", v);
      out += hex;
    }
  }
  return out;
}

std::string UnrAllocator::CheckInvariants() const {
  uint64_t covered = 0;
  uint64_t claimed = 0;
  size_t runs = 0;
  size_t bitmaps = 0;
  const UnrNode* prev = nullptr;
  size_t index = 0;
  for (const UnrNode& n : nodes_) {
    const std::string at = " at node " + std::to_string(index++);
    if (n.len == 0) return "empty node" + at;
    if (n.is_run()) {
      ++runs;
      if (prev && prev->is_run() && RunState(*prev) == RunState(n))
        return "adjacent runs share a state" + at;
    } else {
      ++bitmaps;
      if (n.len > kUnrBitmapBits) return "bitmap longer than 512" + at;
      const uint32_t c = n.claimed();
      if (c == 0 || c == n.len) return "uniform bitmap" + at;
      for (uint32_t i = n.len; i < kUnrBitmapBits; ++i)
        if (n.bit(i)) return "bit set past bitmap length" + at;
    }
    covered += n.len;
    claimed += n.claimed();
    prev = &n;
  }
  if (covered != total_) return "extents cover " + std::to_string(covered) +
                                " ids, expected " + std::to_string(total_);
  if (claimed != population_) return "population counter out of sync";
  if (runs != runs_ || bitmaps != bitmaps_) return "node counters out of sync";
  return {};
}

}  // namespace picasso
