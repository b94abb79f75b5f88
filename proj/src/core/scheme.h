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

#ifndef PICASSO_CORE_SCHEME_H_
#define PICASSO_CORE_SCHEME_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "core/capability.h"
#include "core/expected.h"
#include "core/tagged_machine.h"

namespace picasso {

enum class SchemeKind : uint8_t {
  kPicasso,
  kCornucopia,
  kCornucopiaRof,
  kVersioning,
  kNone,
};

std::string_view ToString(SchemeKind k);
std::optional<SchemeKind> ParseSchemeKind(std::string_view s);

enum class AllocError : uint8_t { kOutOfMemory, kExhausted };
std::string_view ToString(AllocError e);

enum class OutputFormat : uint8_t { kJson, kCsv, kHuman };
std::optional<OutputFormat> ParseOutputFormat(std::string_view s);

struct SweepMode {
  bool windowed = false;
  uint64_t window_words = 0;  // tagged words per step when windowed
};

// Everything a run needs besides the trace. Defaults: 21 color bits, a 1%
// unclaimed-color threshold and a quarantine of one fourth of allocated
// memory.
struct RunConfig {
  SchemeKind scheme = SchemeKind::kPicasso;
  unsigned color_bits = kMaxColorBits;
  double threshold_fraction = 0.01;
  double quarantine_fraction = 0.25;
  uint64_t heap_size = 32ull << 20;
  bool pvt_buffer = true;
  SweepMode sweep;
  uint64_t seed = 1;
  OutputFormat format = OutputFormat::kJson;
  // Versioning: quarantine blocks whose versions would wrap.
  bool versioning_exhaustion = true;
  bool record_outcomes = true;
  bool capture_dumps = false;

  Expected<void, std::string> Validate() const;
  MachineConfig ToMachineConfig() const;
};

// Parses "sync" or "windowed:<N>".
std::optional<SweepMode> ParseSweepMode(std::string_view s);

struct SchemeCounters {
  uint64_t allocations = 0;
  uint64_t frees = 0;
  uint64_t revocations = 0;
  uint64_t swept_tags = 0;   // tagged capabilities visited by sweeps
  uint64_t cleared_tags = 0; // of which revoked
  uint64_t live_bytes = 0;
  uint64_t quarantine_bytes = 0;
  uint64_t peak_live_bytes = 0;
  uint64_t peak_quarantine_bytes = 0;
  uint64_t peak_resident_bytes = 0;
  uint64_t peak_metadata_bytes = 0;  // PVT copies + unr nodes at their peak
};

// A temporal-safety allocator bound to one machine.
class Scheme {
 public:
  virtual ~Scheme() = default;

  virtual SchemeKind kind() const = 0;
  virtual Expected<Capability, AllocError> Malloc(uint64_t size) = 0;
  virtual FaultStatus Free(const Capability& cap) = 0;
  // Background progress between trace operations.
  virtual void Tick() {}
  virtual size_t live_allocations() const = 0;
  // Bytes the scheme keeps resident: live + quarantine + metadata.
  virtual uint64_t ResidentBytes() const = 0;
  virtual uint64_t MetadataBytes() const { return 0; }
  virtual std::string DebugDump() const { return {}; }

  const SchemeCounters& counters() const { return counters_; }

 protected:
  void NoteResident();

  SchemeCounters counters_;
};

// Builds the scheme for config.scheme on a machine made from
// config.ToMachineConfig().
std::unique_ptr<Scheme> MakeScheme(const RunConfig& config, Machine& machine);

}  // namespace picasso

#endif  // PICASSO_CORE_SCHEME_H_
