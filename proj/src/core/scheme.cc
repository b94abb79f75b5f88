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

#include "core/scheme.h"

#include <algorithm>
#include <charconv>

#include "core/baseline_schemes.h"
#include "core/picasso_mrs.h"

namespace picasso {
namespace {

struct SchemeName {
  SchemeKind kind;
  std::string_view name;
};

constexpr SchemeName kSchemeNames[] = {
    {SchemeKind::kPicasso, "picasso"},
    {SchemeKind::kCornucopia, "cornucopia"},
    {SchemeKind::kCornucopiaRof, "cornucopia-rof"},
    {SchemeKind::kVersioning, "versioning"},
    {SchemeKind::kNone, "none"},
};

}  // namespace

std::string_view ToString(SchemeKind k) {
  for (const auto& s : kSchemeNames)
    if (s.kind == k) return s.name;
  return "?";
}

std::optional<SchemeKind> ParseSchemeKind(std::string_view s) {
  for (const auto& n : kSchemeNames)
    if (n.name == s) return n.kind;
  return std::nullopt;
}

std::string_view ToString(AllocError e) {
  switch (e) {
    case AllocError::kOutOfMemory:
      return "OutOfMemory";
    case AllocError::kExhausted:
      return "Exhausted";
  }
  return "?";
}

std::optional<OutputFormat> ParseOutputFormat(std::string_view s) {
  if (s == "json") return OutputFormat::kJson;
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "human") return OutputFormat::kHuman;
  return std::nullopt;
}

std::optional<SweepMode> ParseSweepMode(std::string_view s) {
  if (s == "sync") return SweepMode{};
  constexpr std::string_view kPrefix = "windowed:";
  if (s.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  const std::string_view num = s.substr(kPrefix.size());
  uint64_t n = 0;
  auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
  if (ec != std::errc() || p != num.data() + num.size() || n == 0)
    return std::nullopt;
  return SweepMode{true, n};
}

MachineConfig RunConfig::ToMachineConfig() const {
  MachineConfig m = MachineConfig::WithColorBits(color_bits);
  m.heap_size = heap_size;
  m.pvt_buffer_enabled = pvt_buffer;
  m.provenance_checks = scheme != SchemeKind::kVersioning;
  return m;
}

Expected<void, std::string> RunConfig::Validate() const {
  auto fail = [](std::string msg) { return Unexpected{std::move(msg)}; };
  if (color_bits < 2 || color_bits > kMaxColorBits)
    return fail("color_bits must be in [2, 21]");
  if (scheme == SchemeKind::kVersioning && color_bits < 5)
    return fail("versioning needs color_bits >= 5 to carry 16 versions");
  if (!(threshold_fraction >= 0.0 && threshold_fraction < 1.0))
    return fail("threshold must be in [0, 1)");
  if (!(quarantine_fraction > 0.0 && quarantine_fraction <= 1.0))
    return fail("quarantine fraction must be in (0, 1]");
  if (sweep.windowed && sweep.window_words == 0)
    return fail("windowed sweep needs a positive window");
  return ToMachineConfig().Validate();
}

void Scheme::NoteResident() {
  counters_.peak_live_bytes =
      std::max(counters_.peak_live_bytes, counters_.live_bytes);
  counters_.peak_quarantine_bytes =
      std::max(counters_.peak_quarantine_bytes, counters_.quarantine_bytes);
  counters_.peak_resident_bytes =
      std::max(counters_.peak_resident_bytes, ResidentBytes());
  counters_.peak_metadata_bytes =
      std::max(counters_.peak_metadata_bytes, MetadataBytes());
}

std::unique_ptr<Scheme> MakeScheme(const RunConfig& config, Machine& machine) {
  switch (config.scheme) {
    case SchemeKind::kPicasso:
      return std::make_unique<PicassoMrs>(
          machine, MrsOptions{config.threshold_fraction, config.sweep});
    case SchemeKind::kCornucopia:
      return std::make_unique<CornucopiaScheme>(
          machine, config.quarantine_fraction, false);
    case SchemeKind::kCornucopiaRof:
      return std::make_unique<CornucopiaScheme>(
          machine, config.quarantine_fraction, true);
    case SchemeKind::kVersioning:
      return std::make_unique<VersioningScheme>(
          machine, config.quarantine_fraction, config.versioning_exhaustion);
    case SchemeKind::kNone:
      return std::make_unique<NoneScheme>(machine);
  }
  return nullptr;
}

}  // namespace picasso
