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

// picasso_cli: run traces and generated workloads under temporal-safety
// schemes and report metrics.
//
//   picasso_cli run --scheme picasso --gen churn:n=1000,live=10,seed=1
//   picasso_cli compare --schemes picasso,cornucopia --trace t.trace
//   picasso_cli corpus --schemes picasso,cornucopia,cornucopia-rof
//
// Exit codes: 0 ok, 1 expectation mismatch (or corpus not perfect for
// picasso), 2 configuration, parse or usage error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "picasso/picasso.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitError = 2;

struct Flags {
  std::string scheme;
  std::vector<std::string> schemes;
  std::string trace;
  std::string gen;
  std::string color_bits;
  std::string threshold;
  std::string quarantine_fraction;
  std::string heap_size;
  std::string pvt_buffer;
  std::string sweep;
  std::string seed;
  std::string format;
  std::string versioning_exhaustion;
  std::string out_dir;
  std::string export_dir;
  bool dump_memory = false;
  bool dump_pvt = false;
  bool dump_unr = false;
  bool print_trace = false;
};

// Owns a C handle.
template <typename T, void (*Destroy)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() {
    if (p) Destroy(p);
  }
};

struct Text {
  char* p = nullptr;
  ~Text() { picasso_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int Error(const std::string& what) {
  std::cerr << "picasso_cli: " << what << "\n";
  return kExitError;
}

int ApiError(picasso_status s) {
  return Error(std::string(picasso_status_string(s)) + ": " +
               picasso_last_error());
}

void AddConfigFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--color-bits", f.color_bits, "Color bits (2..21)");
  cmd->add_option("--threshold", f.threshold,
                  "Unclaimed-color fraction that triggers revocation");
  cmd->add_option("--quarantine-fraction", f.quarantine_fraction,
                  "Quarantine limit as a fraction of allocated bytes");
  cmd->add_option("--heap-size", f.heap_size, "Heap size in bytes");
  cmd->add_option("--pvt-buffer", f.pvt_buffer, "PVT buffer on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--sweep", f.sweep, "sync or windowed:<N>");
  cmd->add_option("--seed", f.seed, "Seed for generators");
  cmd->add_option("--format", f.format, "json|csv|human")
      ->check(CLI::IsMember({"json", "csv", "human"}));
  cmd->add_option("--versioning-exhaustion", f.versioning_exhaustion,
                  "Quarantine versioning blocks before versions wrap: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--out-dir", f.out_dir,
                  "Also write reports here (default: $PICASSO_OUT_DIR)");
}

void AddInputFlags(CLI::App* cmd, Flags& f) {
  auto* t = cmd->add_option("--trace", f.trace, "Trace file");
  auto* g = cmd->add_option("--gen", f.gen,
                            "Generator, e.g. churn:n=1000,live=10,seed=1");
  t->excludes(g);
  g->excludes(t);
}

picasso_status Configure(picasso_config_t* c, const Flags& f,
                         const std::string& default_format) {
  const std::pair<const char*, const std::string*> settings[] = {
      {"scheme", &f.scheme},
      {"color_bits", &f.color_bits},
      {"threshold", &f.threshold},
      {"quarantine_fraction", &f.quarantine_fraction},
      {"heap_size", &f.heap_size},
      {"pvt_buffer", &f.pvt_buffer},
      {"sweep", &f.sweep},
      {"seed", &f.seed},
      {"versioning_exhaustion", &f.versioning_exhaustion},
  };
  for (const auto& [key, value] : settings) {
    if (value->empty()) continue;
    if (auto s = picasso_config_set(c, key, value->c_str()); s != PICASSO_OK)
      return s;
  }
  const std::string& fmt = f.format.empty() ? default_format : f.format;
  if (auto s = picasso_config_set(c, "format", fmt.c_str()); s != PICASSO_OK)
    return s;
  if (f.dump_memory || f.dump_pvt || f.dump_unr)
    if (auto s = picasso_config_set(c, "capture_dumps", "on"); s != PICASSO_OK)
      return s;
  return picasso_config_validate(c);
}

picasso_status OpenSource(const Flags& f, uint64_t seed,
                          picasso_source_t** out) {
  if (!f.trace.empty()) return picasso_source_from_file(f.trace.c_str(), out);
  return picasso_source_from_generator(f.gen.c_str(), seed, out);
}

std::string OutDir(const Flags& f) {
  if (!f.out_dir.empty()) return f.out_dir;
  if (const char* env = std::getenv("PICASSO_OUT_DIR")) return env;
  return {};
}

const char* Extension(picasso_format fmt) {
  switch (fmt) {
    case PICASSO_FORMAT_CSV:
      return ".csv";
    case PICASSO_FORMAT_HUMAN:
      return ".txt";
    default:
      return ".json";
  }
}

bool WriteFile(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

int CmdRun(const Flags& f) {
  if (f.trace.empty() == f.gen.empty())
    return Error("run needs exactly one of --trace or --gen");
  Handle<picasso_config_t, picasso_config_destroy> cfg;
  picasso_config_create(&cfg.p);
  if (auto s = Configure(cfg.p, f, "json"); s != PICASSO_OK)
    return ApiError(s);
  Handle<picasso_source_t, picasso_source_destroy> src;
  if (auto s = OpenSource(f, picasso_config_seed(cfg.p), &src.p);
      s != PICASSO_OK)
    return ApiError(s);

  if (f.print_trace) {
    Text t;
    if (auto s = picasso_source_format(src.p, &t.p); s != PICASSO_OK)
      return ApiError(s);
    std::cout << t.str();
    return kExitOk;
  }

  Handle<picasso_result_t, picasso_result_destroy> res;
  if (auto s = picasso_run(src.p, cfg.p, &res.p); s != PICASSO_OK)
    return ApiError(s);

  const picasso_format fmt = picasso_config_format(cfg.p);
  Text report;
  if (auto s = picasso_result_render(res.p, fmt, &report.p); s != PICASSO_OK)
    return ApiError(s);
  std::cout << report.str();

  const std::string dir = OutDir(f);
  if (!dir.empty() &&
      !WriteFile(std::filesystem::path(dir) / (std::string("run") +
                                               Extension(fmt)),
                 report.str()))
    return Error("cannot write to " + dir);

  const std::pair<bool, const char*> dumps[] = {
      {f.dump_memory, "memory"}, {f.dump_pvt, "pvt"}, {f.dump_unr, "unr"}};
  for (const auto& [wanted, which] : dumps) {
    if (!wanted) continue;
    Text d;
    if (auto s = picasso_result_dump(res.p, which, &d.p); s != PICASSO_OK)
      return ApiError(s);
    if (!dir.empty()) {
      if (!WriteFile(std::filesystem::path(dir) / (std::string(which) +
                                                   ".dump"),
                     d.str()))
        return Error("cannot write to " + dir);
    } else {
      std::cerr << "== " << which << " ==\n" << d.str();
    }
  }

  uint64_t mismatches = 0;
  picasso_result_get(res.p, "expectation_mismatches", &mismatches);
  if (mismatches > 0) {
    Text m;
    picasso_result_mismatches(res.p, &m.p);
    std::cerr << m.str();
    return kExitMismatch;
  }
  return kExitOk;
}

std::vector<const char*> CStrings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

int CmdCompare(const Flags& f) {
  if (f.trace.empty() == f.gen.empty())
    return Error("compare needs exactly one of --trace or --gen");
  Handle<picasso_config_t, picasso_config_destroy> cfg;
  picasso_config_create(&cfg.p);
  if (auto s = Configure(cfg.p, f, "csv"); s != PICASSO_OK) return ApiError(s);
  Handle<picasso_source_t, picasso_source_destroy> src;
  if (auto s = OpenSource(f, picasso_config_seed(cfg.p), &src.p);
      s != PICASSO_OK)
    return ApiError(s);

  const auto names = CStrings(f.schemes);
  const picasso_format fmt = picasso_config_format(cfg.p);
  Text table;
  uint64_t mismatches = 0;
  if (auto s = picasso_compare(src.p, cfg.p, names.data(), names.size(), fmt,
                               &table.p, &mismatches);
      s != PICASSO_OK)
    return ApiError(s);
  std::cout << table.str();
  const std::string dir = OutDir(f);
  if (!dir.empty() &&
      !WriteFile(std::filesystem::path(dir) /
                     (std::string("compare") + Extension(fmt)),
                 table.str()))
    return Error("cannot write to " + dir);
  if (mismatches > 0) {
    std::cerr << mismatches << " expectation mismatches\n";
    return kExitMismatch;
  }
  return kExitOk;
}

int CmdCorpus(const Flags& f) {
  Handle<picasso_config_t, picasso_config_destroy> cfg;
  picasso_config_create(&cfg.p);
  if (auto s = Configure(cfg.p, f, "human"); s != PICASSO_OK)
    return ApiError(s);

  if (!f.export_dir.empty()) {
    for (size_t i = 0; i < picasso_corpus_size(); ++i) {
      Text name, text;
      if (auto s = picasso_corpus_case(i, &name.p, &text.p); s != PICASSO_OK)
        return ApiError(s);
      std::string file = name.str();
      for (char& c : file)
        if (c == '/') c = '_';
      if (!WriteFile(std::filesystem::path(f.export_dir) / (file + ".trace"),
                     text.str()))
        return Error("cannot write to " + f.export_dir);
    }
  }

  const auto names = CStrings(f.schemes);
  const picasso_format fmt = picasso_config_format(cfg.p);
  Text matrix;
  int perfect = 0;
  if (auto s = picasso_corpus(cfg.p, names.data(), names.size(), fmt,
                              &matrix.p, &perfect);
      s != PICASSO_OK)
    return ApiError(s);
  std::cout << matrix.str();
  const std::string dir = OutDir(f);
  if (!dir.empty() &&
      !WriteFile(std::filesystem::path(dir) /
                     (std::string("corpus") + Extension(fmt)),
                 matrix.str()))
    return Error("cannot write to " + dir);
  return perfect ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Colored-capability temporal safety simulator"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "Run one trace or generator");
  run->add_option("--scheme", f.scheme,
                  "picasso|cornucopia|cornucopia-rof|versioning|none");
  AddInputFlags(run, f);
  AddConfigFlags(run, f);
  run->add_flag("--dump-memory", f.dump_memory, "Print tagged memory at end");
  run->add_flag("--dump-pvt", f.dump_pvt, "Print the PVT at end");
  run->add_flag("--dump-unr", f.dump_unr, "Print the color allocator at end");
  run->add_flag("--print-trace", f.print_trace,
                "Print the input as trace text instead of running it");

  auto* compare =
      app.add_subcommand("compare", "Run one input under several schemes");
  compare->add_option("--schemes", f.schemes, "Comma-separated scheme list")
      ->delimiter(',')
      ->default_val(std::vector<std::string>{"picasso", "cornucopia"});
  AddInputFlags(compare, f);
  AddConfigFlags(compare, f);

  auto* corpus =
      app.add_subcommand("corpus", "Run the UAF/DF corpus under schemes");
  corpus->add_option("--schemes", f.schemes, "Comma-separated scheme list")
      ->delimiter(',')
      ->default_val(std::vector<std::string>{
          "picasso", "cornucopia", "cornucopia-rof", "versioning", "none"});
  corpus->add_option("--export", f.export_dir,
                     "Write every case as a .trace file here");
  AddConfigFlags(corpus, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  if (run->parsed()) return CmdRun(f);
  if (compare->parsed()) return CmdCompare(f);
  return CmdCorpus(f);
}
