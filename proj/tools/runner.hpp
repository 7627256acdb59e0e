#pragma once

// Configuration-driven experiment dispatch behind the `ifv` executable.
//
// A config is a JSON document
//   {"experiment": NAME, "seed": U64, "model": {...} | "model_file": PATH,
//    "parameters": {...}}
// and a run produces one JSON report
//   {"experiment", "config" (fully resolved), "spec_hash", "result"}.
// See docs/config.md for the parameters of each experiment.

#include "ifv/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ifv::cli {

std::vector<std::string> preset_names();
// Throws InvalidInput for an unknown name.
json preset_config(const std::string& name);

struct RunOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int threads = 1;
};

// Preset (if any) merge-patched with the config file (if any), --seed applied,
// model_file inlined and every parameter defaulted.
json resolve_config(const RunOptions& opts);

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

struct RunOutput {
  json report;
  std::vector<Artifact> artifacts;
};

// `config` must already be resolved. Thread count never changes the report.
RunOutput run_experiment(const json& config, int threads);

// Full CLI behaviour: resolve, run, write; returns the process exit code
// (0 ok, 1 experiment failure, 2 invalid input, 3 cap exceeded).
int run(const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace ifv::cli
