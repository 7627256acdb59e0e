#include "runner.hpp"

#include "ifv/error.hpp"

#include <map>

namespace ifv::cli {

namespace {

// Each preset pins one statement: neutral and selective duality, the
// migration + mutation obstruction, the stepping-stone example and the
// absorbing set of the mutation-free model.
const std::map<std::string, const char*>& presets() {
  static const std::map<std::string, const char*> table{
      {"neutral-2colony", R"({
        "experiment": "verify-duality",
        "seed": 20240601,
        "model": {
          "types": 2,
          "kernel": {"family": "complete-uniform", "params": {"colonies": 2}},
          "mutation": {"kind": "zero"},
          "rho": 1.0
        },
        "parameters": {
          "t": 0.5, "N": 200, "reps": 10000,
          "initial": [[0.5, 0.5], [0.3, 0.7]],
          "monomial": [{"colony": 0, "f": [1.0, 0.0]}, {"colony": 1, "f": [1.0, 0.0]}]
        }
      })"},
      {"pim-migration", R"({
        "experiment": "check-reversibility",
        "seed": 1,
        "model": {
          "types": 2,
          "kernel": {"family": "complete-uniform", "params": {"colonies": 2}},
          "mutation": {"kind": "pim", "theta": 1.0, "mu": [0.5, 0.5]},
          "rho": 1.0
        },
        "parameters": {"N": 6}
      })"},
      {"stepping-stone-1d", R"({
        "experiment": "classify",
        "seed": 1,
        "stepping_stone": {"u": 0.1, "v": 0.2, "s": 0.5, "rho": 1.0, "dimension": 1, "side": 5},
        "parameters": {}
      })"},
      {"no-mutation-absorbing", R"({
        "experiment": "absorbing-check",
        "seed": 1,
        "model": {
          "types": 2,
          "kernel": {"family": "complete-uniform", "params": {"colonies": 3}},
          "mutation": {"kind": "zero"},
          "fitness": [[1.0, 0.0], [0.0, 0.0]],
          "s": 0.5,
          "rho": 1.0
        },
        "parameters": {"X": [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]], "N": 4}
      })"},
      {"selection-duality", R"({
        "experiment": "verify-duality",
        "seed": 20240602,
        "model": {
          "types": 2,
          "kernel": {"family": "complete-uniform", "params": {"colonies": 1}},
          "mutation": {"kind": "pim", "theta": 1.0, "mu": [0.5, 0.5]},
          "fitness": [[1.0, 0.0], [0.0, 0.0]],
          "s": 0.2
        },
        "parameters": {
          "t": 0.3, "N": 200, "reps": 10000,
          "initial": [[0.4, 0.6]],
          "monomial": [{"colony": 0, "f": [1.0, 0.0]}, {"colony": 0, "f": [1.0, 0.0]}]
        }
      })"},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : presets()) out.push_back(name);
  return out;
}

json preset_config(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidInput("unknown preset \"" + name + "\" (known: " + known + ")");
  }
  return json::parse(it->second);
}

}  // namespace ifv::cli
