#include "runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"ifv: interacting Fleming-Viot simulation and verification laboratory"};
  ifv::cli::RunOptions opts;
  std::string config, preset, out;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config, "experiment config (JSON)");
  auto* preset_opt = app.add_option("--preset", preset, "start from a shipped preset");
  auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides the config");
  auto* out_opt = app.add_option("--out", out, "output directory for report.json and CSV artifacts");
  app.add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
  bool list = false;
  app.add_flag("--list-presets", list, "print preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (list) {
    for (const auto& n : ifv::cli::preset_names()) std::cout << n << "\n";
    return 0;
  }
  if (*config_opt) opts.config_path = config;
  if (*preset_opt) opts.preset = preset;
  if (*seed_opt) opts.seed = seed;
  if (*out_opt) opts.out_dir = out;
  return ifv::cli::run(opts, std::cout, std::cerr);
}
