#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <iostream>

#include "bobylev/errors.hpp"
#include "bobylev/metric.hpp"
#include "config.hpp"
#include "experiments.hpp"

#ifndef BOBYLEV_FIXTURES
#define BOBYLEV_FIXTURES "data/c_constants.txt"
#endif

int main(int argc, char** argv) {
  using namespace bobylev::cli;
  CLI::App app{"Fourier-space solver and metric toolkit for the homogeneous Boltzmann equation"};
  std::string config;
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
  bool regen = false;
  bool list = false;
  app.add_option("--config", config, "experiment configuration (JSON)");
  auto* out_opt = app.add_option("--out", out, "output directory, overrides the configured one");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized checks, overrides the configured one");
  app.add_flag("--regen-fixtures", regen, "recompute " BOBYLEV_FIXTURES);
  app.add_flag("--list", list, "list experiments and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  if (list) {
    std::cout << format_listing();
    return kSuccess;
  }
  if (regen) {
    try {
      bobylev::write_c_fixtures(BOBYLEV_FIXTURES, bobylev::compute_c_fixtures());
      std::cout << "wrote " << BOBYLEV_FIXTURES << '\n';
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kFailure;
    }
    if (config.empty()) return kSuccess;
  }
  if (config.empty()) {
    std::cerr << "error: --config is required (or use --list / --regen-fixtures)\n";
    return kConfigError;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const bobylev::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  RunOptions opt;
  if (*out_opt) opt.out = out;
  if (*seed_opt) opt.seed = seed;
  opt.threads = threads;
  const auto res = run(cfg, opt);
  if (res.exit_code == kSuccess) {
    std::cout << fmt::format("{}: ok, {} artifacts in {}\n", cfg.experiment, res.artifacts.size(),
                             res.out_dir.string());
  } else {
    std::cerr << fmt::format("{}: {} (exit {})\n", cfg.experiment, res.message, res.exit_code);
  }
  return res.exit_code;
}
