#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace bobylev::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,  // I/O and other errors outside the contract below
  kConfigError = 2,
  kAccuracyError = 3,
  kVerificationError = 4,
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  bool needs_initial = false;
  bool needs_pair = false;
};

/// Sorted by name.
const std::vector<ExperimentInfo>& list_experiments();
const ExperimentInfo* find_experiment(std::string_view name);

/// "name  description" lines, one per experiment.
std::string format_listing();

struct RunOptions {
  std::optional<std::filesystem::path> out;  // overrides the configured output directory
  std::optional<std::uint64_t> seed;         // overrides the configured seed
  int threads = 0;                           // 0 keeps the OpenMP default
};

struct RunResult {
  int exit_code = kSuccess;
  std::string message;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> artifacts;  // CSV files, then the manifest
};

/// Runs one experiment, writes its CSV files and manifest.json into the
/// output directory and maps library errors onto exit codes.
RunResult run(const ExperimentConfig& cfg, const RunOptions& opt);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace bobylev::cli
