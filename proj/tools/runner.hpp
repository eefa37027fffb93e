#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace qspec::cli {

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

/// One declared check: a measured value against its bound.
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::vector<std::string> failures;  // failing ledger rows, if any
};

struct RunResult {
  int exit_code = 0;
  std::vector<Check> checks;
  std::vector<std::string> artifacts;  // file names inside the output directory
};

/// Checks a run of `cfg` would perform, with their bounds; nothing is computed.
std::vector<Check> list_checks(const ExperimentConfig& cfg);

/// Runs cfg.command, writes artifacts and returns the check outcomes.
RunResult run(ExperimentConfig cfg, const RunOptions& options = {});

/// FNV-1a 64-bit, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace qspec::cli
