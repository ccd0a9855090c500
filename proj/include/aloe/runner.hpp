#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "aloe/harness.hpp"

namespace aloe {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,   // a path lemma, tail, true-fraction or required certification check
  kExitConfig = 2,        // unparsable or invalid config, or inadmissible theory constants
  kExitRuntime = 3,
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // replaces experiment.base_seed
  std::optional<int> trials;
  std::optional<int> jobs;
  bool quiet = false;
  std::ostream* log = nullptr;  // human-readable summary; nothing is printed when null
};

/// Parses the config, runs it and writes the output directory described in
/// docs/outputs.md. Never throws for config or runtime problems; they map to
/// exit codes and land in failures.json.
int run_config_file(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                    const RunOptions& options);

/// Same, for a config already in memory. Overrides in `options` apply first.
int run_config(const ExperimentConfig& config, const std::filesystem::path& out_dir,
               const RunOptions& options);

}  // namespace aloe
