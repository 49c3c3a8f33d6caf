#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "spdc/cli/config.hpp"
#include "spdc/io/json_util.hpp"

namespace spdc::cli {

// Command-line overrides applied on top of a loaded config.
struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct RunResult {
  std::filesystem::path directory;
  io::json report;
};

RunResult cmd_simulate(ExperimentConfig cfg, const RunOptions& opts);
RunResult cmd_learn(ExperimentConfig cfg, const RunOptions& opts);
RunResult cmd_tomography(ExperimentConfig cfg, const RunOptions& opts);
RunResult cmd_robustness(ExperimentConfig cfg, const RunOptions& opts);

// 0 success, 2 configuration error, 3 numeric failure, 4 divergence, 1 anything else.
int exit_code_for(const std::exception& e);

// Loads the config, runs `command` and maps failures to exit codes, printing
// the error to stderr.
int run(const std::string& command, const std::filesystem::path& config, const RunOptions& opts);

std::string version();

}  // namespace spdc::cli
