#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spdc/core/grid.hpp"
#include "spdc/core/interaction.hpp"
#include "spdc/inverse/inverse.hpp"
#include "spdc/io/json_util.hpp"
#include "spdc/modes/modes.hpp"
#include "spdc/objectives/objectives.hpp"
#include "spdc/structure/structure.hpp"

namespace spdc::cli {

struct BasisSpec {
  std::vector<modes::ModeIndex> modes;
  std::vector<double> waists;  // meters, one per mode
};

struct RobustnessConfig {
  std::filesystem::path baseline;
  std::vector<std::pair<inverse::PerturbMode, std::vector<double>>> sigmas;
  std::uint64_t seed = 7;
  inverse::OptimizerConfig recovery;
};

struct OutputConfig {
  std::filesystem::path directory;
  bool csv = true;
  bool images = true;
};

// A fully validated experiment description. Every referenced file has been
// read by the time load_config returns.
struct ExperimentConfig {
  std::filesystem::path source;
  io::json document;  // the parsed config as written
  TransverseGrid grid = make_grid(2, 2, 1.0, 1.0);
  InteractionSpec interaction;
  BasisSpec signal, idler;
  std::optional<inverse::QstConfig> tomography;
  std::optional<std::string> tomography_target;
  structure::ParamSet parameters;
  std::optional<objectives::LossSpec> loss;
  objectives::Targets targets;
  inverse::OptimizerConfig optimizer;
  std::optional<RobustnessConfig> robustness;
  OutputConfig output;

  modes::ModeBasis signal_basis() const;
  modes::ModeBasis idler_basis() const;
  inverse::Experiment make_experiment() const;
};

// Throws ConfigError. Messages name the offending key and, when it can be
// located, the line of the config file.
ExperimentConfig load_config(const std::filesystem::path& path);
// Relative file references resolve against base_dir.
ExperimentConfig parse_config(const io::json& doc, const std::filesystem::path& base_dir);

// Coincidence targets from a CSV (optional label row and column) or from a
// JSON document with a "values" matrix.
observables::RMat read_matrix_file(const std::filesystem::path& path);

}  // namespace spdc::cli
