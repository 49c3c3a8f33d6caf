#include <CLI11.hpp>

#include "spdc/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulation and inverse design of spatially entangled photon pairs"};
  app.set_version_flag("--version", spdc::cli::version());
  app.require_subcommand(1);

  std::string config, out;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  bool quiet = false;

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Run the forward model and write coincidence and moment artifacts"},
      {"learn", "Optimize the learnable parameters against the configured targets"},
      {"tomography", "Reconstruct the two-photon density matrix on the tomography subspace"},
      {"robustness", "Perturb a learned crystal and recover by re-optimizing the pump waist"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides output.directory)");
    sub->add_option("--workers", workers, "Worker threads (default: SPDC_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Noise seed (overrides interaction.seed)");
    sub->add_flag("--quiet", quiet, "Only report errors");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  spdc::cli::RunOptions opts;
  opts.quiet = quiet;
  for (auto* sub : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--out")) opts.out = out;
    if (sub->count("--workers")) opts.workers = workers;
    if (sub->count("--seed")) opts.seed = seed;
    return spdc::cli::run(sub->get_name(), config, opts);
  }
  return 2;
}
