#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spdc/core/errors.hpp"
#include "spdc/core/grid.hpp"
#include "spdc/core/interaction.hpp"
#include "spdc/io/json_util.hpp"
#include "spdc/modes/modes.hpp"
#include "spdc/objectives/objectives.hpp"
#include "spdc/observables/observables.hpp"
#include "spdc/structure/structure.hpp"

namespace spdc::inverse {

using structure::ParamSet;

// Signal and idler subspaces (same dimension d) for tomography.
struct QstConfig {
  std::vector<modes::ModeIndex> subspace_s, subspace_i;
  int d() const { return static_cast<int>(subspace_s.size()); }
};

struct Evaluation {
  observables::MomentSet moments;
  observables::CoincidenceMatrix g2_raw;
  observables::CoincidenceMatrix g2;  // normalized unless no coincidences were generated
  std::optional<observables::DensityMatrix> density;
  double mean_pairs = 0.0;  // trace of the signal normal moment
};

// Forward model plus measurement: (theta, noise seed) -> observables, and the
// exact reverse-mode gradient of any composite loss built on them.
class Experiment {
 public:
  Experiment(const TransverseGrid& grid, const InteractionSpec& spec, modes::ModeBasis basis_s,
             modes::ModeBasis basis_i, std::optional<QstConfig> qst = std::nullopt);

  const TransverseGrid& grid() const noexcept { return grid_; }
  const InteractionSpec& spec() const noexcept { return spec_; }
  const modes::ModeBasis& basis_s() const noexcept { return basis_s_; }
  const modes::ModeBasis& basis_i() const noexcept { return basis_i_; }
  const std::optional<QstConfig>& qst() const noexcept { return qst_; }
  void set_workers(std::size_t n) { workers_ = n; }
  void set_n_realizations(std::size_t n);

  Evaluation evaluate(const ParamSet& theta, std::uint64_t seed, bool with_density = false) const;
  Evaluation evaluate(const ParamSet& theta) const { return evaluate(theta, spec_.seed, qst_.has_value()); }

  double loss(const ParamSet& theta, const objectives::LossSpec& loss, const objectives::Targets& targets,
              std::uint64_t seed) const;
  // Gradient over every packed scalar of theta (masks are applied by the caller).
  double loss_and_gradient(const ParamSet& theta, const objectives::LossSpec& loss,
                           const objectives::Targets& targets, std::uint64_t seed,
                           std::vector<double>& grad) const;

 private:
  struct Prepared;
  Prepared prepare(const ParamSet& theta) const;
  observables::Coefficients project_all(const Prepared& p, std::uint64_t seed) const;
  Evaluation observe(observables::Coefficients c, bool with_density) const;

  TransverseGrid grid_;
  InteractionSpec spec_;
  modes::ModeBasis basis_s_, basis_i_;
  std::optional<QstConfig> qst_;
  std::vector<std::size_t> qst_pos_s_, qst_pos_i_;
  std::size_t workers_ = 0;
};

// Anything the optimizer can minimize. `epoch` lets stochastic objectives
// resample their noise.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const ParamSet& theta, std::size_t epoch) = 0;
  virtual double value_and_gradient(const ParamSet& theta, std::size_t epoch, std::vector<double>& grad) = 0;
};

enum class GradientMode { adjoint, finite_difference };
enum class NoisePolicy { fixed, resampled };
enum class Method { gd, momentum, adam };

// Central differences over the learnable scalars of theta; other entries are 0.
std::vector<double> finite_difference_gradient(const std::function<double(const ParamSet&)>& f,
                                               const ParamSet& theta, double step);

class ExperimentObjective : public Objective {
 public:
  ExperimentObjective(const Experiment& experiment, objectives::LossSpec loss, objectives::Targets targets,
                      GradientMode mode = GradientMode::adjoint, NoisePolicy noise = NoisePolicy::fixed,
                      double fd_step = 1e-5);
  double value(const ParamSet& theta, std::size_t epoch) override;
  double value_and_gradient(const ParamSet& theta, std::size_t epoch, std::vector<double>& grad) override;
  std::uint64_t seed_for(std::size_t epoch) const;

 private:
  const Experiment& exp_;
  objectives::LossSpec loss_;
  objectives::Targets targets_;
  GradientMode mode_;
  NoisePolicy noise_;
  double fd_step_;
};

struct OptimizerConfig {
  std::size_t max_epochs = 100;
  double learning_rate = 0.1;
  double decay = 1.0;  // learning rate multiplied by `decay` every `decay_every` epochs
  std::size_t decay_every = 0;  // 0: no decay
  Method method = Method::gd;
  double momentum = 0.9;
  double beta2 = 0.999;  // adam
  double tolerance = 0.0;  // stop when the best loss improves by less than this ...
  std::size_t patience = 20;  // ... over this many epochs
  GradientMode gradient_mode = GradientMode::adjoint;
  double fd_step = 1e-5;
  NoisePolicy noise = NoisePolicy::fixed;
  double min_waist = 0.5;  // lower bound for learned waists, in micrometres

  void validate() const;
  io::json to_json() const;
  static OptimizerConfig from_json(const io::json& j);
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double best_loss = 0.0;
  double learning_rate = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;
  std::vector<double> params;  // packed theta evaluated at this epoch
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  std::vector<std::string> scalar_names;
  std::string stop_reason;

  // One JSON object per line.
  void write_jsonl(std::ostream& os) const;
};

struct TrainingResult {
  ParamSet best;
  double best_loss = 0.0;
  TrainingHistory history;
};

class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, TrainingHistory history)
      : DivergenceError(what), history_(std::move(history)) {}
  const TrainingHistory& history() const noexcept { return history_; }

 private:
  TrainingHistory history_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Gradient descent over the learnable scalars. Returns the best parameters
// seen. Throws ConfigError without learnable scalars, EvaluationError on a
// non-finite loss and TrainingDiverged when the loss stays above 10x its
// initial value for `patience` epochs.
TrainingResult optimize(const ParamSet& initial, Objective& objective, const OptimizerConfig& cfg,
                        const EpochCallback& on_epoch = {});

enum class PerturbMode { multiplicative, additive };
std::string perturb_mode_name(PerturbMode m);

// Crystal coefficients alpha -> alpha (1 + delta) or alpha + delta with real
// delta ~ N(0, sigma^2) drawn independently per coefficient.
ParamSet perturb_crystal(const ParamSet& theta, double sigma, PerturbMode mode, std::uint64_t seed);

struct Recovery {
  ParamSet recovered;
  double original_loss = 0.0, perturbed_loss = 0.0, recovered_loss = 0.0;
  TrainingHistory history;
};

// Optimizes the pump waists of `perturbed` alone (everything else frozen). An
// unperturbed crystal is returned as is.
Recovery recover_by_waist(const ParamSet& original, const ParamSet& perturbed, Objective& objective,
                          const OptimizerConfig& cfg);

}  // namespace spdc::inverse
