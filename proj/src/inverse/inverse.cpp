#include "spdc/inverse/inverse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "spdc/core/log.hpp"
#include "spdc/core/parallel.hpp"
#include "spdc/core/rng.hpp"
#include "spdc/solver/solver.hpp"

namespace spdc::inverse {

namespace {

constexpr double kNoiseScale = 1.0;
// Realizations per gradient accumulation chunk and chunks per reduction wave.
// Both are fixed so the summation order never depends on the worker count.
constexpr std::size_t kChunk = 8;
constexpr std::size_t kWave = 32;

void add_into(observables::MomentSet& a, const observables::MomentSet& b) {
  a.N_s += b.N_s;
  a.N_i += b.N_i;
  a.A += b.A;
  a.C += b.C;
}

}  // namespace

struct Experiment::Prepared {
  ComplexField pump;
  structure::Crystal crystal;
  std::shared_ptr<solver::SplitStepModel> model;
};

Experiment::Experiment(const TransverseGrid& grid, const InteractionSpec& spec, modes::ModeBasis basis_s,
                       modes::ModeBasis basis_i, std::optional<QstConfig> qst)
    : grid_(grid), spec_(spec), basis_s_(std::move(basis_s)), basis_i_(std::move(basis_i)), qst_(std::move(qst)) {
  spec_.validate();
  if (basis_s_.grid() != grid_ || basis_i_.grid() != grid_)
    throw ConfigError("measurement bases must use the simulation grid");
  if (qst_) {
    if (qst_->subspace_s.size() != qst_->subspace_i.size())
      throw ConfigError("tomography subspaces differ in dimension");
    if (qst_->d() < 2) throw ConfigError("tomography needs d >= 2");
    qst_pos_s_ = observables::subspace_positions(qst_->subspace_s, basis_s_.indices());
    qst_pos_i_ = observables::subspace_positions(qst_->subspace_i, basis_i_.indices());
  }
}

void Experiment::set_n_realizations(std::size_t n) {
  if (n < 2) throw ConfigError("n_realizations must be at least 2");
  spec_.n_realizations = n;
}

Experiment::Prepared Experiment::prepare(const ParamSet& theta) const {
  theta.validate(spec_);
  Prepared p{structure::build_pump(theta.pump, grid_), structure::build_crystal(theta.crystal, spec_, grid_), {}};
  p.model = std::make_shared<solver::SplitStepModel>(grid_, spec_, p.crystal, p.pump);
  return p;
}

observables::Coefficients Experiment::project_all(const Prepared& p, std::uint64_t seed) const {
  observables::Coefficients c;
  const std::size_t R = spec_.n_realizations;
  c.resize(R, basis_s_.size(), basis_i_.size());
  parallel_for(
      R,
      [&](std::size_t r) {
        solver::FieldSet fs(grid_.size());
        solver::init_realization(fs, grid_, seed, r, kNoiseScale);
        p.model->forward(fs);
        observables::project_realization(fs, basis_s_, basis_i_, c, r);
      },
      workers_);
  return c;
}

Evaluation Experiment::observe(observables::Coefficients c, bool with_density) const {
  Evaluation ev;
  ev.moments = observables::moments_from_coefficients(c);
  ev.moments.signal_modes = basis_s_.indices();
  ev.moments.idler_modes = basis_i_.indices();
  ev.g2_raw = observables::g2_from_moments(ev.moments);
  if (ev.g2_raw.sum() > 0.0) {
    ev.g2 = ev.g2_raw.normalized_copy();
  } else {
    log::warn("no coincidences were generated; the coincidence matrix is left unnormalized");
    ev.g2 = ev.g2_raw;
  }
  ev.mean_pairs = ev.moments.N_s.trace().real();
  if (with_density) {
    if (!qst_) throw ConfigError("density requested but no tomography subspace is configured");
    auto table = observables::projections_from_moments(ev.moments, qst_pos_s_, qst_pos_i_);
    ev.density = observables::reconstruct_density(table, qst_->d());
    ev.density->subspace_s = qst_->subspace_s;
    ev.density->subspace_i = qst_->subspace_i;
  }
  return ev;
}

Evaluation Experiment::evaluate(const ParamSet& theta, std::uint64_t seed, bool with_density) const {
  const auto p = prepare(theta);
  return observe(project_all(p, seed), with_density);
}

double Experiment::loss(const ParamSet& theta, const objectives::LossSpec& loss, const objectives::Targets& targets,
                        std::uint64_t seed) const {
  const auto ev = evaluate(theta, seed, loss.needs_density());
  if (!ev.g2.normalized) throw EvaluationError("no coincidences: the loss is undefined");
  objectives::Produced pr;
  pr.coincidence = ev.g2.values;
  if (ev.density) pr.density = ev.density->rho;
  const double l = objectives::composite_loss(loss, pr, targets);
  if (!std::isfinite(l)) throw EvaluationError("loss is not finite");
  return l;
}

double Experiment::loss_and_gradient(const ParamSet& theta, const objectives::LossSpec& loss,
                                     const objectives::Targets& targets, std::uint64_t seed,
                                     std::vector<double>& grad) const {
  const auto p = prepare(theta);
  const auto c = project_all(p, seed);
  const auto ev = observe(c, loss.needs_density());
  if (!ev.g2.normalized) throw EvaluationError("no coincidences: the loss is undefined");
  objectives::Produced pr;
  pr.coincidence = ev.g2.values;
  if (ev.density) pr.density = ev.density->rho;
  const double l = objectives::composite_loss(loss, pr, targets);
  if (!std::isfinite(l)) throw EvaluationError("loss is not finite");
  const auto lg = objectives::composite_loss_grad(loss, pr, targets);

  // Observables -> moments -> mode coefficients.
  auto gm = observables::MomentSet::zeros_like(ev.moments);
  if (lg.coincidence) {
    const auto graw = observables::normalize_backward(ev.g2_raw, *lg.coincidence);
    add_into(gm, observables::g2_backward(ev.moments, ev.g2_raw, graw));
  }
  if (lg.density) {
    const auto table = observables::projections_from_moments(ev.moments, qst_pos_s_, qst_pos_i_);
    const auto gp = observables::reconstruct_density_backward(table, qst_->d(), *lg.density);
    observables::projections_backward(ev.moments, qst_pos_s_, qst_pos_i_, gp, gm);
  }
  const auto gc = observables::moments_backward(c, gm);

  // Coefficients -> couplings, replaying each realization with its trajectory.
  const std::size_t R = spec_.n_realizations, nz = spec_.n_z, n = grid_.size();
  const std::size_t n_chunks = (R + kChunk - 1) / kChunk;
  std::vector<CplxVec> total(nz, CplxVec(n, cplx(0.0)));
  std::vector<std::vector<CplxVec>> bufs;
  for (std::size_t w0 = 0; w0 < n_chunks; w0 += kWave) {
    const std::size_t nw = std::min(kWave, n_chunks - w0);
    bufs.resize(nw);
    parallel_for(
        nw,
        [&](std::size_t k) {
          auto& buf = bufs[k];
          buf.assign(nz, CplxVec(n, cplx(0.0)));
          solver::FieldSet fs(n), gf(n);
          std::vector<solver::FieldSet> traj;
          const std::size_t r0 = (w0 + k) * kChunk, r1 = std::min(R, r0 + kChunk);
          for (std::size_t r = r0; r < r1; ++r) {
            solver::init_realization(fs, grid_, seed, r, kNoiseScale);
            p.model->forward(fs, &traj);
            observables::project_realization_backward(gc, r, basis_s_, basis_i_, gf);
            p.model->backward(traj, gf, buf);
          }
        },
        workers_);
    for (std::size_t k = 0; k < nw; ++k)
      for (std::size_t j = 0; j < nz; ++j)
        for (std::size_t i = 0; i < n; ++i) total[j][i] += bufs[k][j][i];
  }

  // Couplings -> structure -> packed scalars.
  const auto gpump = structure::build_pump_backward(theta.pump, grid_, p.model->pump_gradient(total));
  const auto gcrys = structure::build_crystal_backward(theta.crystal, spec_, grid_, p.model->chi_gradient(total));
  grad.assign(theta.n_scalars(), 0.0);
  std::copy(gpump.begin(), gpump.end(), grad.begin());
  std::copy(gcrys.begin(), gcrys.end(), grad.begin() + static_cast<long>(theta.crystal_offset()));
  for (double g : grad)
    if (!std::isfinite(g)) throw EvaluationError("gradient is not finite");
  return l;
}

std::vector<double> finite_difference_gradient(const std::function<double(const ParamSet&)>& f,
                                               const ParamSet& theta, double step) {
  if (!(step >= 1e-7 && step <= 1e-2)) throw ConfigError("fd_step must lie in [1e-7, 1e-2]");
  const auto base = theta.pack();
  const auto mask = theta.mask();
  std::vector<double> g(base.size(), 0.0);
  ParamSet t = theta;
  for (std::size_t k = 0; k < base.size(); ++k) {
    if (!mask[k]) continue;
    auto v = base;
    v[k] = base[k] + step;
    t.unpack(v);
    const double lp = f(t);
    v[k] = base[k] - step;
    t.unpack(v);
    const double lm = f(t);
    g[k] = (lp - lm) / (2.0 * step);
  }
  return g;
}

ExperimentObjective::ExperimentObjective(const Experiment& experiment, objectives::LossSpec loss,
                                         objectives::Targets targets, GradientMode mode, NoisePolicy noise,
                                         double fd_step)
    : exp_(experiment), loss_(std::move(loss)), targets_(std::move(targets)), mode_(mode), noise_(noise),
      fd_step_(fd_step) {
  loss_.validate();
}

std::uint64_t ExperimentObjective::seed_for(std::size_t epoch) const {
  return noise_ == NoisePolicy::fixed ? exp_.spec().seed : mix_seed(exp_.spec().seed, epoch);
}

double ExperimentObjective::value(const ParamSet& theta, std::size_t epoch) {
  return exp_.loss(theta, loss_, targets_, seed_for(epoch));
}

double ExperimentObjective::value_and_gradient(const ParamSet& theta, std::size_t epoch, std::vector<double>& grad) {
  const auto seed = seed_for(epoch);
  if (mode_ == GradientMode::adjoint) return exp_.loss_and_gradient(theta, loss_, targets_, seed, grad);
  grad = finite_difference_gradient([&](const ParamSet& t) { return exp_.loss(t, loss_, targets_, seed); }, theta,
                                    fd_step_);
  return exp_.loss(theta, loss_, targets_, seed);
}

namespace {

const char* method_name(Method m) {
  switch (m) {
    case Method::gd: return "gd";
    case Method::momentum: return "momentum";
    case Method::adam: return "adam";
  }
  return "?";
}

}  // namespace

void OptimizerConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
  if (!(fd_step >= 1e-7 && fd_step <= 1e-2)) throw ConfigError("fd_step must lie in [1e-7, 1e-2]");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in (0, 1)");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
  if (!(min_waist > 0.0)) throw ConfigError("min_waist must be positive");
}

io::json OptimizerConfig::to_json() const {
  return io::json{{"max_epochs", max_epochs},
                  {"learning_rate", learning_rate},
                  {"decay", decay},
                  {"decay_every", decay_every},
                  {"method", method_name(method)},
                  {"momentum", momentum},
                  {"beta2", beta2},
                  {"tolerance", tolerance},
                  {"patience", patience},
                  {"gradient_mode", gradient_mode == GradientMode::adjoint ? "adjoint" : "finite_difference"},
                  {"fd_step", fd_step},
                  {"noise", noise == NoisePolicy::fixed ? "fixed" : "resampled"},
                  {"min_waist_um", min_waist}};
}

OptimizerConfig OptimizerConfig::from_json(const io::json& j) {
  io::reject_unknown_keys(j,
                          {"max_epochs", "learning_rate", "decay", "decay_every", "method", "momentum", "beta2",
                           "tolerance", "patience", "gradient_mode", "fd_step", "noise", "min_waist_um"},
                          "optimizer");
  OptimizerConfig c;
  try {
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.decay = j.value("decay", c.decay);
    c.decay_every = j.value("decay_every", c.decay_every);
    c.momentum = j.value("momentum", c.momentum);
    c.beta2 = j.value("beta2", c.beta2);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.patience = j.value("patience", c.patience);
    c.fd_step = j.value("fd_step", c.fd_step);
    c.min_waist = j.value("min_waist_um", c.min_waist);
    const auto m = j.value("method", std::string("gd"));
    if (m == "gd")
      c.method = Method::gd;
    else if (m == "momentum")
      c.method = Method::momentum;
    else if (m == "adam")
      c.method = Method::adam;
    else
      throw ConfigError("optimizer.method: unknown value '" + m + "'");
    const auto g = j.value("gradient_mode", std::string("adjoint"));
    if (g == "adjoint")
      c.gradient_mode = GradientMode::adjoint;
    else if (g == "finite_difference")
      c.gradient_mode = GradientMode::finite_difference;
    else
      throw ConfigError("optimizer.gradient_mode: unknown value '" + g + "'");
    const auto nz = j.value("noise", std::string("fixed"));
    if (nz == "fixed")
      c.noise = NoisePolicy::fixed;
    else if (nz == "resampled")
      c.noise = NoisePolicy::resampled;
    else
      throw ConfigError("optimizer.noise: unknown value '" + nz + "'");
  } catch (const io::json::exception& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
  c.validate();
  return c;
}

void TrainingHistory::write_jsonl(std::ostream& os) const {
  for (const auto& e : epochs) {
    io::json j{{"epoch", e.epoch},          {"loss", e.loss},   {"best_loss", e.best_loss},
               {"learning_rate", e.learning_rate}, {"grad_norm", e.grad_norm}, {"seconds", e.seconds}};
    io::json p = io::json::object();
    for (std::size_t k = 0; k < e.params.size() && k < scalar_names.size(); ++k) p[scalar_names[k]] = e.params[k];
    j["params"] = std::move(p);
    os << j.dump() << '\n';
  }
}

TrainingResult optimize(const ParamSet& initial, Objective& objective, const OptimizerConfig& cfg,
                        const EpochCallback& on_epoch) {
  cfg.validate();
  if (initial.n_learnable() == 0) throw ConfigError("no learnable parameters");
  const auto mask = initial.mask();
  const std::size_t ns = initial.n_scalars();
  std::vector<bool> is_waist(ns, false);
  for (std::size_t k = initial.pump_waist_offset(); k < initial.crystal_offset(); ++k) is_waist[k] = true;
  for (std::size_t k = initial.crystal_waist_offset(); k < ns; ++k) is_waist[k] = true;

  TrainingResult out;
  out.history.scalar_names = initial.scalar_names();
  ParamSet theta = initial;
  std::vector<double> x = theta.pack(), grad, m1(ns, 0.0), m2(ns, 0.0);
  double initial_loss = 0.0;
  std::size_t above = 0, since_best = 0;
  double ref_best = 0.0;
  out.best = initial;
  out.best_loss = INFINITY;
  out.history.stop_reason = "max_epochs";
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr =
        cfg.learning_rate * (cfg.decay_every ? std::pow(cfg.decay, static_cast<double>(epoch / cfg.decay_every)) : 1.0);
    const double l = objective.value_and_gradient(theta, epoch, grad);
    if (!std::isfinite(l)) throw EvaluationError("loss is not finite at epoch " + std::to_string(epoch));
    if (epoch == 0) {
      initial_loss = l;
      ref_best = l;
    }
    if (l < out.best_loss) {
      out.best_loss = l;
      out.best = theta;
    }
    double gn = 0.0;
    for (std::size_t k = 0; k < ns; ++k)
      if (mask[k]) gn += grad[k] * grad[k];
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = l;
    rec.best_loss = out.best_loss;
    rec.learning_rate = lr;
    rec.grad_norm = std::sqrt(gn);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.params = x;
    out.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    above = l > 10.0 * initial_loss && initial_loss > 0.0 ? above + 1 : 0;
    if (above >= cfg.patience) {
      out.history.stop_reason = "diverged";
      throw TrainingDiverged("loss above 10x its initial value for " + std::to_string(cfg.patience) + " epochs",
                             out.history);
    }
    if (cfg.tolerance > 0.0) {
      if (ref_best - out.best_loss > cfg.tolerance) {
        ref_best = out.best_loss;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        out.history.stop_reason = "converged";
        break;
      }
    }
    if (epoch + 1 == cfg.max_epochs) break;

    const double t = static_cast<double>(epoch + 1);
    for (std::size_t k = 0; k < ns; ++k) {
      if (!mask[k]) continue;
      double step = 0.0;
      switch (cfg.method) {
        case Method::gd:
          step = lr * grad[k];
          break;
        case Method::momentum:
          m1[k] = cfg.momentum * m1[k] + grad[k];
          step = lr * m1[k];
          break;
        case Method::adam: {
          m1[k] = cfg.momentum * m1[k] + (1.0 - cfg.momentum) * grad[k];
          m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
          const double mh = m1[k] / (1.0 - std::pow(cfg.momentum, t));
          const double vh = m2[k] / (1.0 - std::pow(cfg.beta2, t));
          step = lr * mh / (std::sqrt(vh) + 1e-12);
          break;
        }
      }
      x[k] -= step;
      if (is_waist[k]) x[k] = std::max(x[k], cfg.min_waist);
    }
    theta.unpack(x);
  }
  log::info("optimize: " + out.history.stop_reason + " after " + std::to_string(out.history.epochs.size()) +
            " epochs, best loss " + std::to_string(out.best_loss));
  return out;
}

std::string perturb_mode_name(PerturbMode m) { return m == PerturbMode::multiplicative ? "multiplicative" : "additive"; }

ParamSet perturb_crystal(const ParamSet& theta, double sigma, PerturbMode mode, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be >= 0");
  ParamSet out = theta;
  if (sigma == 0.0) return out;
  RngStream rng(seed, 0);
  for (auto& a : out.crystal.coeffs) {
    const double delta = sigma * rng.normal();
    a = mode == PerturbMode::multiplicative ? a * (1.0 + delta) : a + delta;
  }
  return out;
}

Recovery recover_by_waist(const ParamSet& original, const ParamSet& perturbed, Objective& objective,
                          const OptimizerConfig& cfg) {
  Recovery r;
  r.original_loss = objective.value(original, 0);
  if (perturbed.crystal.coeffs == original.crystal.coeffs && perturbed.crystal.waists == original.crystal.waists) {
    // Nothing to undo.
    r.recovered = perturbed;
    r.perturbed_loss = r.recovered_loss = objective.value(perturbed, 0);
    r.history.scalar_names = perturbed.scalar_names();
    r.history.stop_reason = "unperturbed";
    return r;
  }
  ParamSet start = perturbed;
  start.freeze_all();
  start.set_learn_pump_waists(true);
  auto res = optimize(start, objective, cfg);
  r.perturbed_loss = res.history.epochs.front().loss;
  r.recovered = res.best;
  r.recovered.pump.learn_coeffs = perturbed.pump.learn_coeffs;
  r.recovered.pump.learn_waists = perturbed.pump.learn_waists;
  r.recovered.crystal.learn_coeffs = perturbed.crystal.learn_coeffs;
  r.recovered.crystal.learn_waists = perturbed.crystal.learn_waists;
  r.recovered_loss = res.best_loss;
  r.history = std::move(res.history);
  return r;
}

}  // namespace spdc::inverse
