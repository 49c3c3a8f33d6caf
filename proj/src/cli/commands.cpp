#include "spdc/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spdc/cli/artifacts.hpp"
#include "spdc/core/errors.hpp"
#include "spdc/core/log.hpp"
#include "spdc/core/parallel.hpp"
#include "spdc/core/rng.hpp"
#include "spdc/objectives/objectives.hpp"

#ifndef SPDC_VERSION
#define SPDC_VERSION "0.0.0"
#endif

namespace spdc::cli {

namespace fs = std::filesystem;
using io::json;
using observables::CMat;

std::string version() { return SPDC_VERSION; }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Applies the overrides and returns the resolved output directory.
fs::path prepare(ExperimentConfig& cfg, const RunOptions& opts) {
  log::set_level(opts.quiet ? log::Level::error : log::Level::info);
  if (opts.seed) cfg.interaction.seed = *opts.seed;
  if (opts.workers) {
    if (*opts.workers == 0) throw ConfigError("--workers must be at least 1");
    set_default_workers(*opts.workers);
  }
  return opts.out ? *opts.out : cfg.output.directory;
}

json cmat_json(const CMat& m) {
  std::vector<std::vector<cplx>> rows(m.rows(), std::vector<cplx>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  return io::complex_matrix(rows);
}

json moments_json(const inverse::Evaluation& ev) {
  const auto& m = ev.moments;
  json j;
  j["n_realizations"] = m.n_realizations;
  j["mean_pairs_signal"] = m.N_s.trace().real();
  j["mean_pairs_idler"] = m.N_i.trace().real();
  j["hermiticity_residual"] = m.hermiticity_residual();
  j["statistical_tolerance"] = m.tolerance();
  j["g2_raw_sum"] = ev.g2_raw.sum();
  j["clip_mass"] = ev.g2_raw.clip_mass;
  j["N_s"] = cmat_json(m.N_s);
  j["N_i"] = cmat_json(m.N_i);
  j["A"] = cmat_json(m.A);
  j["C"] = cmat_json(m.C);
  return j;
}

std::vector<std::string> evaluation_warnings(const inverse::Evaluation& ev) {
  std::vector<std::string> w;
  if (!ev.g2.normalized)
    w.push_back("near-zero coincidences: no pairs were generated (check gain and chi2_magnitude)");
  else if (ev.g2_raw.clip_mass > 0.01 * ev.g2_raw.sum())
    w.push_back("clip mass exceeds 1% of the coincidence total; increase n_realizations");
  if (ev.mean_pairs > 0.1) w.push_back("mean pair number above 0.1: outside the weak-pair regime");
  for (const auto& s : w) log::warn(s);
  return w;
}

void write_g2(ArtifactWriter& out, const std::string& stem, const observables::CoincidenceMatrix& g2,
              const OutputConfig& oc) {
  out.json(stem + ".json", g2.to_json());
  if (oc.csv) out.text(stem + ".csv", g2.to_csv());
  if (oc.images) out.heatmap(stem + ".ppm", g2.values);
}

json base_report(const std::string& command, const ExperimentConfig& cfg) {
  json r;
  r["command"] = command;
  r["tool"] = "spdc";
  r["version"] = version();
  r["config"] = cfg.source.string();
  r["seed"] = cfg.interaction.seed;
  r["workers"] = default_workers();
  r["n_realizations"] = cfg.interaction.n_realizations;
  return r;
}

void finish(ArtifactWriter& out, const std::string& command, const ExperimentConfig& cfg, json& report) {
  out.json("report.json", report);
  json m;
  m["tool"] = "spdc";
  m["version"] = version();
  m["command"] = command;
  m["config_sha256"] = sha256_hex(cfg.document.dump());
  m["seed"] = cfg.interaction.seed;
  m["files"] = out.files();
  out.json("manifest.json", m);
}

inverse::Experiment experiment_for(const ExperimentConfig& cfg) {
  auto exp = cfg.make_experiment();
  exp.set_workers(default_workers());
  return exp;
}

objectives::Produced produced_from(const inverse::Evaluation& ev) {
  objectives::Produced p;
  if (ev.g2.normalized) p.coincidence = ev.g2.values;
  if (ev.density) p.density = ev.density->rho;
  return p;
}

void write_history(ArtifactWriter& out, const inverse::TrainingHistory& h) {
  std::ostringstream os;
  h.write_jsonl(os);
  out.text("history.jsonl", os.str());
}

}  // namespace

RunResult cmd_simulate(ExperimentConfig cfg, const RunOptions& opts) {
  const auto dir = prepare(cfg, opts);
  const auto exp = experiment_for(cfg);
  ArtifactWriter out(dir);
  const auto t0 = Clock::now();
  const auto ev = exp.evaluate(cfg.parameters, cfg.interaction.seed, cfg.tomography.has_value());
  const double secs = seconds_since(t0);

  write_g2(out, "g2", ev.g2, cfg.output);
  out.json("moments.json", moments_json(ev));
  if (ev.density) out.json("density.json", ev.density->to_json());

  json report = base_report("simulate", cfg);
  report["seconds"] = secs;
  report["mean_pairs"] = ev.mean_pairs;
  report["clip_mass"] = ev.g2_raw.clip_mass;
  report["warnings"] = evaluation_warnings(ev);
  if (cfg.loss) report["loss"] = objectives::composite_loss(*cfg.loss, produced_from(ev), cfg.targets);
  finish(out, "simulate", cfg, report);
  log::info("simulate: wrote " + dir.string());
  return {dir, report};
}

RunResult cmd_learn(ExperimentConfig cfg, const RunOptions& opts) {
  const auto dir = prepare(cfg, opts);
  if (!cfg.loss) throw ConfigError("learn: the config needs targets and a loss");
  if (cfg.parameters.n_learnable() == 0) throw ConfigError("learn: no learnable parameters");
  const auto exp = experiment_for(cfg);
  ArtifactWriter out(dir);
  inverse::ExperimentObjective objective(exp, *cfg.loss, cfg.targets, cfg.optimizer.gradient_mode,
                                         cfg.optimizer.noise, cfg.optimizer.fd_step);
  const bool with_density = cfg.loss->needs_density() || cfg.tomography.has_value();
  const auto seed = cfg.interaction.seed;

  const auto t0 = Clock::now();
  const auto ev0 = exp.evaluate(cfg.parameters, seed, with_density);
  write_g2(out, "g2_initial", ev0.g2, cfg.output);

  json report = base_report("learn", cfg);
  inverse::TrainingHistory partial;
  partial.scalar_names = cfg.parameters.scalar_names();
  auto on_epoch = [&](const inverse::EpochRecord& e) {
    partial.epochs.push_back(e);
    write_history(out, partial);
    std::ostringstream os;
    os << "epoch " << e.epoch << " loss " << e.loss << " best " << e.best_loss << " |grad| " << e.grad_norm;
    log::info(os.str());
  };

  inverse::TrainingResult res;
  try {
    res = inverse::optimize(cfg.parameters, objective, cfg.optimizer, on_epoch);
  } catch (const inverse::TrainingDiverged& e) {
    write_history(out, e.history());
    report["stop_reason"] = "diverged";
    report["error"] = e.what();
    report["seconds"] = seconds_since(t0);
    finish(out, "learn", cfg, report);
    throw;
  } catch (const Error& e) {
    report["stop_reason"] = "failed";
    report["error"] = e.what();
    report["seconds"] = seconds_since(t0);
    finish(out, "learn", cfg, report);
    throw;
  }
  write_history(out, res.history);
  out.json("theta.json", res.best.to_json());

  const auto ev1 = exp.evaluate(res.best, seed, with_density);
  write_g2(out, "g2_final", ev1.g2, cfg.output);
  out.json("moments_final.json", moments_json(ev1));
  if (ev1.density) out.json("density_final.json", ev1.density->to_json());

  const double loss0 = res.history.epochs.front().loss;
  json cmp;
  cmp["initial_loss"] = loss0;
  cmp["final_loss"] = res.best_loss;
  cmp["epochs"] = res.history.epochs.size();
  cmp["stop_reason"] = res.history.stop_reason;
  const auto names = cfg.parameters.scalar_names();
  const auto mask = cfg.parameters.mask();
  const auto x0 = cfg.parameters.pack(), x1 = res.best.pack();
  json params = json::array();
  for (std::size_t k = 0; k < names.size(); ++k)
    if (mask[k]) params.push_back({{"name", names[k]}, {"initial", x0[k]}, {"final", x1[k]}});
  cmp["learned"] = params;
  cmp["g2_initial"] = ev0.g2.to_json()["values"];
  cmp["g2_final"] = ev1.g2.to_json()["values"];
  out.json("comparison.json", cmp);

  report["seconds"] = seconds_since(t0);
  report["initial_loss"] = loss0;
  report["final_loss"] = res.best_loss;
  report["epochs"] = res.history.epochs.size();
  report["stop_reason"] = res.history.stop_reason;
  report["mean_pairs"] = ev1.mean_pairs;
  report["clip_mass"] = ev1.g2_raw.clip_mass;
  report["warnings"] = evaluation_warnings(ev1);
  finish(out, "learn", cfg, report);
  log::info("learn: loss " + std::to_string(loss0) + " -> " + std::to_string(res.best_loss));
  return {dir, report};
}

RunResult cmd_tomography(ExperimentConfig cfg, const RunOptions& opts) {
  const auto dir = prepare(cfg, opts);
  if (!cfg.tomography) throw ConfigError("tomography: the config needs measurement.tomography");
  const int d = cfg.tomography->d();
  if (d != 2 && d != 3) throw ConfigError("tomography: dimension " + std::to_string(d) + " is not supported (d = 2 or 3)");
  const auto exp = experiment_for(cfg);
  ArtifactWriter out(dir);
  const auto t0 = Clock::now();
  const auto ev = exp.evaluate(cfg.parameters, cfg.interaction.seed, true);
  const auto& rho = *ev.density;

  out.json("density.json", rho.to_json());
  if (cfg.output.images) {
    out.signed_heatmap("rho_real.ppm", rho.rho.real());
    out.signed_heatmap("rho_imag.ppm", rho.rho.imag());
  }
  write_g2(out, "g2", ev.g2, cfg.output);

  json t;
  t["d"] = d;
  const auto eig = rho.eigenvalues();
  t["eigenvalues"] = std::vector<double>(eig.data(), eig.data() + eig.size());
  t["min_eigenvalue"] = eig.minCoeff();
  t["trace"] = rho.rho.trace().real();
  t["purity"] = (rho.rho * rho.rho).trace().real();
  if (cfg.tomography_target) {
    t["target"] = *cfg.tomography_target;
    t["trace_distance"] = objectives::trace_distance(rho.rho, cfg.targets.density.at(*cfg.tomography_target));
  }
  out.json("tomography.json", t);

  json report = base_report("tomography", cfg);
  report["seconds"] = seconds_since(t0);
  report["tomography"] = t;
  report["warnings"] = evaluation_warnings(ev);
  if (eig.minCoeff() < -1e-9) report["warnings"].push_back("reconstructed state has negative eigenvalues");
  finish(out, "tomography", cfg, report);
  return {dir, report};
}

RunResult cmd_robustness(ExperimentConfig cfg, const RunOptions& opts) {
  const auto dir = prepare(cfg, opts);
  if (!cfg.robustness) throw ConfigError("robustness: the config needs a robustness block with a baseline");
  if (!cfg.loss) throw ConfigError("robustness: the config needs targets and a loss");
  const auto& rc = *cfg.robustness;
  io::json doc;
  {
    std::ifstream in(rc.baseline);
    if (!in) throw ConfigError("robustness.baseline: cannot read " + rc.baseline.string());
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("robustness.baseline: " + std::string(e.what()));
    }
  }
  const auto baseline = structure::ParamSet::from_json(doc);
  baseline.validate(cfg.interaction);
  const auto exp = experiment_for(cfg);
  ArtifactWriter out(dir);
  inverse::ExperimentObjective objective(exp, *cfg.loss, cfg.targets);
  const auto seed = cfg.interaction.seed;
  const auto t0 = Clock::now();

  if (cfg.output.images) out.heatmap("g2_baseline.ppm", exp.evaluate(baseline, seed).g2.values);

  json rows = json::array();
  std::ostringstream csv;
  csv.precision(10);
  csv << "mode,sigma,original_loss,degraded_loss,recovered_loss,recovery_epochs\n";
  for (const auto& [mode, sigmas] : rc.sigmas) {
    const auto name = inverse::perturb_mode_name(mode);
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
      const auto perturbed = inverse::perturb_crystal(baseline, sigmas[k], mode, mix_seed(rc.seed, k));
      const auto rec = inverse::recover_by_waist(baseline, perturbed, objective, rc.recovery);
      json row{{"mode", name},
               {"sigma", sigmas[k]},
               {"original_loss", rec.original_loss},
               {"degraded_loss", rec.perturbed_loss},
               {"recovered_loss", rec.recovered_loss},
               {"recovery_epochs", rec.history.epochs.size()}};
      json waists = json::array();
      for (double w : rec.recovered.pump.waists) waists.push_back(w);
      row["recovered_pump_waists"] = waists;
      rows.push_back(row);
      csv << name << ',' << sigmas[k] << ',' << rec.original_loss << ',' << rec.perturbed_loss << ','
          << rec.recovered_loss << ',' << rec.history.epochs.size() << '\n';
      std::ostringstream log_line;
      log_line << name << " sigma " << sigmas[k] << ": " << rec.original_loss << " -> " << rec.perturbed_loss
               << " -> " << rec.recovered_loss;
      log::info(log_line.str());
      if (cfg.output.images) {
        const std::string stem = "g2_" + name + "_" + std::to_string(k);
        out.heatmap(stem + "_degraded.ppm", exp.evaluate(perturbed, seed).g2.values);
        out.heatmap(stem + "_recovered.ppm", exp.evaluate(rec.recovered, seed).g2.values);
      }
    }
  }
  out.json("robustness.json", rows);
  out.text("robustness.csv", csv.str());

  json report = base_report("robustness", cfg);
  report["seconds"] = seconds_since(t0);
  report["baseline"] = rc.baseline.string();
  report["rows"] = rows.size();
  finish(out, "robustness", cfg, report);
  return {dir, report};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
      dynamic_cast<const MissingDataError*>(&e))
    return 2;
  if (dynamic_cast<const DivergenceError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

int run(const std::string& command, const fs::path& config, const RunOptions& opts) {
  try {
    auto cfg = load_config(config);
    if (command == "simulate")
      cmd_simulate(std::move(cfg), opts);
    else if (command == "learn")
      cmd_learn(std::move(cfg), opts);
    else if (command == "tomography")
      cmd_tomography(std::move(cfg), opts);
    else if (command == "robustness")
      cmd_robustness(std::move(cfg), opts);
    else
      throw ConfigError("unknown command '" + command + "'");
    return 0;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    std::cerr << "error: " << e.what() << '\n';
    return code;
  }
}

}  // namespace spdc::cli
