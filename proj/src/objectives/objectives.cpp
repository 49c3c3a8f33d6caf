#include "spdc/objectives/objectives.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "spdc/core/errors.hpp"

namespace spdc::objectives {

namespace {

void check_same_shape(const RMat& p, const RMat& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) throw ShapeError("distributions differ in shape");
}

void check_normalized(const RMat& m, const char* which) {
  if (std::abs(m.sum() - 1.0) > 1e-9) throw NormalizationError(std::string(which) + " is not normalized");
}

void check_hermitian(const CMat& m, const char* which) {
  if (m.rows() != m.cols()) throw ShapeError(std::string(which) + " is not square");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw EvaluationError(std::string(which) + " is not Hermitian");
}

}  // namespace

double kl_divergence(const RMat& p, const RMat& q) {
  check_same_shape(p, q);
  check_normalized(p, "p");
  check_normalized(q, "q");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p(i);
    if (pi <= 0.0) continue;
    acc += pi * std::log(pi / std::max(q(i), kKlFloor));
  }
  return acc;
}

RMat kl_divergence_grad_q(const RMat& p, const RMat& q) {
  check_same_shape(p, q);
  RMat g = RMat::Zero(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0 && q(i) > kKlFloor) g(i) = -p(i) / q(i);
  return g;
}

double l1_distance(const RMat& p, const RMat& q) {
  check_same_shape(p, q);
  return (p - q).cwiseAbs().sum();
}

RMat l1_distance_grad_q(const RMat& p, const RMat& q) {
  check_same_shape(p, q);
  RMat g(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double d = q(i) - p(i);
    g(i) = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  return g;
}

double trace_distance(const CMat& a, const CMat& b) {
  check_hermitian(a, "first density matrix");
  check_hermitian(b, "second density matrix");
  if (a.rows() != b.rows()) throw ShapeError("density matrices differ in dimension");
  const CMat diff = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

CMat trace_distance_grad_a(const CMat& a, const CMat& b) {
  const CMat diff = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(diff);
  Eigen::VectorXd s = es.eigenvalues().unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  return 0.5 * es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::KL:
      return "kl";
    case Kind::L1:
      return "l1";
    case Kind::TraceDistance:
      return "trace_distance";
  }
  return "?";
}

void LossSpec::validate() const {
  if (terms.empty()) throw ConfigError("loss needs at least one term");
  for (const auto& t : terms)
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) throw ConfigError("loss weights must be finite and >= 0");
}

bool LossSpec::needs_density() const {
  for (const auto& t : terms)
    if (t.kind == Kind::TraceDistance) return true;
  return false;
}

bool LossSpec::needs_coincidence() const {
  for (const auto& t : terms)
    if (t.kind != Kind::TraceDistance) return true;
  return false;
}

io::json LossSpec::to_json() const {
  io::json arr = io::json::array();
  for (const auto& t : terms) arr.push_back({{"kind", kind_name(t.kind)}, {"weight", t.weight}, {"target", t.target}});
  return io::json{{"terms", arr}};
}

LossSpec LossSpec::from_json(const io::json& j) {
  io::reject_unknown_keys(j, {"terms"}, "loss");
  if (!j.contains("terms") || !j["terms"].is_array()) throw ConfigError("loss: \"terms\" must be an array");
  LossSpec s;
  for (std::size_t k = 0; k < j["terms"].size(); ++k) {
    const auto& t = j["terms"][k];
    const std::string where = "loss.terms[" + std::to_string(k) + "]";
    io::reject_unknown_keys(t, {"kind", "weight", "target"}, where);
    LossTerm term;
    const std::string kind = t.value("kind", "");
    if (kind == "kl")
      term.kind = Kind::KL;
    else if (kind == "l1")
      term.kind = Kind::L1;
    else if (kind == "trace_distance")
      term.kind = Kind::TraceDistance;
    else
      throw ConfigError(where + ": kind must be kl, l1 or trace_distance");
    if (t.contains("weight")) {
      if (!t["weight"].is_number()) throw ConfigError(where + ": weight must be a number");
      term.weight = t["weight"].get<double>();
    }
    term.target = t.value("target", term.kind == Kind::TraceDistance ? "density" : "coincidence");
    s.terms.push_back(term);
  }
  s.validate();
  return s;
}

LossSpec LossSpec::default_composite(const std::string& target) {
  return LossSpec{{LossTerm{Kind::KL, 1.0, target}, LossTerm{Kind::L1, 0.5, target}}};
}

namespace {

const RMat& coincidence_target(const Targets& t, const std::string& name) {
  auto it = t.coincidence.find(name);
  if (it == t.coincidence.end()) throw ConfigError("loss target \"" + name + "\" (coincidence) is missing");
  return it->second;
}

const CMat& density_target(const Targets& t, const std::string& name) {
  auto it = t.density.find(name);
  if (it == t.density.end()) throw ConfigError("loss target \"" + name + "\" (density) is missing");
  return it->second;
}

}  // namespace

double composite_loss(const LossSpec& spec, const Produced& produced, const Targets& targets) {
  spec.validate();
  double total = 0.0;
  for (const auto& t : spec.terms) {
    double v = 0.0;
    if (t.kind == Kind::TraceDistance) {
      const auto& target = density_target(targets, t.target);
      if (!produced.density) throw ConfigError("loss needs a density matrix but none was produced");
      v = trace_distance(*produced.density, target);
    } else {
      const auto& target = coincidence_target(targets, t.target);
      if (!produced.coincidence) throw ConfigError("loss needs a coincidence matrix but none was produced");
      v = t.kind == Kind::KL ? kl_divergence(target, *produced.coincidence) : l1_distance(target, *produced.coincidence);
    }
    total += t.weight * v;
  }
  return total;
}

LossGradient composite_loss_grad(const LossSpec& spec, const Produced& produced, const Targets& targets) {
  spec.validate();
  LossGradient g;
  for (const auto& t : spec.terms) {
    if (t.kind == Kind::TraceDistance) {
      const auto& target = density_target(targets, t.target);
      if (!produced.density) throw ConfigError("loss needs a density matrix but none was produced");
      CMat d = t.weight * trace_distance_grad_a(*produced.density, target);
      g.density = g.density ? CMat(*g.density + d) : d;
    } else {
      const auto& target = coincidence_target(targets, t.target);
      if (!produced.coincidence) throw ConfigError("loss needs a coincidence matrix but none was produced");
      RMat d = t.weight * (t.kind == Kind::KL ? kl_divergence_grad_q(target, *produced.coincidence)
                                              : l1_distance_grad_q(target, *produced.coincidence));
      g.coincidence = g.coincidence ? RMat(*g.coincidence + d) : d;
    }
  }
  return g;
}

}  // namespace spdc::objectives
