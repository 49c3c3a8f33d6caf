#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spdc/io/json_util.hpp"
#include "spdc/observables/observables.hpp"

namespace spdc::objectives {

using observables::CMat;
using observables::RMat;

inline constexpr double kKlFloor = 1e-10;

// sum p log(p / max(q, 1e-10)); both arguments must sum to 1 within 1e-9.
double kl_divergence(const RMat& p, const RMat& q);
RMat kl_divergence_grad_q(const RMat& p, const RMat& q);
double l1_distance(const RMat& p, const RMat& q);
RMat l1_distance_grad_q(const RMat& p, const RMat& q);
// 1/2 sum |eig(a - b)|; inputs must be Hermitian within 1e-8.
double trace_distance(const CMat& a, const CMat& b);
// dL/da in the complex convention dL/dRe + i dL/dIm.
CMat trace_distance_grad_a(const CMat& a, const CMat& b);

enum class Kind { KL, L1, TraceDistance };
std::string kind_name(Kind k);

struct LossTerm {
  Kind kind = Kind::KL;
  double weight = 1.0;
  std::string target = "coincidence";
};

struct LossSpec {
  std::vector<LossTerm> terms;

  void validate() const;
  bool needs_density() const;
  bool needs_coincidence() const;
  io::json to_json() const;
  static LossSpec from_json(const io::json& j);
  // KL 1.0 + L1 0.5 against one coincidence target.
  static LossSpec default_composite(const std::string& target = "coincidence");
};

struct Targets {
  std::map<std::string, RMat> coincidence;  // normalized
  std::map<std::string, CMat> density;
};

struct Produced {
  std::optional<RMat> coincidence;  // normalized
  std::optional<CMat> density;
};

struct LossGradient {
  std::optional<RMat> coincidence;
  std::optional<CMat> density;
};

double composite_loss(const LossSpec& spec, const Produced& produced, const Targets& targets);
LossGradient composite_loss_grad(const LossSpec& spec, const Produced& produced, const Targets& targets);

}  // namespace spdc::objectives
