#include <cmath>
#include <random>

#include "doctest.h"
#include "spdc/core/errors.hpp"
#include "spdc/objectives/objectives.hpp"
#include "spdc/oracle/oracle.hpp"

using namespace spdc;
using namespace spdc::objectives;
using modes::ModeIndex;

namespace {

RMat row(std::initializer_list<double> v) {
  RMat m(1, v.size());
  int k = 0;
  for (double x : v) m(0, k++) = x;
  return m;
}

RMat random_dist(int r, int c, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RMat m(r, c);
  for (int k = 0; k < m.size(); ++k) m.data()[k] = u(eng);
  return m / m.sum();
}

CMat random_density(int d, std::mt19937_64& eng) {
  std::normal_distribution<double> n;
  CMat g(d, d);
  for (int k = 0; k < g.size(); ++k) g.data()[k] = {n(eng), n(eng)};
  CMat r = g * g.adjoint();
  return r / r.trace().real();
}

}  // namespace

TEST_CASE("KL divergence") {
  auto p = row({0.2, 0.3, 0.5});
  CHECK(std::abs(kl_divergence(p, p)) < 1e-12);
  CHECK(kl_divergence(row({1, 0}), row({0.5, 0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(kl_divergence(row({0.75, 0.25}), row({0.5, 0.5})) == doctest::Approx(0.13081).epsilon(1e-4));
  CHECK(kl_divergence(row({0.5, 0.5}), row({1, 0})) == doctest::Approx(0.5 * std::log(0.5 / 1e-10) + 0.5 * std::log(0.5)));
  CHECK_THROWS_AS(kl_divergence(row({0.5, 0.6}), p.leftCols(2)), NormalizationError);
  std::mt19937_64 eng(1);
  for (int t = 0; t < 50; ++t) CHECK(kl_divergence(random_dist(3, 3, eng), random_dist(3, 3, eng)) >= 0.0);
}

TEST_CASE("L1 distance") {
  auto p = row({0.2, 0.3, 0.5});
  CHECK(l1_distance(p, p) == 0.0);
  CHECK(l1_distance(row({1, 0}), row({0, 1})) == 2.0);
  CHECK_THROWS_AS(l1_distance(p, row({1, 0})), ShapeError);
  std::mt19937_64 eng(2);
  for (int t = 0; t < 50; ++t) {
    auto a = random_dist(2, 3, eng), b = random_dist(2, 3, eng), c = random_dist(2, 3, eng);
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-15);
  }
}

TEST_CASE("trace distance") {
  CMat z = CMat::Zero(2, 2), o = CMat::Zero(2, 2);
  z(0, 0) = 1;
  o(1, 1) = 1;
  CHECK(std::abs(trace_distance(z, z)) < 1e-15);
  CHECK(trace_distance(z, o) == doctest::Approx(1.0));
  CHECK(trace_distance(z, CMat::Identity(2, 2) / 2.0) == doctest::Approx(0.5));
  CMat bad = z;
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(trace_distance(bad, z), EvaluationError);
  std::mt19937_64 eng(3);
  for (int t = 0; t < 50; ++t) {
    auto a = random_density(2, eng), b = random_density(2, eng), c = random_density(2, eng);
    const double ab = trace_distance(a, b);
    CHECK(std::abs(ab - trace_distance(b, a)) < 1e-10);
    CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-10);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0 + 1e-12);
  }
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937_64 eng(4);
  auto p = random_dist(3, 3, eng), q = random_dist(3, 3, eng);
  auto gk = kl_divergence_grad_q(p, q), gl = l1_distance_grad_q(p, q);
  const double h = 1e-7;
  for (int k = 0; k < q.size(); ++k) {
    RMat a = q, b = q;
    a.data()[k] += h;
    b.data()[k] -= h;
    // the KL normalization guard is bypassed by renormalizing p and q together
    auto kl = [&](const RMat& x) {
      double s = 0;
      for (int i = 0; i < p.size(); ++i) s += p.data()[i] * std::log(p.data()[i] / std::max(x.data()[i], kKlFloor));
      return s;
    };
    CHECK(gk.data()[k] == doctest::Approx((kl(a) - kl(b)) / (2 * h)).epsilon(1e-6));
    double la = (a - p).cwiseAbs().sum(), lb = (b - p).cwiseAbs().sum();
    CHECK(gl.data()[k] == doctest::Approx((la - lb) / (2 * h)).epsilon(1e-6));
  }
  auto a = random_density(3, eng), b = random_density(3, eng);
  CMat g = trace_distance_grad_a(a, b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int part = 0; part < 2; ++part) {
        // Hermitian perturbation of entries (i, j) and (j, i) together
        CMat e = CMat::Zero(3, 3);
        e(i, j) += part == 0 ? cplx(1) : cplx(0, 1);
        e(j, i) += part == 0 ? cplx(1) : cplx(0, -1);
        if (i == j && part == 1) continue;
        const double fd = (trace_distance(a + 1e-7 * e, b) - trace_distance(a - 1e-7 * e, b)) / 2e-7;
        const double ad = (g.conjugate().array() * e.array()).sum().real();
        CHECK(ad == doctest::Approx(fd).epsilon(1e-5));
      }
}

TEST_CASE("composite loss") {
  std::mt19937_64 eng(5);
  auto p = random_dist(3, 3, eng), q = random_dist(3, 3, eng);
  Targets t;
  t.coincidence["bell"] = p;
  Produced pr;
  pr.coincidence = q;
  LossSpec kl{{{Kind::KL, 1.0, "bell"}}};
  CHECK(composite_loss(kl, pr, t) == doctest::Approx(kl_divergence(p, q)));
  LossSpec zero{{{Kind::KL, 0.0, "bell"}, {Kind::L1, 0.0, "bell"}}};
  CHECK(composite_loss(zero, pr, t) == 0.0);
  LossSpec both{{{Kind::KL, 1.0, "bell"}, {Kind::L1, 1.0, "bell"}}};
  CHECK(composite_loss(both, pr, t) == doctest::Approx(kl_divergence(p, q) + l1_distance(p, q)));
  auto def = LossSpec::default_composite("bell");
  CHECK(composite_loss(def, pr, t) == doctest::Approx(kl_divergence(p, q) + 0.5 * l1_distance(p, q)));
  auto g = composite_loss_grad(both, pr, t);
  CHECK(g.coincidence->isApprox(kl_divergence_grad_q(p, q) + l1_distance_grad_q(p, q)));
  LossSpec missing{{{Kind::L1, 1.0, "ghz"}}};
  CHECK_THROWS_AS(composite_loss(missing, pr, t), ConfigError);
  CHECK_THROWS_AS(LossSpec{}.validate(), ConfigError);
  auto j = def.to_json();
  CHECK(LossSpec::from_json(j).to_json() == j);
  j["terms"][0]["kind"] = "Fidelity";
  CHECK_THROWS_AS(LossSpec::from_json(j), ConfigError);
}

TEST_CASE("oracle pair amplitude") {
  const auto g = make_grid(64, 64, 2.5e-6, 2.5e-6);
  InteractionSpec s = degenerate_interaction(405e-9, 1.0, 0.2e-3, 8);
  modes::ModeBasis b(modes::lg_window(2, 0), 22e-6, g);
  auto pump = structure::build_pump(structure::pump_from_modes({ModeIndex::lg(1, 0)}, {1.0}, 30e-6), g);
  auto cr = structure::build_crystal(structure::uniform_crystal(), s, g);
  auto amp = oracle::perturbative_amplitude(pump, cr, b, b, s);
  CHECK(amp.C.norm() == doctest::Approx(1.0));
  auto g2 = oracle::oracle_g2(amp);
  double off = 0;
  for (std::size_t qi = 0; qi < b.size(); ++qi)
    for (std::size_t qs = 0; qs < b.size(); ++qs)
      if (b.indices()[qi].l() + b.indices()[qs].l() != 1) off += g2.values(qi, qs);
  CHECK(off < 1e-12);
  CHECK(g2.sum() == doctest::Approx(1.0));
  // symmetric under signal/idler exchange for the degenerate interaction
  CHECK((g2.values - g2.values.transpose()).norm() < 1e-12);

  // quasi phase matching: a poled crystal with dk = 2 pi / period reaches 2/pi
  // of the perfectly phase-matched amplitude
  InteractionSpec qpm = s;
  qpm.n_z = 400;
  qpm.poling_period = s.length / 10;
  qpm.delta_k_override = 2 * M_PI / *qpm.poling_period;
  InteractionSpec pm = s;
  pm.n_z = 400;
  const double a_qpm =
      oracle::perturbative_amplitude(pump, structure::build_crystal(structure::uniform_crystal(), qpm, g), b, b, qpm).normalization;
  const double a_pm =
      oracle::perturbative_amplitude(pump, structure::build_crystal(structure::uniform_crystal(), pm, g), b, b, pm).normalization;
  CHECK(a_qpm / a_pm == doctest::Approx(2 / M_PI).epsilon(0.03));

  auto zero = amp;
  zero.C.setZero();
  CHECK_THROWS_AS(oracle::oracle_g2(zero), NormalizationError);
}
