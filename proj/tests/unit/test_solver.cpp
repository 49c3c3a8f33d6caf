#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "spdc/core/errors.hpp"
#include "spdc/oracle/oracle.hpp"
#include "spdc/solver/solver.hpp"

using namespace spdc;
using namespace spdc::solver;
using modes::ModeIndex;

namespace {

const TransverseGrid& grid64() {
  static const TransverseGrid g = make_grid(64, 64, 2.5e-6, 2.5e-6);
  return g;
}

double second_moment_radius(const ComplexField& f) {
  const auto& g = f.grid();
  double p = 0, mx = 0;
  for (std::size_t iy = 0; iy < g.ny(); ++iy)
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const double a = std::norm(f(ix, iy));
      p += a;
      mx += a * g.x()[ix] * g.x()[ix];
    }
  return 2.0 * std::sqrt(mx / p);
}

// Deterministic first-order pair amplitude: a unit signal mode with its waist
// at the crystal center is launched into signal_out and the generated idler_vac
// is projected onto the idler mode at the center plane.
cplx probe_amplitude(const InteractionSpec& spec, const structure::Crystal& crystal, const ComplexField& pump,
                     const ComplexField& phi_s, const ComplexField& phi_i) {
  SplitStepModel model(phi_s.grid(), spec, crystal, pump);
  FieldSet fs(phi_s.size());
  const auto launched = diffract(phi_s, spec.k_s(), -spec.length / 2);
  std::copy(launched.values().begin(), launched.values().end(), fs[Stack::signal_out].begin());
  model.forward(fs);
  return inner_product(phi_i, ComplexField(phi_s.grid(), fs[Stack::idler_vac]));
}

}  // namespace

TEST_CASE("init_vacuum statistics and determinism") {
  const auto& g = grid64();
  InteractionSpec s;
  s.n_realizations = 3;
  s.seed = 42;
  auto a = init_vacuum(g, s, 1.0);
  auto b = init_vacuum(g, s, 1.0);
  const double var = 1.0 / g.cell_area();
  cplx mean = 0.0, cov = 0.0;
  double v = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mean += a.field(Stack::signal_out, 0)[i];
    v += std::norm(a.field(Stack::signal_out, 0)[i]);
    cov += a.field(Stack::signal_out, 0)[i] * std::conj(a.field(Stack::signal_out, 1)[i]);
    CHECK(a.field(Stack::signal_vac, 0)[i] == cplx(0.0));
    CHECK(a.field(Stack::idler_out, 2)[i] == b.field(Stack::idler_out, 2)[i]);
  }
  const double n = static_cast<double>(g.size());
  mean /= n;
  cov /= n;
  CHECK(std::abs(mean) < 5 * std::sqrt(var / n));
  CHECK(v / n == doctest::Approx(var).epsilon(5 / std::sqrt(n)));
  CHECK(std::abs(cov) < 5 * var / std::sqrt(n));
  // any split of the ensemble reproduces the same realizations
  auto tail = init_vacuum(g, s, 1.0, 2, 1);
  for (std::size_t i = 0; i < g.size(); i += 13)
    CHECK(tail.field(Stack::idler_out, 0)[i] == a.field(Stack::idler_out, 2)[i]);
  CHECK_THROWS_AS(init_vacuum(g, s, 0.0), ConfigError);
  s.n_realizations = 1;
  CHECK_THROWS_AS(init_vacuum(g, s, 1.0), ConfigError);
}

TEST_CASE("linear_half_step") {
  const auto& g = grid64();
  InteractionSpec s;
  s.n_realizations = 2;
  auto st = init_vacuum(g, s, 1.0);
  auto ref = st;
  linear_half_step(st, s, 1e-18);
  double err = 0, p0 = 0, p1 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(st.field(Stack::signal_out, 1)[i] - ref.field(Stack::signal_out, 1)[i]));
  CHECK(err < 1e-12 * std::sqrt(1.0 / g.cell_area()));
  linear_half_step(st, s, 3e-3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    p0 += std::norm(ref.field(Stack::idler_out, 0)[i]);
    p1 += std::norm(st.field(Stack::idler_out, 0)[i]);
  }
  CHECK(std::abs(p1 - p0) < 1e-10 * p0);

  ComplexField flat(g);
  for (std::size_t i = 0; i < g.size(); ++i) flat[i] = cplx(0.3, -0.7);
  auto moved = diffract(flat, s.k_s(), 5e-3);
  for (std::size_t i = 0; i < g.size(); i += 7) CHECK(std::abs(moved[i] - flat[i]) < 1e-12);
}

TEST_CASE("Gaussian beam radius follows w(z)") {
  const auto g = make_grid(128, 128, 2e-6, 2e-6);
  const double w0 = 20e-6, k = 2 * M_PI / 810e-9;
  const double zr = k * w0 * w0 / 2;
  auto f = modes::lg_mode(ModeIndex::lg(0, 0), w0, g);
  CHECK(second_moment_radius(f) == doctest::Approx(w0).epsilon(1e-3));
  for (double z : {0.5e-3, 1.5e-3, 3e-3}) {
    const double expect = w0 * std::sqrt(1 + (z / zr) * (z / zr));
    CHECK(second_moment_radius(diffract(f, k, z)) == doctest::Approx(expect).epsilon(5e-3));
  }
}

TEST_CASE("nonlinear_step closed forms and invariants") {
  const auto one = make_grid(1, 1, 1.0, 1.0);
  InteractionSpec s = degenerate_interaction(405e-9, 1.0, 1e-3, 1);
  s.n_realizations = 2;
  s.gain = 0.7;
  EnsembleState st(one, 1);
  st.field(Stack::signal_out, 0)[0] = 1.0;
  structure::CrystalSlice sl{ComplexField(one), 0.0};
  sl.chi[0] = 1.0;
  ComplexField pump(one);
  pump[0] = 1.0;
  nonlinear_step(st, sl, pump, s, 1.0);
  CHECK(std::abs(st.field(Stack::signal_out, 0)[0] - std::cosh(0.7)) < 1e-14);
  CHECK(std::abs(st.field(Stack::idler_vac, 0)[0] - cplx(0, -std::sinh(0.7))) < 1e-14);

  const auto& g = grid64();
  s.gain = 0.05;
  auto a = init_vacuum(g, s, 1.0);
  auto pr = structure::build_pump(structure::gaussian_pump(30e-6), g);
  auto cr = structure::build_crystal(structure::uniform_crystal(), s, g);
  auto b = a;
  structure::CrystalSlice zero{ComplexField(g), 0.5e-3};
  nonlinear_step(b, zero, pr, s, 1e-3);
  nonlinear_step(b, cr[0], ComplexField(g), s, 1e-3);
  for (std::size_t i = 0; i < g.size(); i += 5) CHECK(b.field(Stack::signal_out, 1)[i] == a.field(Stack::signal_out, 1)[i]);

  auto balance = [&](const EnsembleState& e, Stack out, Stack vac) {
    double d = 0, tot = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      d += std::norm(e.field(out, 0)[i]) - std::norm(e.field(vac, 0)[i]);
      tot += std::norm(e.field(out, 0)[i]);
    }
    return std::pair{d, tot};
  };
  linear_half_step(b, s, 1e-4);
  nonlinear_step(b, cr[0], pr, s, 1e-3);
  auto [d0, t0] = balance(b, Stack::signal_out, Stack::idler_vac);
  auto [e0, u0] = balance(b, Stack::idler_out, Stack::signal_vac);
  nonlinear_step(b, cr[0], pr, s, 1e-3);
  auto [d1, t1] = balance(b, Stack::signal_out, Stack::idler_vac);
  auto [e1, u1] = balance(b, Stack::idler_out, Stack::signal_vac);
  CHECK(t1 > 1.01 * t0);
  CHECK(std::abs(d1 - d0) < 1e-10 * t1);
  CHECK(std::abs(e1 - e0) < 1e-10 * u1);
}

TEST_CASE("propagate without coupling is pure diffraction") {
  const auto& g = grid64();
  InteractionSpec s = degenerate_interaction(405e-9, 1.0, 2e-3, 8);
  s.n_realizations = 2;
  s.chi2_magnitude = 0.0;
  auto pump = structure::build_pump(structure::gaussian_pump(30e-6), g);
  auto cr = structure::build_crystal(structure::uniform_crystal(), s, g);
  auto st = init_vacuum(g, s, 1.0);
  auto ref = st;
  auto phi = modes::lg_mode(ModeIndex::lg(1, 0), 20e-6, g);
  auto launched = diffract(phi, s.k_s(), -s.length / 2);
  std::copy(launched.values().begin(), launched.values().end(), st.field(Stack::signal_vac, 1));
  propagate(st, cr, pump, s);
  CHECK(st.zeta == doctest::Approx(s.length));
  auto expect = diffract(ref.field_copy(Stack::idler_out, 0), s.k_i(), s.length);
  for (std::size_t i = 0; i < g.size(); i += 3) CHECK(std::abs(st.field(Stack::idler_out, 0)[i] - expect[i]) < 1e-9 * std::abs(expect[i]) + 1e-6);
  refocus(st, s);
  CHECK(std::abs(inner_product(phi, st.field_copy(Stack::signal_vac, 1))) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("propagate determinism across worker counts and checkpoint") {
  const auto& g = grid64();
  InteractionSpec s = degenerate_interaction(405e-9, 1.0, 1e-3, 6);
  s.n_realizations = 9;
  s.gain = 0.02;
  s.seed = 5;
  auto pump = structure::build_pump(structure::gaussian_pump(30e-6), g);
  auto cr = structure::build_crystal(structure::uniform_crystal(), s, g);
  auto a = init_vacuum(g, s, 1.0), b = a, c = a;
  propagate(a, cr, pump, s, 1);
  propagate(b, cr, pump, s, 2);
  propagate(c, cr, pump, s, 8);
  bool same = true;
  for (int k = 0; k < 4; ++k)
    for (std::size_t r = 0; r < s.n_realizations; ++r)
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto st = static_cast<Stack>(k);
        same = same && a.field(st, r)[i] == b.field(st, r)[i] && a.field(st, r)[i] == c.field(st, r)[i];
      }
  CHECK(same);

  const auto path = (std::filesystem::temp_directory_path() / "spdc_ckpt_test.bin").string();
  a.save(path);
  auto back = EnsembleState::load_file(path);
  std::filesystem::remove(path);
  CHECK(back.count() == a.count());
  CHECK(back.zeta == a.zeta);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) same = same && back.field(Stack::idler_vac, 8)[i] == a.field(Stack::idler_vac, 8)[i];
  CHECK(same);
  CHECK_THROWS_AS(EnsembleState::load_file(path), ConfigError);
}

TEST_CASE("numeric blowup reports the step") {
  const auto& g = grid64();
  InteractionSpec s = degenerate_interaction(405e-9, 1.0, 1e-3, 4);
  s.n_realizations = 2;
  s.gain = 1e300;
  auto pump = structure::build_pump(structure::gaussian_pump(30e-6), g);
  auto cr = structure::build_crystal(structure::uniform_crystal(), s, g);
  auto st = init_vacuum(g, s, 1.0);
  try {
    propagate(st, cr, pump, s, 1);
    FAIL("expected NumericBlowup");
  } catch (const NumericBlowup& e) {
    CHECK(e.step() == 0);
  }
}

TEST_CASE("thin crystal pair amplitude matches the perturbative oracle and scales with L") {
  const auto& g = grid64();
  auto pump = structure::build_pump(structure::gaussian_pump(30e-6), g);
  modes::ModeBasis basis(modes::lg_window(1, 0), 25e-6, g);
  double prev = 0;
  for (double len : {25e-6, 50e-6, 100e-6}) {
    InteractionSpec s = degenerate_interaction(405e-9, 1.0, len, 8);
    s.gain = 0.01;
    auto cr = structure::build_crystal(structure::uniform_crystal(), s, g);
    auto amp = oracle::perturbative_amplitude(pump, cr, basis, basis, s);
    const long q0 = basis.find(ModeIndex::lg(0, 0));
    const cplx expect = cplx(0, -s.gain) * amp.C(q0, q0) * amp.normalization;
    const cplx got = probe_amplitude(s, cr, pump, basis.mode(q0), basis.mode(q0));
    CHECK(std::abs(got - expect) < 0.01 * std::abs(expect));
    // conservation of OAM: LG(1) signal pairs only with LG(-1) idler
    const cplx off = probe_amplitude(s, cr, pump, basis.mode(basis.find(ModeIndex::lg(1, 0))), basis.mode(q0));
    CHECK(std::abs(off) < 1e-10 * std::abs(got));
    const double p = std::norm(got);
    if (prev > 0) CHECK(p / prev == doctest::Approx(4.0).epsilon(0.01));
    prev = p;
  }
}

TEST_CASE("split-step convergence is second order") {
  const auto& g = grid64();
  auto pump = structure::build_pump(structure::gaussian_pump(12e-6), g);
  auto phi_s = modes::lg_mode(ModeIndex::lg(0, 0), 14e-6, g);
  auto phi_i = modes::lg_mode(ModeIndex::lg(0, 1), 14e-6, g);
  auto run = [&](std::size_t nz) {
    InteractionSpec s = degenerate_interaction(405e-9, 1.0, 2e-3, nz);
    s.delta_k_override = 3e3;
    s.gain = 4e-3;
    auto cr = structure::build_crystal(structure::uniform_crystal(), s, g);
    return probe_amplitude(s, cr, pump, phi_s, phi_i);
  };
  const cplx ref = run(256);
  std::vector<double> lx, ly;
  for (std::size_t nz : {2, 4, 8, 16, 32}) {
    lx.push_back(std::log(1.0 / nz));
    ly.push_back(std::log(std::abs(run(nz) - ref)));
  }
  for (std::size_t k = 1; k < lx.size(); ++k) {
    const double slope = (ly[k] - ly[k - 1]) / (lx[k] - lx[k - 1]);
    CAPTURE(k);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
  }
  CHECK(std::abs(run(16) - run(32)) < 0.01 * std::abs(ref));
}
