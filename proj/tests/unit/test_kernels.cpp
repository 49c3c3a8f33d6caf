#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "spdc/core/grid.hpp"
#include "spdc/kernels/kernels.hpp"

using spdc::CplxVec;
using spdc::RealVec;
using spdc::cplx;
namespace k = spdc::kernels;

namespace {
CplxVec random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> d;
  CplxVec v(n);
  for (auto& x : v) x = {d(eng), d(eng)};
  return v;
}

struct Coeffs {
  RealVec ch, sh, dsh;
  CplxVec kk, g;
};

Coeffs coeffs_for(const CplxVec& g) {
  Coeffs c;
  c.g = g;
  for (const auto& gi : g) {
    const double r = std::abs(gi);
    const double t = r * r;
    const double s = r > 0 ? std::sinh(r) / r : 1.0;
    c.ch.push_back(std::cosh(r));
    c.sh.push_back(s);
    c.dsh.push_back(t < 1e-6 ? 1.0 / 6.0 + t / 60.0 : (std::cosh(r) - s) / (2.0 * t));
    c.kk.push_back(cplx(0, -1) * gi * s);
  }
  return c;
}

double max_diff(const CplxVec& a, const CplxVec& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<const k::KernelTable*> tables() {
  std::vector<const k::KernelTable*> t{&k::scalar_table()};
  if (k::avx2_table() && k::cpu_has_avx2()) t.push_back(k::avx2_table());
  return t;
}
}  // namespace

TEST_CASE("two-mode squeezer closed form") {
  for (auto* t : tables()) {
    CAPTURE(t->name);
    const double r = 0.7;
    auto c = coeffs_for(CplxVec{cplx(r, 0)});
    CplxVec a{1.0}, b{0.0};
    t->squeeze(a.data(), b.data(), c.ch.data(), c.kk.data(), 1);
    CHECK(std::abs(a[0] - std::cosh(r)) < 1e-14);
    CHECK(std::abs(b[0] - cplx(0, -std::sinh(r))) < 1e-14);
  }
}

TEST_CASE("squeeze preserves |a|^2 - |b|^2") {
  const std::size_t n = 37;
  auto g = random_vec(n, 1);
  for (auto& x : g) x *= 0.3;
  auto c = coeffs_for(g);
  for (auto* t : tables()) {
    auto a = random_vec(n, 2), b = random_vec(n, 3);
    std::vector<double> before(n);
    for (std::size_t i = 0; i < n; ++i) before[i] = std::norm(a[i]) - std::norm(b[i]);
    t->squeeze(a.data(), b.data(), c.ch.data(), c.kk.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double after = std::norm(a[i]) - std::norm(b[i]);
      CHECK(std::abs(after - before[i]) <= 1e-10 * std::max(1.0, std::abs(before[i])));
    }
  }
}

TEST_CASE("coupling gradient matches finite differences") {
  // L = Re(conj(wa) a') + Re(conj(wb) b') has gradient wa, wb w.r.t. (a', b').
  const std::size_t n = 5;
  auto g = random_vec(n, 4);
  for (auto& x : g) x *= 0.5;
  g[0] = 1e-5;  // small-|g| series branch
  auto a = random_vec(n, 5), b = random_vec(n, 6), wa = random_vec(n, 7), wb = random_vec(n, 8);
  auto loss = [&](const CplxVec& gg) {
    auto c = coeffs_for(gg);
    auto a1 = a, b1 = b;
    k::scalar_table().squeeze(a1.data(), b1.data(), c.ch.data(), c.kk.data(), n);
    double l = 0;
    for (std::size_t i = 0; i < n; ++i)
      l += std::real(std::conj(wa[i]) * a1[i]) + std::real(std::conj(wb[i]) * b1[i]);
    return l;
  };
  auto c = coeffs_for(g);
  for (auto* t : tables()) {
    CAPTURE(t->name);
    CplxVec grad(n);
    k::SqueezeCoeffs sc{c.ch.data(), c.kk.data(), c.g.data(), c.sh.data(), c.dsh.data()};
    t->squeeze_coupling_grad(a.data(), b.data(), wa.data(), wb.data(), sc, grad.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 1e-6;
      auto gp = g, gm = g;
      gp[i] += h;
      gm[i] -= h;
      const double dre = (loss(gp) - loss(gm)) / (2 * h);
      gp = g;
      gm = g;
      gp[i] += cplx(0, h);
      gm[i] -= cplx(0, h);
      const double dim = (loss(gp) - loss(gm)) / (2 * h);
      CHECK(std::abs(grad[i].real() - dre) < 1e-7);
      CHECK(std::abs(grad[i].imag() - dim) < 1e-7);
    }
  }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const auto* v = k::avx2_table();
  if (!v || !k::cpu_has_avx2()) {
    MESSAGE("AVX2 variant not available; skipped");
    return;
  }
  const auto& s = k::scalar_table();
  for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 64u, 129u}) {
    CAPTURE(n);
    auto a = random_vec(n, 10), b = random_vec(n, 11);
    auto a1 = a, a2 = a;
    s.cmul(a1.data(), b.data(), n);
    v->cmul(a2.data(), b.data(), n);
    CHECK(max_diff(a1, a2) < 1e-14);

    const cplx d1 = s.dot_conj(a.data(), b.data(), n), d2 = v->dot_conj(a.data(), b.data(), n);
    CHECK(std::abs(d1 - d2) < 1e-12 * (1.0 + n));

    auto y1 = b, y2 = b;
    s.axpy(cplx(0.3, -1.2), a.data(), y1.data(), n);
    v->axpy(cplx(0.3, -1.2), a.data(), y2.data(), n);
    CHECK(max_diff(y1, y2) < 1e-14);

    auto g = random_vec(n, 12);
    for (auto& x : g) x *= 0.4;
    auto c = coeffs_for(g);
    auto sa = a, sb = b, va = a, vb = b;
    s.squeeze(sa.data(), sb.data(), c.ch.data(), c.kk.data(), n);
    v->squeeze(va.data(), vb.data(), c.ch.data(), c.kk.data(), n);
    CHECK(max_diff(sa, va) < 1e-13);
    CHECK(max_diff(sb, vb) < 1e-13);

    auto wa = random_vec(n, 13), wb = random_vec(n, 14);
    CplxVec g1(n), g2(n);
    k::SqueezeCoeffs sc{c.ch.data(), c.kk.data(), c.g.data(), c.sh.data(), c.dsh.data()};
    s.squeeze_coupling_grad(a.data(), b.data(), wa.data(), wb.data(), sc, g1.data(), n);
    v->squeeze_coupling_grad(a.data(), b.data(), wa.data(), wb.data(), sc, g2.data(), n);
    CHECK(max_diff(g1, g2) < 1e-12);
  }
}
