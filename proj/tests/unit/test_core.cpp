#include <cmath>
#include <random>

#include "doctest.h"
#include "spdc/core/errors.hpp"
#include "spdc/core/fft.hpp"
#include "spdc/core/grid.hpp"
#include "spdc/core/interaction.hpp"
#include "spdc/core/parallel.hpp"
#include "spdc/core/rng.hpp"

using namespace spdc;

namespace {
ComplexField random_field(const TransverseGrid& g, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> n;
  ComplexField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {n(eng), n(eng)};
  return f;
}
}  // namespace

TEST_CASE("make_grid axes") {
  auto g = make_grid(4, 4, 1.0, 1.0);
  CHECK(g.x() == std::vector<double>{-2, -1, 0, 1});
  CHECK(g.x()[g.nx() / 2] == 0.0);
  auto big = make_grid(64, 64, 2e-6, 2e-6);
  CHECK(big.extent_x() == doctest::Approx(128e-6));
  CHECK(big.extent_y() == doctest::Approx(128e-6));
  // symmetric about zero (the extra sample sits at -n/2)
  for (std::size_t i = 1; i < big.nx(); ++i) CHECK(big.x()[i] == -big.x()[big.nx() - i]);
  CHECK_THROWS_AS(make_grid(3, 4, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(4, 4, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(4, 4, 1.0, -1.0), ConfigError);
}

TEST_CASE("frequency axis uses DFT ordering") {
  auto g = make_grid(8, 8, 0.5, 0.5);
  const double dk = 2 * M_PI / (8 * 0.5);
  std::vector<double> expect{0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t i = 0; i < 8; ++i) CHECK(g.kx()[i] == doctest::Approx(expect[i] * dk));
}

TEST_CASE("inner_product") {
  auto g = make_grid(32, 32, 0.1, 0.1);
  auto f = random_field(g, 1);
  f *= 1.0 / std::sqrt(f.power());
  CHECK(std::abs(inner_product(f, f) - 1.0) < 1e-12);
  auto h = cplx(0, 1) * f;
  auto v = inner_product(f, h);
  CHECK(std::abs(v.real()) < 1e-12);
  CHECK(v.imag() == doctest::Approx(1.0).epsilon(1e-12));
  ComplexField zero(g);
  CHECK(std::abs(inner_product(zero, f)) == 0.0);

  auto a = random_field(g, 2), b = random_field(g, 3);
  CHECK(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))) < 1e-12);
  auto aa = inner_product(a, a);
  CHECK(aa.imag() == 0.0);
  CHECK(aa.real() > 0.0);

  ComplexField other(make_grid(16, 32, 0.1, 0.1));
  CHECK_THROWS_AS(inner_product(a, other), ShapeError);
}

TEST_CASE("Parseval through forward and inverse transforms") {
  auto g = make_grid(64, 32, 1e-6, 2e-6);
  auto f = random_field(g, 4);
  const double p0 = f.power();
  Fft2d fft(g);
  fft.forward(f.data());
  double spec = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) spec += std::norm(f[i]);
  CHECK(std::abs(spec / f.size() * g.cell_area() - p0) / p0 < 1e-10);
  fft.inverse(f.data());
  f *= 1.0 / static_cast<double>(f.size());
  CHECK(std::abs(f.power() - p0) / p0 < 1e-10);
}

TEST_CASE("InteractionSpec validation") {
  InteractionSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.delta_k() == doctest::Approx(0.0).epsilon(1e-9));
  s.lambda_s = 800e-9;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = InteractionSpec{};
  s.length = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = InteractionSpec{};
  s.n_realizations = 1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = InteractionSpec{};
  s.poling_period = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  auto d = degenerate_interaction(405e-9, 1.69, 5e-3, 20);
  CHECK(d.k_p() == doctest::Approx(2 * M_PI * 1.69 / 405e-9));
  CHECK(d.zeta(0) == doctest::Approx(0.125e-3));
}

TEST_CASE("RngStream determinism and independence") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool same = true, differ = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal(), y = b.normal(), z = c.normal();
    same = same && x == y;
    differ = differ || x != z;
  }
  CHECK(same);
  CHECK(differ);
  RngStream d(1, 0);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) acc += std::norm(d.complex_normal(3.0));
  CHECK(acc / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 5) throw ConfigError("x"); }, 3),
                  ConfigError);
}
