#include "spdc/modes/modes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <tuple>

#include "spdc/core/errors.hpp"
#include "spdc/core/log.hpp"
#include "spdc/kernels/kernels.hpp"

namespace spdc::modes {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

// Generalized Laguerre L_n^{alpha}(x) by upward recurrence.
double laguerre(int n, int alpha, double x) {
  if (n < 0) return 0.0;
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

// Physicists' Hermite H_n(x).
double hermite(int n, double x) {
  if (n < 0) return 0.0;
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double lg_norm(int l, int p) {
  const int a = std::abs(l);
  return std::sqrt(2.0 * factorial(p) / (kPi * factorial(p + a)));
}

// 1D normalized HG factor f_n(s), s = x / w (without the 1/sqrt(w)).
double hg_factor(int n, double s) {
  const double c = std::pow(2.0 / kPi, 0.25) / std::sqrt(std::ldexp(1.0, n) * factorial(n));
  return c * hermite(n, std::sqrt(2.0) * s) * std::exp(-s * s);
}

// s f_n'(s)
double hg_factor_scaled_derivative(int n, double s) {
  const double c = std::pow(2.0 / kPi, 0.25) / std::sqrt(std::ldexp(1.0, n) * factorial(n));
  const double r2 = std::sqrt(2.0);
  const double dh = n > 0 ? 2.0 * n * hermite(n - 1, r2 * s) * r2 : 0.0;
  return c * s * (dh - 2.0 * s * hermite(n, r2 * s)) * std::exp(-s * s);
}

void check_waist(double waist) {
  if (!(waist > 0.0) || !std::isfinite(waist)) throw ConfigError("mode waist must be positive");
}

void check_truncation(const ModeIndex& idx, double waist, const TransverseGrid& grid,
                      const ComplexField& f) {
  const double deficit = std::abs(1.0 - f.power());
  const double window = std::min(grid.extent_x(), grid.extent_y());
  if (deficit > 1e-3) {
    std::ostringstream os;
    os << idx.label() << " with waist " << waist << " m is truncated by the " << window
       << " m window (norm deficit " << deficit << ")";
    throw NormalizationError(os.str());
  }
  if (waist > window / 3.0) {
    std::ostringstream os;
    os << idx.label() << " waist " << waist << " m exceeds a third of the window";
    log::warn(os.str());
  }
}

}  // namespace

ModeIndex ModeIndex::lg(int l, int p) {
  ModeIndex m{Family::LG, l, p};
  m.validate();
  return m;
}

ModeIndex ModeIndex::hg(int nx, int ny) {
  ModeIndex m{Family::HG, nx, ny};
  m.validate();
  return m;
}

void ModeIndex::validate() const {
  if (family == Family::LG && b < 0) throw ConfigError("LG radial index p must be >= 0");
  if (family == Family::HG && (a < 0 || b < 0)) throw ConfigError("HG indices must be >= 0");
}

std::string ModeIndex::label() const {
  std::ostringstream os;
  if (family == Family::LG)
    os << "LG(l=" << a << ",p=" << b << ")";
  else
    os << "HG(" << a << "," << b << ")";
  return os.str();
}

ComplexField lg_mode(const ModeIndex& idx, double waist, const TransverseGrid& grid) {
  if (idx.family != Family::LG) throw ConfigError("lg_mode called with " + idx.label());
  idx.validate();
  check_waist(waist);
  const int l = idx.l();
  const int a = std::abs(l);
  const int p = idx.p();
  const double norm = lg_norm(l, p) / waist;
  ComplexField f(grid);
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double y = grid.y()[iy];
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double x = grid.x()[ix];
      const double u2 = (x * x + y * y) / (waist * waist);
      const double radial = std::pow(2.0 * u2, 0.5 * a) * laguerre(p, a, 2.0 * u2) * std::exp(-u2);
      const double phi = std::atan2(y, x);
      f(ix, iy) = norm * radial * std::polar(1.0, l * phi);
    }
  }
  return f;
}

ComplexField hg_mode(const ModeIndex& idx, double waist, const TransverseGrid& grid) {
  if (idx.family != Family::HG) throw ConfigError("hg_mode called with " + idx.label());
  idx.validate();
  check_waist(waist);
  std::vector<double> fx(grid.nx()), fy(grid.ny());
  for (std::size_t ix = 0; ix < grid.nx(); ++ix) fx[ix] = hg_factor(idx.nx(), grid.x()[ix] / waist);
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) fy[iy] = hg_factor(idx.ny(), grid.y()[iy] / waist);
  ComplexField f(grid);
  for (std::size_t iy = 0; iy < grid.ny(); ++iy)
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) f(ix, iy) = fx[ix] * fy[iy] / waist;
  return f;
}

ComplexField mode_field(const ModeIndex& idx, double waist, const TransverseGrid& grid) {
  ComplexField f = idx.family == Family::LG ? lg_mode(idx, waist, grid) : hg_mode(idx, waist, grid);
  check_truncation(idx, waist, grid, f);
  return f;
}

// Modes scale as (1/w) F(r/w), so dPhi/dw = -(Phi + r.grad Phi) / w.
ComplexField mode_waist_derivative(const ModeIndex& idx, double waist, const TransverseGrid& grid) {
  idx.validate();
  check_waist(waist);
  ComplexField d(grid);
  const double w2 = waist * waist;
  if (idx.family == Family::LG) {
    const int l = idx.l();
    const int a = std::abs(l);
    const int p = idx.p();
    const double norm = lg_norm(l, p);
    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
      const double y = grid.y()[iy];
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        const double x = grid.x()[ix];
        const double u2 = (x * x + y * y) / w2;
        const double lead = std::pow(2.0 * u2, 0.5 * a) * std::exp(-u2);
        const double lag = laguerre(p, a, 2.0 * u2);
        const double radial = lead * lag;
        // u R'(u) = R (a - 2u^2) - 4 u^2 lead L_{p-1}^{a+1}(2u^2)
        const double u_dr = radial * (a - 2.0 * u2) - 4.0 * u2 * lead * laguerre(p - 1, a + 1, 2.0 * u2);
        const double phi = std::atan2(y, x);
        d(ix, iy) = -(norm / w2) * (radial + u_dr) * std::polar(1.0, l * phi);
      }
    }
    return d;
  }
  const int nx = idx.nx();
  const int ny = idx.ny();
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double t = grid.y()[iy] / waist;
    const double gy = hg_factor(ny, t);
    const double tgy = hg_factor_scaled_derivative(ny, t);
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double s = grid.x()[ix] / waist;
      const double fx = hg_factor(nx, s);
      const double sfx = hg_factor_scaled_derivative(nx, s);
      d(ix, iy) = -(fx * gy + sfx * gy + fx * tgy) / w2;
    }
  }
  return d;
}

std::shared_ptr<const ComplexField> cached_mode(const ModeIndex& idx, double waist,
                                                const TransverseGrid& grid) {
  using Key = std::tuple<int, int, int, double, std::size_t, std::size_t, double, double>;
  static std::shared_mutex mutex;
  static std::map<Key, std::shared_ptr<const ComplexField>> cache;
  constexpr std::size_t kMaxEntries = 2048;

  const Key key{static_cast<int>(idx.family), idx.a, idx.b, waist, grid.nx(), grid.ny(), grid.dx(),
                grid.dy()};
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto field = std::make_shared<const ComplexField>(mode_field(idx, waist, grid));
  std::unique_lock lock(mutex);
  if (cache.size() >= kMaxEntries) cache.clear();
  return cache.emplace(key, std::move(field)).first->second;
}

ModeBasis::ModeBasis(std::vector<ModeIndex> indices, std::vector<double> waists,
                     const TransverseGrid& grid, double gram_tolerance)
    : grid_(grid) {
  if (indices.empty()) throw ConfigError("mode basis must not be empty");
  if (waists.size() != indices.size()) throw ShapeError("one waist per basis mode required");
  for (const auto& idx : indices) {
    idx.validate();
    if (idx.family != indices.front().family)
      throw ConfigError("a mode basis may not mix LG and HG modes");
  }
  std::vector<std::size_t> order(indices.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return indices[x] < indices[y]; });
  for (std::size_t k : order) {
    indices_.push_back(indices[k]);
    waists_.push_back(waists[k]);
  }
  for (std::size_t k = 1; k < indices_.size(); ++k)
    if (indices_[k] == indices_[k - 1])
      throw ConfigError("duplicate basis mode " + indices_[k].label());
  for (std::size_t k = 0; k < indices_.size(); ++k)
    fields_.push_back(cached_mode(indices_[k], waists_[k], grid_));

  const auto g = gram();
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) {
      const double dev = std::abs(g[i][j] - (i == j ? 1.0 : 0.0));
      if (dev > gram_tolerance) {
        std::ostringstream os;
        os << "basis is not orthonormal on this grid: <" << indices_[i].label() << ", "
           << indices_[j].label() << "> deviates by " << dev;
        throw NormalizationError(os.str());
      }
    }
}

ModeBasis::ModeBasis(std::vector<ModeIndex> indices, double waist, const TransverseGrid& grid,
                     double gram_tolerance)
    : ModeBasis(indices, std::vector<double>(indices.size(), waist), grid, gram_tolerance) {}

long ModeBasis::find(const ModeIndex& idx) const {
  for (std::size_t k = 0; k < indices_.size(); ++k)
    if (indices_[k] == idx) return static_cast<long>(k);
  return -1;
}

std::vector<std::vector<cplx>> ModeBasis::gram() const {
  std::vector<std::vector<cplx>> g(size(), std::vector<cplx>(size()));
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) g[i][j] = inner_product(*fields_[i], *fields_[j]);
  return g;
}

std::vector<ModeIndex> lg_window(int l_max, int p_max) { return lg_window(-l_max, l_max, 0, p_max); }

std::vector<ModeIndex> lg_window(int l_min, int l_max, int p_min, int p_max) {
  std::vector<ModeIndex> out;
  for (int l = l_min; l <= l_max; ++l)
    for (int p = p_min; p <= p_max; ++p) out.push_back(ModeIndex::lg(l, p));
  return out;
}

std::vector<ModeIndex> hg_window(int nx_max, int ny_max) {
  std::vector<ModeIndex> out;
  for (int nx = 0; nx <= nx_max; ++nx)
    for (int ny = 0; ny <= ny_max; ++ny) out.push_back(ModeIndex::hg(nx, ny));
  return out;
}

std::vector<cplx> decompose(const ComplexField& field, const ModeBasis& basis) {
  if (field.grid() != basis.grid()) throw ShapeError("decompose: field and basis grids differ");
  std::vector<cplx> c(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) c[k] = inner_product(basis.mode(k), field);
  return c;
}

ComplexField synthesize(const std::vector<cplx>& coeffs, const ModeBasis& basis) {
  if (coeffs.size() != basis.size()) throw ShapeError("synthesize: coefficient count mismatch");
  ComplexField f(basis.grid());
  const auto& k = kernels::active();
  for (std::size_t q = 0; q < basis.size(); ++q) k.axpy(coeffs[q], basis.mode(q).data(), f.data(), f.size());
  return f;
}

}  // namespace spdc::modes
