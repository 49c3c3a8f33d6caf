#include "spdc/core/grid.hpp"

#include <cmath>
#include <numbers>

#include "spdc/core/errors.hpp"
#include "spdc/kernels/kernels.hpp"

namespace spdc {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> centered_axis(std::size_t n, double d) {
  std::vector<double> axis(n);
  const auto half = static_cast<double>(n / 2);
  for (std::size_t i = 0; i < n; ++i) axis[i] = (static_cast<double>(i) - half) * d;
  return axis;
}

std::vector<double> frequency_axis(std::size_t n, double d) {
  std::vector<double> k(n);
  const double scale = 2.0 * std::numbers::pi / (static_cast<double>(n) * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto signed_i = i < (n + 1) / 2 ? static_cast<double>(i)
                                          : static_cast<double>(i) - static_cast<double>(n);
    k[i] = signed_i * scale;
  }
  return k;
}

}  // namespace

TransverseGrid::TransverseGrid(std::size_t nx, std::size_t ny, double dx, double dy)
    : nx_(nx), ny_(ny), dx_(dx), dy_(dy) {
  if (!is_power_of_two(nx) || !is_power_of_two(ny))
    throw ConfigError("grid dimensions must be powers of two, got " + std::to_string(nx) + "x" +
                      std::to_string(ny));
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
    throw ConfigError("grid spacing must be positive and finite");
  x_ = centered_axis(nx, dx);
  y_ = centered_axis(ny, dy);
  kx_ = frequency_axis(nx, dx);
  ky_ = frequency_axis(ny, dy);
}

TransverseGrid make_grid(std::size_t nx, std::size_t ny, double dx, double dy) {
  return TransverseGrid(nx, ny, dx, dy);
}

ComplexField::ComplexField(const TransverseGrid& grid) : grid_(grid), data_(grid.size()) {}

ComplexField::ComplexField(const TransverseGrid& grid, CplxVec values)
    : grid_(grid), data_(std::move(values)) {
  if (data_.size() != grid_.size())
    throw ShapeError("field has " + std::to_string(data_.size()) + " samples, grid expects " +
                     std::to_string(grid_.size()));
}

ComplexField& ComplexField::operator+=(const ComplexField& o) {
  if (grid_ != o.grid_) throw ShapeError("field grids differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexField& ComplexField::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

double ComplexField::power() const {
  double acc = 0.0;
  for (const auto& v : data_) acc += std::norm(v);
  return acc * grid_.cell_area();
}

bool ComplexField::all_finite() const {
  for (const auto& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

ComplexField operator+(ComplexField a, const ComplexField& b) {
  a += b;
  return a;
}

ComplexField operator*(cplx s, ComplexField a) {
  a *= s;
  return a;
}

cplx inner_product(const ComplexField& a, const ComplexField& b) {
  if (a.grid() != b.grid()) throw ShapeError("inner_product: grids differ");
  return kernels::active().dot_conj(a.data(), b.data(), a.size()) * a.grid().cell_area();
}

}  // namespace spdc
