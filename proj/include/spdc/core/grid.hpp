#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

namespace spdc {

using cplx = std::complex<double>;

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align}));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, std::align_val_t{Align}); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept { return true; }
};

using CplxVec = std::vector<cplx, AlignedAllocator<cplx>>;
using RealVec = std::vector<double, AlignedAllocator<double>>;

// Uniform transverse grid. Cell (ix, iy) sits at x = (ix - nx/2) dx, so the
// origin is at index nx/2. Storage is row-major with x fastest:
// flat index = iy * nx + ix.
class TransverseGrid {
 public:
  TransverseGrid(std::size_t nx, std::size_t ny, double dx, double dy);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  double cell_area() const noexcept { return dx_ * dy_; }
  double extent_x() const noexcept { return static_cast<double>(nx_) * dx_; }
  double extent_y() const noexcept { return static_cast<double>(ny_) * dy_; }

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }
  // Angular spatial frequencies 2*pi*fftfreq(n, d), standard DFT ordering.
  const std::vector<double>& kx() const noexcept { return kx_; }
  const std::vector<double>& ky() const noexcept { return ky_; }

  std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return iy * nx_ + ix; }

  bool operator==(const TransverseGrid& o) const noexcept {
    return nx_ == o.nx_ && ny_ == o.ny_ && dx_ == o.dx_ && dy_ == o.dy_;
  }
  bool operator!=(const TransverseGrid& o) const noexcept { return !(*this == o); }

 private:
  std::size_t nx_, ny_;
  double dx_, dy_;
  std::vector<double> x_, y_, kx_, ky_;
};

TransverseGrid make_grid(std::size_t nx, std::size_t ny, double dx, double dy);

// Complex scalar amplitude sampled on a TransverseGrid.
class ComplexField {
 public:
  explicit ComplexField(const TransverseGrid& grid);
  ComplexField(const TransverseGrid& grid, CplxVec values);

  const TransverseGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  cplx* data() noexcept { return data_.data(); }
  const cplx* data() const noexcept { return data_.data(); }
  CplxVec& values() noexcept { return data_; }
  const CplxVec& values() const noexcept { return data_; }

  cplx& operator()(std::size_t ix, std::size_t iy) { return data_[grid_.index(ix, iy)]; }
  const cplx& operator()(std::size_t ix, std::size_t iy) const { return data_[grid_.index(ix, iy)]; }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

  ComplexField& operator+=(const ComplexField& o);
  ComplexField& operator*=(cplx s);

  // Discrete L2 norm squared: sum |a|^2 dx dy.
  double power() const;
  bool all_finite() const;

 private:
  TransverseGrid grid_;
  CplxVec data_;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator*(cplx s, ComplexField a);

// sum conj(a) b dx dy
cplx inner_product(const ComplexField& a, const ComplexField& b);

}  // namespace spdc
