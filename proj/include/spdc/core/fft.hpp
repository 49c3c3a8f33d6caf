#pragma once

#include <cstddef>

#include "spdc/core/grid.hpp"

namespace spdc {

// In-place unnormalized 2D DFT on grid-shaped, 64-byte aligned buffers.
// Backed by FFTW with FFTW_ESTIMATE plans (deterministic plan choice); plans
// are cached per shape and executing them is thread-safe.
class Fft2d {
 public:
  explicit Fft2d(const TransverseGrid& grid);

  void forward(cplx* data) const;
  void inverse(cplx* data) const;  // unnormalized: inverse(forward(x)) = N x
  std::size_t size() const noexcept { return n_; }

 private:
  void* fwd_;
  void* inv_;
  std::size_t n_;
};

}  // namespace spdc
