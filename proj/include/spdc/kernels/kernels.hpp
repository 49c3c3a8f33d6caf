#pragma once

// Data-parallel inner loops of the solver and the projections. Each entry has a
// scalar reference implementation and an AVX2+FMA variant; the variant is
// picked once at startup from CPUID and may be pinned with SPDC_SIMD=scalar.

#include <complex>
#include <cstddef>
#include <string_view>

namespace spdc::kernels {

using cplx = std::complex<double>;

// Per-cell coefficients of one exact two-mode squeezing step with coupling g:
//   a' = cosh|g| a + k conj(b),   b' = cosh|g| b + k conj(a),   k = -i g sinh|g|/|g|.
// sh = sinh|g|/|g| and dsh = d(sh)/d(|g|^2) are only read by the gradient kernel.
struct SqueezeCoeffs {
  const double* cosh;
  const cplx* k;
  const cplx* g;
  const double* sh;
  const double* dsh;
};

struct KernelTable {
  std::string_view name;
  // a[i] *= b[i]
  void (*cmul)(cplx* a, const cplx* b, std::size_t n);
  // sum_i conj(a[i]) b[i]
  cplx (*dot_conj)(const cplx* a, const cplx* b, std::size_t n);
  // y[i] += alpha x[i]
  void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
  // In-place squeeze of the pair (a, b); see SqueezeCoeffs.
  void (*squeeze)(cplx* a, cplx* b, const double* cosh, const cplx* k, std::size_t n);
  // Accumulates dL/dg into grad_g given pre-step fields (a, b) and the
  // gradients (ga, gb) with respect to the post-step fields.
  void (*squeeze_coupling_grad)(const cplx* a, const cplx* b, const cplx* ga, const cplx* gb,
                                const SqueezeCoeffs& c, cplx* grad_g, std::size_t n);
};

const KernelTable& scalar_table();
// Null when the binary was built without AVX2 support compiled in.
const KernelTable* avx2_table();
bool cpu_has_avx2();

// The table used by the library; fixed for the lifetime of the process.
const KernelTable& active();

}  // namespace spdc::kernels
