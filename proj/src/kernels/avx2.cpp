// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// CPUID check, so nothing here may run at static-initialization time.
#include <immintrin.h>

#include "spdc/kernels/kernels.hpp"

namespace spdc::kernels {
namespace {

// Two interleaved complex doubles per __m256d: [re0, im0, re1, im1].

inline __m256d load(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d cmul2(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

inline __m256d conj2(__m256d a) {
  const __m256d mask = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
  return _mm256_xor_pd(a, mask);
}

// [r0, r1] -> [r0, r0, r1, r1]
inline __m256d widen(const double* r) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(r)), 0x50);
}

// multiply by i: (re, im) -> (-im, re)
inline __m256d times_i(__m256d a) {
  const __m256d sw = _mm256_permute_pd(a, 0x5);
  return _mm256_xor_pd(sw, _mm256_set_pd(0.0, -0.0, 0.0, -0.0));
}

// Re(conj(x) y) broadcast over each complex slot.
inline __m256d re_conj_dot(__m256d x, __m256d y) {
  const __m256d p = _mm256_mul_pd(x, y);
  return _mm256_hadd_pd(p, p);
}

void cmul(cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(a + i, cmul2(load(a + i), load(b + i)));
  for (; i < n; ++i) a[i] *= b[i];
}

cplx dot_conj(const cplx* a, const cplx* b, std::size_t n) {
  // conj(a) b = (ar br + ai bi) + i (ar bi - ai br)
  __m256d acc_rr = _mm256_setzero_pd();  // [ar br, ai bi, ...]
  __m256d acc_ri = _mm256_setzero_pd();  // [ar bi, ai br, ...]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = load(a + i);
    const __m256d vb = load(b + i);
    acc_rr = _mm256_fmadd_pd(va, vb, acc_rr);
    acc_ri = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), acc_ri);
  }
  alignas(32) double rr[4], ri[4];
  _mm256_store_pd(rr, acc_rr);
  _mm256_store_pd(ri, acc_ri);
  double re = (rr[0] + rr[2]) + (rr[1] + rr[3]);
  double im = (ri[0] + ri[2]) - (ri[1] + ri[3]);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const __m256d va = _mm256_set_pd(alpha.imag(), alpha.real(), alpha.imag(), alpha.real());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store(y + i, _mm256_add_pd(load(y + i), cmul2(load(x + i), va)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void squeeze(cplx* a, cplx* b, const double* ch, const cplx* k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = load(a + i);
    const __m256d vb = load(b + i);
    const __m256d vc = widen(ch + i);
    const __m256d vk = load(k + i);
    store(a + i, _mm256_fmadd_pd(vc, va, cmul2(vk, conj2(vb))));
    store(b + i, _mm256_fmadd_pd(vc, vb, cmul2(vk, conj2(va))));
  }
  for (; i < n; ++i) {
    const cplx a0 = a[i];
    const cplx b0 = b[i];
    a[i] = ch[i] * a0 + k[i] * std::conj(b0);
    b[i] = ch[i] * b0 + k[i] * std::conj(a0);
  }
}

void squeeze_coupling_grad(const cplx* a, const cplx* b, const cplx* ga, const cplx* gb,
                           const SqueezeCoeffs& c, cplx* grad_g, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = load(a + i);
    const __m256d vb = load(b + i);
    const __m256d vga = load(ga + i);
    const __m256d vgb = load(gb + i);
    const __m256d vg = load(c.g + i);
    const __m256d vs = widen(c.sh + i);
    const __m256d vds = widen(c.dsh + i);
    const __m256d dcosh = _mm256_mul_pd(half, vs);
    // t = -i g dsh
    const __m256d t = _mm256_sub_pd(_mm256_setzero_pd(), times_i(_mm256_mul_pd(vg, vds)));
    const __m256d ya = _mm256_fmadd_pd(dcosh, va, cmul2(t, conj2(vb)));
    const __m256d yb = _mm256_fmadd_pd(dcosh, vb, cmul2(t, conj2(va)));
    const __m256d xsum = _mm256_add_pd(re_conj_dot(vga, ya), re_conj_dot(vgb, yb));
    const __m256d cross = _mm256_add_pd(cmul2(vga, vb), cmul2(vgb, va));
    __m256d acc = load(grad_g + i);
    acc = _mm256_fmadd_pd(vs, times_i(cross), acc);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(two, xsum), vg, acc);
    store(grad_g + i, acc);
  }
  if (i < n) scalar_table().squeeze_coupling_grad(a + i, b + i, ga + i, gb + i,
                                                  SqueezeCoeffs{c.cosh + i, c.k + i, c.g + i,
                                                                c.sh + i, c.dsh + i},
                                                  grad_g + i, n - i);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", cmul, dot_conj, axpy, squeeze, squeeze_coupling_grad};
  return &table;
}

}  // namespace spdc::kernels
