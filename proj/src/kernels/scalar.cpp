#include "spdc/kernels/kernels.hpp"

namespace spdc::kernels {
namespace {

void cmul(cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
}

cplx dot_conj(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void squeeze(cplx* a, cplx* b, const double* ch, const cplx* k, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const cplx a0 = a[i];
    const cplx b0 = b[i];
    a[i] = ch[i] * a0 + k[i] * std::conj(b0);
    b[i] = ch[i] * b0 + k[i] * std::conj(a0);
  }
}

void squeeze_coupling_grad(const cplx* a, const cplx* b, const cplx* ga, const cplx* gb,
                           const SqueezeCoeffs& c, cplx* grad_g, std::size_t n) {
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx g = c.g[i];
    const double s = c.sh[i];
    const double dcosh = 0.5 * s;
    const cplx t = -I * g * c.dsh[i];
    const double xa = std::real(std::conj(ga[i]) * (dcosh * a[i] + t * std::conj(b[i])));
    const double xb = std::real(std::conj(gb[i]) * (dcosh * b[i] + t * std::conj(a[i])));
    grad_g[i] += I * s * (ga[i] * b[i] + gb[i] * a[i]) + 2.0 * (xa + xb) * g;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", cmul, dot_conj, axpy, squeeze, squeeze_coupling_grad};
  return table;
}

}  // namespace spdc::kernels
