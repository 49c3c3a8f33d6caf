#include <cstdlib>
#include <string_view>

#include "spdc/kernels/kernels.hpp"

namespace spdc::kernels {

#ifndef SPDC_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = [] () -> const KernelTable& {
    if (const char* pin = std::getenv("SPDC_SIMD"); pin && std::string_view(pin) == "scalar")
      return scalar_table();
    if (const KernelTable* t = avx2_table(); t && cpu_has_avx2()) return *t;
    return scalar_table();
  }();
  return table;
}

}  // namespace spdc::kernels
