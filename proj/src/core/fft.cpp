#include "spdc/core/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace spdc {
namespace {

struct PlanPair {
  fftw_plan fwd;
  fftw_plan inv;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans live for the whole process; FFTW cleanup at exit is unnecessary.
PlanPair plans_for(std::size_t nx, std::size_t ny) {
  static std::map<std::pair<std::size_t, std::size_t>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  const auto key = std::make_pair(nx, ny);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  CplxVec scratch(nx * ny);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const int n0 = static_cast<int>(ny);
  const int n1 = static_cast<int>(nx);
  PlanPair p{fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE),
             fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE)};
  cache.emplace(key, p);
  return p;
}

}  // namespace

Fft2d::Fft2d(const TransverseGrid& grid) : n_(grid.size()) {
  const PlanPair p = plans_for(grid.nx(), grid.ny());
  fwd_ = p.fwd;
  inv_ = p.inv;
}

void Fft2d::forward(cplx* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), buf, buf);
}

void Fft2d::inverse(cplx* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(inv_), buf, buf);
}

}  // namespace spdc
