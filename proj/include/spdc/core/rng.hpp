#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace spdc {

// One independent pseudo-random stream per (seed, stream_id). Streams never
// depend on which worker consumes them, which is what makes ensemble results
// independent of the worker count.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  // Circular complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// splitmix64 finalizer; used to derive child seeds (epochs, perturbation draws).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace spdc
