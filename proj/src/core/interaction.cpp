#include "spdc/core/interaction.hpp"

#include <cmath>
#include <numbers>

#include "spdc/core/errors.hpp"

namespace spdc {

namespace {
double wavenumber(double lambda, double n) { return 2.0 * std::numbers::pi * n / lambda; }
}  // namespace

double InteractionSpec::k_p() const { return wavenumber(lambda_p, n_p); }
double InteractionSpec::k_s() const { return wavenumber(lambda_s, n_s); }
double InteractionSpec::k_i() const { return wavenumber(lambda_i, n_i); }

double InteractionSpec::delta_k() const {
  if (delta_k_override) return *delta_k_override;
  return k_p() - k_s() - k_i();
}

void InteractionSpec::validate() const {
  for (double v : {lambda_p, lambda_s, lambda_i, n_p, n_s, n_i})
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("wavelengths and indices must be positive");
  const double lhs = 1.0 / lambda_p;
  const double rhs = 1.0 / lambda_s + 1.0 / lambda_i;
  if (std::abs(lhs - rhs) > 1e-12 * lhs)
    throw ConfigError("energy conservation violated: 1/lambda_p != 1/lambda_s + 1/lambda_i");
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("crystal length must be positive");
  if (n_z < 1) throw ConfigError("n_z must be at least 1");
  if (n_realizations < 2) throw ConfigError("n_realizations must be at least 2");
  if (poling_period && !(*poling_period > 0.0))
    throw ConfigError("poling period must be positive");
  if (!std::isfinite(chi2_magnitude) || !std::isfinite(gain))
    throw ConfigError("chi2_magnitude and gain must be finite");
  if (delta_k_override && !std::isfinite(*delta_k_override))
    throw ConfigError("delta_k must be finite");
}

InteractionSpec degenerate_interaction(double lambda_p, double refractive_index, double length,
                                       std::size_t n_z) {
  InteractionSpec s;
  s.lambda_p = lambda_p;
  s.lambda_s = 2.0 * lambda_p;
  s.lambda_i = 2.0 * lambda_p;
  s.n_p = s.n_s = s.n_i = refractive_index;
  s.length = length;
  s.n_z = n_z;
  return s;
}

}  // namespace spdc
