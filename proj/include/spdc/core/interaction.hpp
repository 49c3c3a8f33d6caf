#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace spdc {

// Constants of one down-conversion interaction. Wavenumbers include the
// refractive index; all coupling prefactors are folded into `gain`.
struct InteractionSpec {
  double lambda_p = 405e-9;
  double lambda_s = 810e-9;
  double lambda_i = 810e-9;
  double n_p = 1.0;
  double n_s = 1.0;
  double n_i = 1.0;
  double length = 1e-3;
  std::size_t n_z = 16;
  // Phase mismatch; defaults to k_p - k_s - k_i when unset.
  std::optional<double> delta_k_override;
  std::optional<double> poling_period;
  double chi2_magnitude = 1.0;
  double gain = 1.0;
  std::size_t n_realizations = 500;
  std::uint64_t seed = 1;
  // Free-space diffraction of the pump envelope along the crystal (waist at
  // the crystal center). When false the waist-plane profile is used at every ζ.
  bool pump_diffraction = true;

  double k_p() const;
  double k_s() const;
  double k_i() const;
  double delta_k() const;
  double dz() const { return length / static_cast<double>(n_z); }
  // Midpoint of propagation step j, measured from the crystal entrance.
  double zeta(std::size_t step) const { return (static_cast<double>(step) + 0.5) * dz(); }

  // Throws ConfigError on any violated invariant.
  void validate() const;
};

// Degenerate type-0/I configuration: signal and idler at twice the pump
// wavelength, single refractive index, phase matched unless delta_k is given.
InteractionSpec degenerate_interaction(double lambda_p, double refractive_index, double length,
                                       std::size_t n_z);

}  // namespace spdc
