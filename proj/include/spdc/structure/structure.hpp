#pragma once

#include <string>
#include <vector>

#include "spdc/core/grid.hpp"
#include "spdc/core/interaction.hpp"
#include "spdc/io/json_util.hpp"
#include "spdc/modes/modes.hpp"

namespace spdc::structure {

// Waists are packed in micrometres so coefficient and waist gradients share a scale.
inline constexpr double kWaistUnit = 1e-6;

struct PumpParams {
  std::vector<modes::ModeIndex> modes;
  std::vector<cplx> coeffs;
  std::vector<double> waists;  // meters
  std::vector<bool> learn_coeffs;  // two entries (re, im) per coefficient
  std::vector<bool> learn_waists;
};

// An empty mode list means a uniform crystal (transverse profile 1).
// Coefficients are segment-major: coeffs[s * modes.size() + n].
struct CrystalParams {
  std::vector<modes::ModeIndex> modes;
  std::size_t n_segments = 1;
  std::vector<cplx> coeffs;
  std::vector<double> waists;  // meters
  std::vector<bool> learn_coeffs;
  std::vector<bool> learn_waists;

  cplx coeff(std::size_t segment, std::size_t n) const { return coeffs[segment * modes.size() + n]; }
  bool uniform() const { return modes.empty(); }
};

// Flattened scalar order: pump coefficients (re, im), pump waists, crystal
// coefficients (re, im), crystal waists.
struct ParamSet {
  PumpParams pump;
  CrystalParams crystal;

  // Throws ConfigError on size mismatches, non-positive waists, or (when spec
  // is given) a segment count that does not divide n_z.
  void validate() const;
  void validate(const InteractionSpec& spec) const;

  std::size_t n_scalars() const;
  std::vector<double> pack() const;
  void unpack(const std::vector<double>& values);
  std::vector<bool> mask() const;
  std::size_t n_learnable() const;
  std::vector<std::string> scalar_names() const;

  // Offsets of each block inside the flattened vector.
  std::size_t pump_waist_offset() const { return 2 * pump.coeffs.size(); }
  std::size_t crystal_offset() const { return pump_waist_offset() + pump.waists.size(); }
  std::size_t crystal_waist_offset() const { return crystal_offset() + 2 * crystal.coeffs.size(); }

  void freeze_all();
  void set_learn_pump_waists(bool on);
  void set_learn_pump_coeffs(bool on);
  void set_learn_crystal_coeffs(bool on);
  void set_learn_crystal_waists(bool on);

  io::json to_json() const;
  static ParamSet from_json(const io::json& j);
};

// Convenience constructors; masks default to frozen.
PumpParams gaussian_pump(double waist);
PumpParams pump_from_modes(std::vector<modes::ModeIndex> modes, std::vector<cplx> coeffs, double waist);
CrystalParams uniform_crystal();

struct CrystalSlice {
  ComplexField chi;
  double zeta;
};
using Crystal = std::vector<CrystalSlice>;

// sum_n alpha_n Phi_n(r; w_n) scaled to unit power. Throws ConfigError for an
// all-zero superposition.
ComplexField build_pump(const PumpParams& pump, const TransverseGrid& grid);
// Gradient of L with respect to the packed pump scalars (coefficients then
// waists in kWaistUnit), given grad_E = dL/dRe E + i dL/dIm E per cell.
std::vector<double> build_pump_backward(const PumpParams& pump, const TransverseGrid& grid,
                                        const ComplexField& grad_E);

// One slice per propagation step: chi_j = chi2_magnitude * carrier(zeta_j) * S_seg(j) / max|S|.
Crystal build_crystal(const CrystalParams& crystal, const InteractionSpec& spec, const TransverseGrid& grid);
// grad_chi[j] is dL/dchi at step j. Returns gradient over packed crystal scalars.
std::vector<double> build_crystal_backward(const CrystalParams& crystal, const InteractionSpec& spec,
                                           const TransverseGrid& grid,
                                           const std::vector<ComplexField>& grad_chi);

// Square-wave poling sign(cos(2 pi zeta / period)); 1 when unpoled.
double poling_carrier(double zeta, const InteractionSpec& spec);

}  // namespace spdc::structure
