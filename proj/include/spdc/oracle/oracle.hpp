#pragma once

#include "spdc/core/interaction.hpp"
#include "spdc/modes/modes.hpp"
#include "spdc/observables/observables.hpp"
#include "spdc/structure/structure.hpp"

namespace spdc::oracle {

// First-order pair amplitude, normalized so that sum |C|^2 = 1.
struct PairAmplitude {
  observables::CMat C;  // rows idler q_i, columns signal q_s
  double normalization = 0.0;  // norm of the raw overlap matrix
  std::vector<modes::ModeIndex> signal_modes, idler_modes;
};

// C[qi, qs] = sum_j dz exp(-i dk zeta_j) sum_r chi_j pump conj(Phi_s) conj(Phi_i) dx dy.
// Direct quadrature with the waist-plane pump and no signal/idler diffraction.
PairAmplitude perturbative_amplitude(const ComplexField& pump, const structure::Crystal& crystal,
                                     const modes::ModeBasis& basis_s, const modes::ModeBasis& basis_i,
                                     const InteractionSpec& spec);

// |C|^2, normalized. Throws NormalizationError for an all-zero amplitude.
observables::CoincidenceMatrix oracle_g2(const PairAmplitude& amp);

}  // namespace spdc::oracle
