#include "spdc/oracle/oracle.hpp"

#include <cmath>

#include "spdc/core/errors.hpp"

namespace spdc::oracle {

PairAmplitude perturbative_amplitude(const ComplexField& pump, const structure::Crystal& crystal,
                                     const modes::ModeBasis& basis_s, const modes::ModeBasis& basis_i,
                                     const InteractionSpec& spec) {
  const auto& grid = pump.grid();
  if (basis_s.grid() != grid || basis_i.grid() != grid) throw ShapeError("oracle: bases and pump grids differ");
  if (crystal.empty()) throw ShapeError("oracle: empty crystal");
  const double dz = spec.length / static_cast<double>(crystal.size());
  const double dk = spec.delta_k();

  // Longitudinally integrated drive sum_j dz exp(-i dk zeta_j) chi_j pump.
  CplxVec drive(grid.size(), cplx(0.0));
  for (const auto& slice : crystal) {
    if (slice.chi.grid() != grid) throw ShapeError("oracle: crystal slice grid differs");
    const cplx phase = dz * std::polar(1.0, -dk * slice.zeta);
    for (std::size_t i = 0; i < grid.size(); ++i) drive[i] += phase * slice.chi[i];
  }
  for (std::size_t i = 0; i < grid.size(); ++i) drive[i] *= pump[i];

  PairAmplitude amp;
  amp.signal_modes = basis_s.indices();
  amp.idler_modes = basis_i.indices();
  amp.C = observables::CMat::Zero(basis_i.size(), basis_s.size());
  const double w = grid.cell_area();
  for (std::size_t qi = 0; qi < basis_i.size(); ++qi) {
    const auto& phi_i = basis_i.mode(qi);
    for (std::size_t qs = 0; qs < basis_s.size(); ++qs) {
      const auto& phi_s = basis_s.mode(qs);
      cplx acc = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) acc += drive[i] * std::conj(phi_s[i] * phi_i[i]);
      amp.C(qi, qs) = acc * w;
    }
  }
  amp.normalization = amp.C.norm();
  if (amp.normalization > 0.0) amp.C /= amp.normalization;
  return amp;
}

observables::CoincidenceMatrix oracle_g2(const PairAmplitude& amp) {
  if (!amp.C.allFinite()) throw NormalizationError("oracle amplitude is not finite");
  observables::CoincidenceMatrix g;
  g.signal_modes = amp.signal_modes;
  g.idler_modes = amp.idler_modes;
  g.values = amp.C.cwiseAbs2();
  const double s = g.values.sum();
  if (!(s > 0.0)) throw NormalizationError("degenerate state: oracle amplitude is identically zero");
  g.values /= s;
  g.normalized = true;
  return g;
}

}  // namespace spdc::oracle
