#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spdc/core/fft.hpp"
#include "spdc/core/grid.hpp"
#include "spdc/core/interaction.hpp"
#include "spdc/structure/structure.hpp"

namespace spdc::solver {

enum class Stack : int { signal_out = 0, signal_vac = 1, idler_out = 2, idler_vac = 3 };

// Four fields of one vacuum realization, each grid-sized.
struct FieldSet {
  std::array<CplxVec, 4> f;

  explicit FieldSet(std::size_t n = 0) : f{CplxVec(n), CplxVec(n), CplxVec(n), CplxVec(n)} {}
  CplxVec& operator[](Stack s) { return f[static_cast<int>(s)]; }
  const CplxVec& operator[](Stack s) const { return f[static_cast<int>(s)]; }
};

// Stacks of realizations [first, first + count). Realization r of the
// ensemble always draws its noise from RngStream(seed, r), so any split of an
// ensemble into states reproduces the same fields.
class EnsembleState {
 public:
  EnsembleState(const TransverseGrid& grid, std::size_t count, std::size_t first = 0);

  const TransverseGrid& grid() const noexcept { return grid_; }
  std::size_t count() const noexcept { return count_; }
  std::size_t first() const noexcept { return first_; }
  double zeta = 0.0;

  cplx* field(Stack s, std::size_t r) { return stacks_[static_cast<int>(s)].data() + r * grid_.size(); }
  const cplx* field(Stack s, std::size_t r) const {
    return stacks_[static_cast<int>(s)].data() + r * grid_.size();
  }
  ComplexField field_copy(Stack s, std::size_t r) const;
  void load(std::size_t r, const FieldSet& fs);
  void store(std::size_t r, FieldSet& fs) const;

  bool all_finite() const;

  // Flat binary layout, little-endian:
  //   char[8] "SPDCENS1", u64 nx, u64 ny, u64 count, u64 first,
  //   f64 dx, f64 dy, f64 zeta, then the four stacks in Stack order, each
  //   count * ny * nx complex doubles (re, im) with x fastest.
  void save(const std::string& path) const;
  static EnsembleState load_file(const std::string& path);

 private:
  TransverseGrid grid_;
  std::size_t count_, first_;
  std::array<CplxVec, 4> stacks_;
};

// Draws the initial fields for one realization: both "out" fields are circular
// complex Gaussian white noise with variance noise_scale^2 / (dx dy) per cell,
// both "vac" fields start at zero.
void init_realization(FieldSet& fs, const TransverseGrid& grid, std::uint64_t seed, std::size_t realization,
                      double noise_scale);
EnsembleState init_vacuum(const TransverseGrid& grid, const InteractionSpec& spec, double noise_scale,
                          std::size_t first = 0, std::size_t count = 0);

// Free diffraction of every stack over dz (any sign).
void linear_half_step(EnsembleState& state, const InteractionSpec& spec, double dz);
// Exact two-mode squeezing step for the pairs (signal_out, idler_vac) and
// (idler_out, signal_vac) with g = gain chi pump exp(-i dk zeta) dz.
void nonlinear_step(EnsembleState& state, const structure::CrystalSlice& slice, const ComplexField& pump,
                    const InteractionSpec& spec, double dz);

// Precomputed operators for one (grid, spec, crystal, pump) configuration.
// Thread-safe for concurrent forward/backward calls on distinct FieldSets.
class SplitStepModel {
 public:
  SplitStepModel(const TransverseGrid& grid, const InteractionSpec& spec, const structure::Crystal& crystal,
                 const ComplexField& pump_waist_plane);

  const TransverseGrid& grid() const noexcept { return grid_; }
  const InteractionSpec& spec() const noexcept { return spec_; }
  std::size_t n_steps() const noexcept { return n_z_; }
  // Pump envelope at the midpoint of step j (waist at the crystal center).
  const ComplexField& pump_at(std::size_t j) const { return pump_[j]; }
  const CplxVec& coupling(std::size_t j) const { return g_[j]; }

  // Propagates fs from the entrance face through the crystal and back to the
  // central plane, where projections are taken (or stops at the exit face when
  // to_center is false). When `trajectory` is non-null it receives the four
  // fields just before every nonlinear step. Throws NumericBlowup on
  // non-finite values.
  void forward(FieldSet& fs, std::vector<FieldSet>* trajectory = nullptr, bool to_center = true) const;
  // Reverse sweep. `grad` holds dL/dfield at the central plane on entry (it is
  // consumed). dL/dg for step j is added into grad_g[j].
  void backward(const std::vector<FieldSet>& trajectory, FieldSet& grad, std::vector<CplxVec>& grad_g) const;

  // dL/dchi_j and dL/dE (waist plane) from accumulated dL/dg_j.
  std::vector<ComplexField> chi_gradient(const std::vector<CplxVec>& grad_g) const;
  ComplexField pump_gradient(const std::vector<CplxVec>& grad_g) const;

 private:
  void diffract(CplxVec& field, const CplxVec& phase) const;

  TransverseGrid grid_;
  InteractionSpec spec_;
  std::size_t n_z_;
  Fft2d fft_;
  std::vector<ComplexField> pump_;
  std::vector<ComplexField> chi_;
  std::vector<cplx> carrier_;  // gain exp(-i dk zeta_j) dz
  std::vector<CplxVec> g_, k_;
  std::vector<RealVec> cosh_, sh_, dsh_;
  // Transfer functions (with 1/N folded in) per field family.
  CplxVec h_first_s_, h_step_s_, h_last_s_, h_exit_s_, h_first_i_, h_step_i_, h_last_i_, h_exit_i_;
  CplxVec h_first_s_adj_, h_step_s_adj_, h_last_s_adj_, h_first_i_adj_, h_step_i_adj_, h_last_i_adj_;
  std::vector<CplxVec> pump_back_;  // D_p(L/2 - zeta_j) for the pump adjoint
};

// Transfer function of free propagation over dz for wavenumber k, scaled by 1/N.
CplxVec diffraction_phase(const TransverseGrid& grid, double k, double dz);
// Free propagation of a single field over dz (any sign).
ComplexField diffract(const ComplexField& field, double k, double dz);

// Full propagation of every realization in `state` from the entrance face to
// the crystal exit (zeta = L). Results do not depend on the worker count.
EnsembleState& propagate(EnsembleState& state, const structure::Crystal& crystal, const ComplexField& pump,
                         const InteractionSpec& spec, std::size_t workers = 0);
// Free propagation from the exit face back to the crystal center.
void refocus(EnsembleState& state, const InteractionSpec& spec);

}  // namespace spdc::solver
