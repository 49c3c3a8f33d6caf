#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdc/io/json_util.hpp"
#include "spdc/modes/modes.hpp"
#include "spdc/solver/solver.hpp"

namespace spdc::observables {

using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

// Mode coefficients of every realization at the projection plane, indexed
// [r * m + q] with q in basis order.
struct Coefficients {
  std::size_t n_realizations = 0;
  std::size_t ms = 0;  // signal basis size
  std::size_t mi = 0;  // idler basis size
  std::vector<cplx> o_s, v_s, o_i, v_i;

  void resize(std::size_t r, std::size_t ms_, std::size_t mi_);
};

void project_realization(const solver::FieldSet& fs, const modes::ModeBasis& basis_s,
                         const modes::ModeBasis& basis_i, Coefficients& c, std::size_t r);
// dL/dfield at the projection plane from dL/dcoefficient of realization r.
void project_realization_backward(const Coefficients& grad, std::size_t r, const modes::ModeBasis& basis_s,
                                  const modes::ModeBasis& basis_i, solver::FieldSet& grad_fields);

// Estimator (n realizations, o = out coefficient, v = vac coefficient):
//   N_s[q, q'] = mean conj(v_s[q]) v_s[q']          (likewise N_i)
//   A[qi, qs]  = mean (o_s[qs] v_i[qi] + o_i[qi] v_s[qs]) / 2
//   C[qi, qs]  = mean conj(v_i[qi]) v_s[qs]
// Rows of A and C are idler modes, columns signal modes.
struct MomentSet {
  CMat N_s, N_i, A, C;
  std::size_t n_realizations = 0;
  std::vector<modes::ModeIndex> signal_modes, idler_modes;

  static MomentSet zeros_like(const MomentSet& m);
  // 5 / sqrt(n): entrywise allowance for statistical invariants.
  double tolerance() const;
  double hermiticity_residual() const;
};

MomentSet moments_from_coefficients(const Coefficients& c);
Coefficients moments_backward(const Coefficients& c, const MomentSet& grad);
// Projects every realization of `state` (taken as is, at its current plane).
MomentSet estimate_moments(const solver::EnsembleState& state, const modes::ModeBasis& basis_s,
                           const modes::ModeBasis& basis_i);

struct CoincidenceMatrix {
  RMat values;  // rows idler q_i, columns signal q_s
  bool normalized = false;
  double clip_mass = 0.0;  // total of negative entries removed before clipping
  std::vector<modes::ModeIndex> signal_modes, idler_modes;

  double sum() const { return values.sum(); }
  // Throws NormalizationError when the total is not positive.
  CoincidenceMatrix normalized_copy() const;
  io::json to_json() const;
  std::string to_csv() const;
};

// G2 = N_i[qi,qi] N_s[qs,qs] + |A|^2 + |C|^2, negatives clipped to 0.
CoincidenceMatrix g2_from_moments(const MomentSet& m);
// grad_values is dL/dG2 for the unnormalized matrix.
MomentSet g2_backward(const MomentSet& m, const CoincidenceMatrix& g2, const RMat& grad_values);
// dL/dG2(raw) from dL/dG2(normalized).
RMat normalize_backward(const CoincidenceMatrix& raw, const RMat& grad_normalized);

// Coincidence rate for detection modes a_ket = sum conj(ket_q) a_q.
double simulated_projection(const MomentSet& m, const CVec& ket_i, const CVec& ket_s);
void simulated_projection_backward(const MomentSet& m, const CVec& ket_i, const CVec& ket_s, double grad_p,
                                   MomentSet& grad_m);

// Hermitian basis of d x d matrices: sigma_0 = I and the generalized Gell-Mann
// matrices scaled so that Tr(sigma_m sigma_n) = d delta_mn (Pauli for d = 2).
std::vector<CMat> generators(int d);
struct Eigensystem {
  std::vector<double> values;
  std::vector<CVec> vectors;
};
std::vector<Eigensystem> generator_eigensystems(int d);
// d + 1 mutually unbiased bases for prime d; each basis is a list of d vectors.
std::vector<std::vector<CVec>> mub_projectors(int d);

// Coincidence probabilities keyed by (signal generator m, eigenvector i,
// idler generator n, eigenvector j). Only eigenvectors with non-zero eigenvalue
// are required by the reconstruction.
class ProjectionTable {
 public:
  explicit ProjectionTable(int d) : d_(d) {}
  int d() const { return d_; }
  void set(int m, int i, int n, int j, double p) { data_[{m, i, n, j}] = p; }
  bool has(int m, int i, int n, int j) const { return data_.count({m, i, n, j}) > 0; }
  double get(int m, int i, int n, int j) const;
  std::size_t size() const { return data_.size(); }

 private:
  int d_;
  std::map<std::array<int, 4>, double> data_;
};

// Every (m, i, n, j) whose eigenvalue product is non-zero.
std::vector<std::array<int, 4>> required_projections(int d);
// <l_s l_i| rho |l_s l_i> for a d^2 x d^2 density matrix ordered signal (x) idler.
ProjectionTable projections_from_state(const CMat& rho, int d);
// Subspace positions index the moment bases (signal_sub[k] is the basis slot of |k>).
ProjectionTable projections_from_moments(const MomentSet& m, const std::vector<std::size_t>& signal_sub,
                                         const std::vector<std::size_t>& idler_sub);
void projections_backward(const MomentSet& m, const std::vector<std::size_t>& signal_sub,
                          const std::vector<std::size_t>& idler_sub, const ProjectionTable& grad, MomentSet& grad_m);

struct DensityMatrix {
  CMat rho;  // index l_s * d + l_i
  int d = 0;
  std::vector<modes::ModeIndex> subspace_s, subspace_i;

  double min_eigenvalue() const;
  Eigen::VectorXd eigenvalues() const;
  io::json to_json() const;
};

// Linear reconstruction: rho_mn = sum_ij a_m^i a_n^j P(m i, n j),
// rho = (1/d^2) sum rho_mn sigma_m (x) sigma_n, then Hermitize and normalize the trace.
DensityMatrix reconstruct_density(const ProjectionTable& projections, int d);
// dL/dP for every required projection from dL/drho (complex gradient convention).
ProjectionTable reconstruct_density_backward(const ProjectionTable& projections, int d, const CMat& grad_rho);

// Positions of `subspace` modes inside `basis`; throws ConfigError when absent.
std::vector<std::size_t> subspace_positions(const std::vector<modes::ModeIndex>& subspace,
                                            const std::vector<modes::ModeIndex>& basis);

}  // namespace spdc::observables
