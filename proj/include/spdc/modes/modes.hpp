#pragma once

#include <memory>
#include <string>
#include <vector>

#include "spdc/core/grid.hpp"

namespace spdc::modes {

enum class Family { LG, HG };

// LG uses (a, b) = (l, p); HG uses (a, b) = (n_x, n_y).
struct ModeIndex {
  Family family = Family::LG;
  int a = 0;
  int b = 0;

  static ModeIndex lg(int l, int p);
  static ModeIndex hg(int nx, int ny);

  int l() const { return a; }
  int p() const { return b; }
  int nx() const { return a; }
  int ny() const { return b; }

  void validate() const;
  std::string label() const;  // "LG(l=1,p=0)" / "HG(1,0)"

  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
  // Canonical ordering: LG by (l, p), HG by (n_x, n_y); LG sorts before HG.
  friend bool operator<(const ModeIndex& x, const ModeIndex& y) {
    if (x.family != y.family) return x.family == Family::LG;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  }
};

// Laguerre-Gauss mode at its waist plane, azimuthal factor exp(+i l atan2(y, x)),
// analytically normalized to unit L2 norm.
ComplexField lg_mode(const ModeIndex& idx, double waist, const TransverseGrid& grid);
// Hermite-Gauss mode at its waist plane, unit L2 norm, parity (-1)^{n_x} in x.
ComplexField hg_mode(const ModeIndex& idx, double waist, const TransverseGrid& grid);
// Either family. Throws NormalizationError when the window truncates the mode
// (discrete norm deficit > 1e-3); warns when the waist exceeds a third of the window.
ComplexField mode_field(const ModeIndex& idx, double waist, const TransverseGrid& grid);
// d(mode)/d(waist), evaluated analytically.
ComplexField mode_waist_derivative(const ModeIndex& idx, double waist, const TransverseGrid& grid);

// Shared, immutable mode samples. Lookups are safe from concurrent workers.
std::shared_ptr<const ComplexField> cached_mode(const ModeIndex& idx, double waist,
                                                const TransverseGrid& grid);

// Ordered orthonormal measurement basis. Indices are stored in canonical order
// (which defines the rows/columns of every moment and coincidence matrix) and
// the discrete Gram matrix is checked against the identity at construction.
class ModeBasis {
 public:
  ModeBasis(std::vector<ModeIndex> indices, std::vector<double> waists, const TransverseGrid& grid,
            double gram_tolerance = 1e-6);
  // Same waist for every mode.
  ModeBasis(std::vector<ModeIndex> indices, double waist, const TransverseGrid& grid,
            double gram_tolerance = 1e-6);

  std::size_t size() const noexcept { return indices_.size(); }
  const std::vector<ModeIndex>& indices() const noexcept { return indices_; }
  const std::vector<double>& waists() const noexcept { return waists_; }
  const TransverseGrid& grid() const noexcept { return grid_; }
  const ComplexField& mode(std::size_t k) const { return *fields_.at(k); }
  // Position of idx in the basis, or -1.
  long find(const ModeIndex& idx) const;

  std::vector<std::vector<cplx>> gram() const;

 private:
  std::vector<ModeIndex> indices_;
  std::vector<double> waists_;
  TransverseGrid grid_;
  std::vector<std::shared_ptr<const ComplexField>> fields_;
};

// Canonically ordered index windows.
std::vector<ModeIndex> lg_window(int l_max, int p_max);
std::vector<ModeIndex> lg_window(int l_min, int l_max, int p_min, int p_max);
std::vector<ModeIndex> hg_window(int nx_max, int ny_max);

// c_k = inner_product(mode_k, field)
std::vector<cplx> decompose(const ComplexField& field, const ModeBasis& basis);
// sum_k c_k mode_k
ComplexField synthesize(const std::vector<cplx>& coeffs, const ModeBasis& basis);

}  // namespace spdc::modes
