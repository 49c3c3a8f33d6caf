#include "spdc/observables/observables.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spdc/core/errors.hpp"
#include "spdc/kernels/kernels.hpp"

namespace spdc::observables {

namespace {

bool is_prime(int d) {
  if (d < 2) return false;
  for (int k = 2; k * k <= d; ++k)
    if (d % k == 0) return false;
  return true;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_ket(const CVec& ket, std::size_t size, const char* which) {
  if (static_cast<std::size_t>(ket.size()) != size)
    throw ShapeError(std::string(which) + " ket length does not match the moment basis");
  if (std::abs(ket.squaredNorm() - 1.0) > 1e-9)
    throw NormalizationError(std::string(which) + " ket is not normalized");
}

}  // namespace

void Coefficients::resize(std::size_t r, std::size_t ms_, std::size_t mi_) {
  n_realizations = r;
  ms = ms_;
  mi = mi_;
  o_s.assign(r * ms, cplx(0.0));
  v_s.assign(r * ms, cplx(0.0));
  o_i.assign(r * mi, cplx(0.0));
  v_i.assign(r * mi, cplx(0.0));
}

void project_realization(const solver::FieldSet& fs, const modes::ModeBasis& basis_s,
                         const modes::ModeBasis& basis_i, Coefficients& c, std::size_t r) {
  const auto& kt = kernels::active();
  const auto& grid = basis_s.grid();
  const double w = grid.cell_area();
  const std::size_t n = grid.size();
  for (std::size_t q = 0; q < c.ms; ++q) {
    const cplx* phi = basis_s.mode(q).data();
    c.o_s[r * c.ms + q] = w * kt.dot_conj(phi, fs[solver::Stack::signal_out].data(), n);
    c.v_s[r * c.ms + q] = w * kt.dot_conj(phi, fs[solver::Stack::signal_vac].data(), n);
  }
  for (std::size_t q = 0; q < c.mi; ++q) {
    const cplx* phi = basis_i.mode(q).data();
    c.o_i[r * c.mi + q] = w * kt.dot_conj(phi, fs[solver::Stack::idler_out].data(), n);
    c.v_i[r * c.mi + q] = w * kt.dot_conj(phi, fs[solver::Stack::idler_vac].data(), n);
  }
}

void project_realization_backward(const Coefficients& grad, std::size_t r, const modes::ModeBasis& basis_s,
                                  const modes::ModeBasis& basis_i, solver::FieldSet& gf) {
  const auto& kt = kernels::active();
  const auto& grid = basis_s.grid();
  const double w = grid.cell_area();
  const std::size_t n = grid.size();
  for (auto& f : gf.f) f.assign(n, cplx(0.0));
  for (std::size_t q = 0; q < grad.ms; ++q) {
    const cplx* phi = basis_s.mode(q).data();
    kt.axpy(w * grad.o_s[r * grad.ms + q], phi, gf[solver::Stack::signal_out].data(), n);
    kt.axpy(w * grad.v_s[r * grad.ms + q], phi, gf[solver::Stack::signal_vac].data(), n);
  }
  for (std::size_t q = 0; q < grad.mi; ++q) {
    const cplx* phi = basis_i.mode(q).data();
    kt.axpy(w * grad.o_i[r * grad.mi + q], phi, gf[solver::Stack::idler_out].data(), n);
    kt.axpy(w * grad.v_i[r * grad.mi + q], phi, gf[solver::Stack::idler_vac].data(), n);
  }
}

MomentSet MomentSet::zeros_like(const MomentSet& m) {
  MomentSet z;
  z.N_s = CMat::Zero(m.N_s.rows(), m.N_s.cols());
  z.N_i = CMat::Zero(m.N_i.rows(), m.N_i.cols());
  z.A = CMat::Zero(m.A.rows(), m.A.cols());
  z.C = CMat::Zero(m.C.rows(), m.C.cols());
  z.n_realizations = m.n_realizations;
  z.signal_modes = m.signal_modes;
  z.idler_modes = m.idler_modes;
  return z;
}

double MomentSet::tolerance() const { return 5.0 / std::sqrt(static_cast<double>(n_realizations)); }

double MomentSet::hermiticity_residual() const {
  return std::max((N_s - N_s.adjoint()).cwiseAbs().maxCoeff(), (N_i - N_i.adjoint()).cwiseAbs().maxCoeff());
}

MomentSet moments_from_coefficients(const Coefficients& c) {
  if (c.n_realizations < 2) throw EstimatorError("at least two realizations are required");
  const std::size_t R = c.n_realizations, ms = c.ms, mi = c.mi;
  MomentSet m;
  m.n_realizations = R;
  m.N_s = CMat::Zero(ms, ms);
  m.N_i = CMat::Zero(mi, mi);
  m.A = CMat::Zero(mi, ms);
  m.C = CMat::Zero(mi, ms);
  for (std::size_t r = 0; r < R; ++r) {
    const cplx* os = &c.o_s[r * ms];
    const cplx* vs = &c.v_s[r * ms];
    const cplx* oi = &c.o_i[r * mi];
    const cplx* vi = &c.v_i[r * mi];
    for (std::size_t q = 0; q < ms; ++q)
      for (std::size_t p = 0; p < ms; ++p) m.N_s(q, p) += std::conj(vs[q]) * vs[p];
    for (std::size_t q = 0; q < mi; ++q)
      for (std::size_t p = 0; p < mi; ++p) m.N_i(q, p) += std::conj(vi[q]) * vi[p];
    for (std::size_t qi = 0; qi < mi; ++qi)
      for (std::size_t qs = 0; qs < ms; ++qs) {
        m.A(qi, qs) += 0.5 * (os[qs] * vi[qi] + oi[qi] * vs[qs]);
        m.C(qi, qs) += std::conj(vi[qi]) * vs[qs];
      }
  }
  const double inv = 1.0 / static_cast<double>(R);
  m.N_s *= inv;
  m.N_i *= inv;
  m.A *= inv;
  m.C *= inv;
  return m;
}

Coefficients moments_backward(const Coefficients& c, const MomentSet& g) {
  const std::size_t R = c.n_realizations, ms = c.ms, mi = c.mi;
  Coefficients out;
  out.resize(R, ms, mi);
  const double inv = 1.0 / static_cast<double>(R);
  for (std::size_t r = 0; r < R; ++r) {
    const cplx* os = &c.o_s[r * ms];
    const cplx* vs = &c.v_s[r * ms];
    const cplx* oi = &c.o_i[r * mi];
    const cplx* vi = &c.v_i[r * mi];
    cplx* gos = &out.o_s[r * ms];
    cplx* gvs = &out.v_s[r * ms];
    cplx* goi = &out.o_i[r * mi];
    cplx* gvi = &out.v_i[r * mi];
    for (std::size_t q = 0; q < ms; ++q)
      for (std::size_t p = 0; p < ms; ++p) {
        const cplx gn = g.N_s(q, p) * inv;
        if (gn == 0.0) continue;
        gvs[p] += vs[q] * gn;
        gvs[q] += std::conj(gn) * vs[p];
      }
    for (std::size_t q = 0; q < mi; ++q)
      for (std::size_t p = 0; p < mi; ++p) {
        const cplx gn = g.N_i(q, p) * inv;
        if (gn == 0.0) continue;
        gvi[p] += vi[q] * gn;
        gvi[q] += std::conj(gn) * vi[p];
      }
    for (std::size_t qi = 0; qi < mi; ++qi)
      for (std::size_t qs = 0; qs < ms; ++qs) {
        const cplx ga = 0.5 * inv * g.A(qi, qs);
        gos[qs] += std::conj(vi[qi]) * ga;
        gvi[qi] += std::conj(os[qs]) * ga;
        goi[qi] += std::conj(vs[qs]) * ga;
        gvs[qs] += std::conj(oi[qi]) * ga;
        const cplx gc = inv * g.C(qi, qs);
        gvs[qs] += vi[qi] * gc;
        gvi[qi] += std::conj(gc) * vs[qs];
      }
  }
  return out;
}

MomentSet estimate_moments(const solver::EnsembleState& state, const modes::ModeBasis& basis_s,
                           const modes::ModeBasis& basis_i) {
  if (basis_s.grid() != state.grid() || basis_i.grid() != state.grid())
    throw ShapeError("estimate_moments: bases and ensemble use different grids");
  if (state.count() < 2) throw EstimatorError("at least two realizations are required");
  Coefficients c;
  c.resize(state.count(), basis_s.size(), basis_i.size());
  solver::FieldSet fs(state.grid().size());
  for (std::size_t r = 0; r < state.count(); ++r) {
    state.store(r, fs);
    project_realization(fs, basis_s, basis_i, c, r);
  }
  auto m = moments_from_coefficients(c);
  m.signal_modes = basis_s.indices();
  m.idler_modes = basis_i.indices();
  return m;
}

CoincidenceMatrix CoincidenceMatrix::normalized_copy() const {
  const double s = sum();
  if (!(s > 0.0) || !std::isfinite(s)) throw NormalizationError("coincidence matrix has no positive mass");
  CoincidenceMatrix out = *this;
  out.values /= s;
  out.normalized = true;
  return out;
}

io::json CoincidenceMatrix::to_json() const {
  io::json j;
  j["rows"] = "idler";
  j["columns"] = "signal";
  j["idler_modes"] = io::json::array();
  for (const auto& m : idler_modes) j["idler_modes"].push_back(io::to_json(m));
  j["signal_modes"] = io::json::array();
  for (const auto& m : signal_modes) j["signal_modes"].push_back(io::to_json(m));
  j["normalized"] = normalized;
  j["clip_mass"] = clip_mass;
  j["values"] = io::json::array();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    io::json row = io::json::array();
    for (Eigen::Index c = 0; c < values.cols(); ++c) row.push_back(values(r, c));
    j["values"].push_back(row);
  }
  return j;
}

std::string CoincidenceMatrix::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "idler\\signal";
  for (const auto& m : signal_modes) os << ',' << m.label();
  os << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    os << (static_cast<std::size_t>(r) < idler_modes.size() ? idler_modes[r].label() : std::to_string(r));
    for (Eigen::Index c = 0; c < values.cols(); ++c) os << ',' << values(r, c);
    os << '\n';
  }
  return os.str();
}

CoincidenceMatrix g2_from_moments(const MomentSet& m) {
  CoincidenceMatrix g;
  g.signal_modes = m.signal_modes;
  g.idler_modes = m.idler_modes;
  g.values = RMat::Zero(m.A.rows(), m.A.cols());
  for (Eigen::Index qi = 0; qi < m.A.rows(); ++qi)
    for (Eigen::Index qs = 0; qs < m.A.cols(); ++qs) {
      const double v = m.N_i(qi, qi).real() * m.N_s(qs, qs).real() + std::norm(m.A(qi, qs)) + std::norm(m.C(qi, qs));
      if (v < 0.0) {
        g.clip_mass += -v;
        continue;
      }
      g.values(qi, qs) = v;
    }
  return g;
}

MomentSet g2_backward(const MomentSet& m, const CoincidenceMatrix& g2, const RMat& W) {
  MomentSet g = MomentSet::zeros_like(m);
  for (Eigen::Index qi = 0; qi < m.A.rows(); ++qi)
    for (Eigen::Index qs = 0; qs < m.A.cols(); ++qs) {
      const double w = W(qi, qs);
      if (w == 0.0) continue;
      const double raw =
          m.N_i(qi, qi).real() * m.N_s(qs, qs).real() + std::norm(m.A(qi, qs)) + std::norm(m.C(qi, qs));
      if (raw < 0.0 && g2.values(qi, qs) == 0.0) continue;
      g.N_i(qi, qi) += w * m.N_s(qs, qs).real();
      g.N_s(qs, qs) += w * m.N_i(qi, qi).real();
      g.A(qi, qs) += 2.0 * w * m.A(qi, qs);
      g.C(qi, qs) += 2.0 * w * m.C(qi, qs);
    }
  return g;
}

RMat normalize_backward(const CoincidenceMatrix& raw, const RMat& grad_normalized) {
  const double s = raw.sum();
  if (!(s > 0.0)) throw NormalizationError("coincidence matrix has no positive mass");
  const double dot = (grad_normalized.array() * raw.values.array()).sum() / s;
  return (grad_normalized.array() - dot).matrix() / s;
}

double simulated_projection(const MomentSet& m, const CVec& ki, const CVec& ks) {
  check_ket(ki, m.N_i.rows(), "idler");
  check_ket(ks, m.N_s.rows(), "signal");
  const cplx ns = ks.transpose() * m.N_s * ks.conjugate();
  const cplx ni = ki.transpose() * m.N_i * ki.conjugate();
  const cplx a = ki.adjoint() * m.A * ks.conjugate();
  const cplx c = ki.transpose() * m.C * ks.conjugate();
  return ni.real() * ns.real() + std::norm(a) + std::norm(c);
}

void simulated_projection_backward(const MomentSet& m, const CVec& ki, const CVec& ks, double gp,
                                   MomentSet& g) {
  const cplx ns = ks.transpose() * m.N_s * ks.conjugate();
  const cplx ni = ki.transpose() * m.N_i * ki.conjugate();
  const cplx a = ki.adjoint() * m.A * ks.conjugate();
  const cplx c = ki.transpose() * m.C * ks.conjugate();
  // x = sum_qq' w_qq' X_qq' is holomorphic in X, so dL/dX = conj(w) dL/dx.
  g.N_s += (gp * ni.real()) * (ks.conjugate() * ks.transpose());
  g.N_i += (gp * ns.real()) * (ki.conjugate() * ki.transpose());
  g.A += (2.0 * gp * a) * (ki * ks.transpose());
  g.C += (2.0 * gp * c) * (ki.conjugate() * ks.transpose());
}

std::vector<CMat> generators(int d) {
  std::vector<CMat> out;
  for (const auto& e : generator_eigensystems(d)) {
    CMat s = CMat::Zero(d, d);
    for (std::size_t k = 0; k < e.values.size(); ++k) s += e.values[k] * (e.vectors[k] * e.vectors[k].adjoint());
    out.push_back(s);
  }
  return out;
}

std::vector<Eigensystem> generator_eigensystems(int d) {
  if (d < 2) throw ConfigError("generators need d >= 2");
  const double scale = std::sqrt(d / 2.0);
  const double r2 = 1.0 / std::sqrt(2.0);
  const cplx I(0.0, 1.0);
  auto unit = [d](int k) {
    CVec v = CVec::Zero(d);
    v(k) = 1.0;
    return v;
  };
  std::vector<Eigensystem> out;
  Eigensystem id;
  for (int k = 0; k < d; ++k) {
    id.values.push_back(1.0);
    id.vectors.push_back(unit(k));
  }
  out.push_back(id);
  auto others = [&](int j, int k, Eigensystem& e) {
    for (int l = 0; l < d; ++l)
      if (l != j && l != k) {
        e.values.push_back(0.0);
        e.vectors.push_back(unit(l));
      }
  };
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Eigensystem e;
      e.values = {scale, -scale};
      e.vectors = {r2 * (unit(j) + unit(k)), r2 * (unit(j) - unit(k))};
      others(j, k, e);
      out.push_back(e);
    }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Eigensystem e;
      e.values = {scale, -scale};
      e.vectors = {r2 * (unit(j) + I * unit(k)), r2 * (unit(j) - I * unit(k))};
      others(j, k, e);
      out.push_back(e);
    }
  for (int l = 1; l < d; ++l) {
    const double c = scale * std::sqrt(2.0 / (l * (l + 1.0)));
    Eigensystem e;
    for (int k = 0; k < d; ++k) {
      e.values.push_back(k < l ? c : (k == l ? -l * c : 0.0));
      e.vectors.push_back(unit(k));
    }
    out.push_back(e);
  }
  return out;
}

std::vector<std::vector<CVec>> mub_projectors(int d) {
  if (!is_prime(d)) throw ConfigError("mutually unbiased bases are only provided for prime d, got " + std::to_string(d));
  std::vector<std::vector<CVec>> bases;
  std::vector<CVec> comp;
  for (int k = 0; k < d; ++k) {
    CVec v = CVec::Zero(d);
    v(k) = 1.0;
    comp.push_back(v);
  }
  bases.push_back(comp);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int b = 0; b < d; ++b) {
    std::vector<CVec> basis;
    for (int k = 0; k < d; ++k) {
      CVec v(d);
      for (int j = 0; j < d; ++j) {
        // d = 2 uses i^{b j^2}; odd primes use omega^{b j^2 + k j}.
        double phase;
        if (d == 2)
          phase = std::numbers::pi * (0.5 * b * j * j + k * j);
        else
          phase = 2.0 * std::numbers::pi * static_cast<double>((b * j * j + k * j) % d) / d;
        v(j) = std::polar(amp, phase);
      }
      basis.push_back(v);
    }
    bases.push_back(basis);
  }
  return bases;
}

double ProjectionTable::get(int m, int i, int n, int j) const {
  auto it = data_.find({m, i, n, j});
  if (it == data_.end()) {
    std::ostringstream os;
    os << "projection (" << m << "," << i << "," << n << "," << j << ") missing";
    throw MissingDataError(os.str());
  }
  return it->second;
}

std::vector<std::array<int, 4>> required_projections(int d) {
  const auto eig = generator_eigensystems(d);
  std::vector<std::array<int, 4>> out;
  for (int m = 0; m < static_cast<int>(eig.size()); ++m)
    for (int i = 0; i < d; ++i) {
      if (eig[m].values[i] == 0.0) continue;
      for (int n = 0; n < static_cast<int>(eig.size()); ++n)
        for (int j = 0; j < d; ++j) {
          if (eig[n].values[j] == 0.0) continue;
          out.push_back({m, i, n, j});
        }
    }
  return out;
}

ProjectionTable projections_from_state(const CMat& rho, int d) {
  if (rho.rows() != d * d || rho.cols() != d * d) throw ShapeError("density matrix must be d^2 x d^2");
  const auto eig = generator_eigensystems(d);
  ProjectionTable t(d);
  for (const auto& key : required_projections(d)) {
    const CVec& es = eig[key[0]].vectors[key[1]];
    const CVec& ei = eig[key[2]].vectors[key[3]];
    CVec v(d * d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) v(a * d + b) = es(a) * ei(b);
    t.set(key[0], key[1], key[2], key[3], (v.adjoint() * rho * v)(0, 0).real());
  }
  return t;
}

namespace {
CVec embed(const CVec& v, const std::vector<std::size_t>& positions, std::size_t size) {
  CVec out = CVec::Zero(size);
  for (std::size_t k = 0; k < positions.size(); ++k) out(positions[k]) = v(k);
  return out;
}
}  // namespace

ProjectionTable projections_from_moments(const MomentSet& m, const std::vector<std::size_t>& ss,
                                         const std::vector<std::size_t>& is) {
  if (ss.size() != is.size()) throw ConfigError("signal and idler subspaces differ in dimension");
  const int d = static_cast<int>(ss.size());
  const auto eig = generator_eigensystems(d);
  ProjectionTable t(d);
  for (const auto& key : required_projections(d)) {
    const CVec ks = embed(eig[key[0]].vectors[key[1]], ss, m.N_s.rows());
    const CVec ki = embed(eig[key[2]].vectors[key[3]], is, m.N_i.rows());
    t.set(key[0], key[1], key[2], key[3], simulated_projection(m, ki, ks));
  }
  return t;
}

void projections_backward(const MomentSet& m, const std::vector<std::size_t>& ss,
                          const std::vector<std::size_t>& is, const ProjectionTable& grad, MomentSet& g) {
  const int d = static_cast<int>(ss.size());
  const auto eig = generator_eigensystems(d);
  for (const auto& key : required_projections(d)) {
    const double gp = grad.get(key[0], key[1], key[2], key[3]);
    if (gp == 0.0) continue;
    const CVec ks = embed(eig[key[0]].vectors[key[1]], ss, m.N_s.rows());
    const CVec ki = embed(eig[key[2]].vectors[key[3]], is, m.N_i.rows());
    simulated_projection_backward(m, ki, ks, gp, g);
  }
}

namespace {

CMat raw_reconstruction(const ProjectionTable& t, int d) {
  const auto eig = generator_eigensystems(d);
  const auto sig = generators(d);
  std::vector<std::string> missing;
  for (const auto& k : required_projections(d))
    if (!t.has(k[0], k[1], k[2], k[3])) {
      std::ostringstream os;
      os << "(sigma" << k[0] << " eigvec " << k[1] << ", sigma" << k[2] << " eigvec " << k[3] << ")";
      missing.push_back(os.str());
    }
  if (!missing.empty()) {
    std::ostringstream os;
    os << missing.size() << " projections missing:";
    for (const auto& s : missing) os << ' ' << s;
    throw MissingDataError(os.str());
  }
  CMat rho = CMat::Zero(d * d, d * d);
  const int ng = static_cast<int>(sig.size());
  for (int m = 0; m < ng; ++m)
    for (int n = 0; n < ng; ++n) {
      double rmn = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double w = eig[m].values[i] * eig[n].values[j];
          if (w != 0.0) rmn += w * t.get(m, i, n, j);
        }
      if (rmn == 0.0) continue;
      rho += (rmn / (d * d)) * kron(sig[m], sig[n]);
    }
  return rho;
}

}  // namespace

DensityMatrix reconstruct_density(const ProjectionTable& t, int d) {
  if (t.d() != d) throw ConfigError("projection table dimension differs from d");
  CMat rho = raw_reconstruction(t, d);
  CMat h = 0.5 * (rho + rho.adjoint());
  const double tr = h.trace().real();
  if (!(std::abs(tr) > 0.0)) throw NormalizationError("reconstructed density matrix has zero trace");
  DensityMatrix out;
  out.d = d;
  out.rho = h / tr;
  return out;
}

ProjectionTable reconstruct_density_backward(const ProjectionTable& t, int d, const CMat& G) {
  const CMat rho = raw_reconstruction(t, d);
  const CMat h = 0.5 * (rho + rho.adjoint());
  const double tr = h.trace().real();
  // rho_out = h / tr
  const double dot = (G.conjugate().array() * h.array()).sum().real();
  CMat gh = G / tr;
  gh.diagonal().array() -= dot / (tr * tr);
  const CMat gr = 0.5 * (gh + gh.adjoint());
  const auto eig = generator_eigensystems(d);
  const auto sig = generators(d);
  ProjectionTable out(d);
  for (const auto& k : required_projections(d)) {
    const double w = eig[k[0]].values[k[1]] * eig[k[2]].values[k[3]] / (d * d);
    const CMat basis = kron(sig[k[0]], sig[k[2]]);
    out.set(k[0], k[1], k[2], k[3], w * (gr.conjugate().array() * basis.array()).sum().real());
  }
  return out;
}

double DensityMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

io::json DensityMatrix::to_json() const {
  io::json j;
  j["d"] = d;
  j["ordering"] = "signal (x) idler, index = l_s * d + l_i";
  j["subspace_signal"] = io::json::array();
  for (const auto& m : subspace_s) j["subspace_signal"].push_back(io::to_json(m));
  j["subspace_idler"] = io::json::array();
  for (const auto& m : subspace_i) j["subspace_idler"].push_back(io::to_json(m));
  std::vector<std::vector<cplx>> rows(rho.rows(), std::vector<cplx>(rho.cols()));
  for (Eigen::Index r = 0; r < rho.rows(); ++r)
    for (Eigen::Index c = 0; c < rho.cols(); ++c) rows[r][c] = rho(r, c);
  j["rho"] = io::complex_matrix(rows);
  return j;
}

std::vector<std::size_t> subspace_positions(const std::vector<modes::ModeIndex>& subspace,
                                            const std::vector<modes::ModeIndex>& basis) {
  std::vector<std::size_t> out;
  for (const auto& m : subspace) {
    bool found = false;
    for (std::size_t k = 0; k < basis.size(); ++k)
      if (basis[k] == m) {
        out.push_back(k);
        found = true;
        break;
      }
    if (!found) throw ConfigError("tomography subspace mode " + m.label() + " is not in the measurement basis");
  }
  return out;
}

}  // namespace spdc::observables
