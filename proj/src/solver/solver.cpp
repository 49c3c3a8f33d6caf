#include "spdc/solver/solver.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spdc/core/errors.hpp"
#include "spdc/core/parallel.hpp"
#include "spdc/core/rng.hpp"
#include "spdc/kernels/kernels.hpp"

namespace spdc::solver {

namespace {

bool finite(const CplxVec& v) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

CplxVec conjugated(const CplxVec& v) {
  CplxVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::conj(v[i]);
  return out;
}

constexpr char kMagic[8] = {'S', 'P', 'D', 'C', 'E', 'N', 'S', '1'};

template <class T>
void write_le(std::ofstream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_le(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated checkpoint file");
  return v;
}

}  // namespace

CplxVec diffraction_phase(const TransverseGrid& grid, double k, double dz) {
  CplxVec h(grid.size());
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double ky = grid.ky()[iy];
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double kx = grid.kx()[ix];
      h[grid.index(ix, iy)] = std::polar(inv_n, -(kx * kx + ky * ky) * dz / (2.0 * k));
    }
  }
  return h;
}

ComplexField diffract(const ComplexField& field, double k, double dz) {
  ComplexField out = field;
  const auto h = diffraction_phase(field.grid(), k, dz);
  Fft2d fft(field.grid());
  fft.forward(out.data());
  kernels::active().cmul(out.data(), h.data(), out.size());
  fft.inverse(out.data());
  return out;
}

EnsembleState::EnsembleState(const TransverseGrid& grid, std::size_t count, std::size_t first)
    : grid_(grid), count_(count), first_(first) {
  for (auto& s : stacks_) s.assign(count * grid.size(), cplx(0.0));
}

ComplexField EnsembleState::field_copy(Stack s, std::size_t r) const {
  const cplx* p = field(s, r);
  return ComplexField(grid_, CplxVec(p, p + grid_.size()));
}

void EnsembleState::load(std::size_t r, const FieldSet& fs) {
  for (int s = 0; s < 4; ++s)
    std::memcpy(field(static_cast<Stack>(s), r), fs.f[s].data(), grid_.size() * sizeof(cplx));
}

void EnsembleState::store(std::size_t r, FieldSet& fs) const {
  for (int s = 0; s < 4; ++s) {
    fs.f[s].resize(grid_.size());
    std::memcpy(fs.f[s].data(), field(static_cast<Stack>(s), r), grid_.size() * sizeof(cplx));
  }
}

bool EnsembleState::all_finite() const {
  for (const auto& s : stacks_)
    if (!finite(s)) return false;
  return true;
}

void EnsembleState::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 8);
  write_le<std::uint64_t>(os, grid_.nx());
  write_le<std::uint64_t>(os, grid_.ny());
  write_le<std::uint64_t>(os, count_);
  write_le<std::uint64_t>(os, first_);
  write_le<double>(os, grid_.dx());
  write_le<double>(os, grid_.dy());
  write_le<double>(os, zeta);
  for (const auto& s : stacks_) os.write(reinterpret_cast<const char*>(s.data()), s.size() * sizeof(cplx));
  if (!os) throw ConfigError("failed writing checkpoint: " + path);
}

EnsembleState EnsembleState::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("not an ensemble checkpoint: " + path);
  const auto nx = read_le<std::uint64_t>(is);
  const auto ny = read_le<std::uint64_t>(is);
  const auto count = read_le<std::uint64_t>(is);
  const auto first = read_le<std::uint64_t>(is);
  const auto dx = read_le<double>(is);
  const auto dy = read_le<double>(is);
  const auto zeta = read_le<double>(is);
  EnsembleState st(TransverseGrid(nx, ny, dx, dy), count, first);
  st.zeta = zeta;
  for (auto& s : st.stacks_) {
    is.read(reinterpret_cast<char*>(s.data()), static_cast<std::streamsize>(s.size() * sizeof(cplx)));
    if (!is) throw ConfigError("truncated checkpoint file: " + path);
  }
  return st;
}

void init_realization(FieldSet& fs, const TransverseGrid& grid, std::uint64_t seed, std::size_t realization,
                      double noise_scale) {
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) throw ConfigError("noise_scale must be positive");
  const double var = noise_scale * noise_scale / grid.cell_area();
  RngStream rng(seed, realization);
  for (auto& v : fs.f) v.assign(grid.size(), cplx(0.0));
  for (auto& z : fs[Stack::signal_out]) z = rng.complex_normal(var);
  for (auto& z : fs[Stack::idler_out]) z = rng.complex_normal(var);
}

EnsembleState init_vacuum(const TransverseGrid& grid, const InteractionSpec& spec, double noise_scale,
                          std::size_t first, std::size_t count) {
  if (spec.n_realizations < 2) throw ConfigError("n_realizations must be at least 2");
  if (count == 0) count = spec.n_realizations;
  EnsembleState st(grid, count, first);
  FieldSet fs(grid.size());
  for (std::size_t r = 0; r < count; ++r) {
    init_realization(fs, grid, spec.seed, first + r, noise_scale);
    st.load(r, fs);
  }
  return st;
}

void linear_half_step(EnsembleState& state, const InteractionSpec& spec, double dz) {
  const auto& grid = state.grid();
  const auto hs = diffraction_phase(grid, spec.k_s(), dz);
  const auto hi = diffraction_phase(grid, spec.k_i(), dz);
  Fft2d fft(grid);
  const auto& kt = kernels::active();
  for (std::size_t r = 0; r < state.count(); ++r)
    for (int s = 0; s < 4; ++s) {
      const auto stack = static_cast<Stack>(s);
      const auto& h = (stack == Stack::signal_out || stack == Stack::signal_vac) ? hs : hi;
      cplx* f = state.field(stack, r);
      fft.forward(f);
      kt.cmul(f, h.data(), grid.size());
      fft.inverse(f);
    }
  state.zeta += dz;
}

void nonlinear_step(EnsembleState& state, const structure::CrystalSlice& slice, const ComplexField& pump,
                    const InteractionSpec& spec, double dz) {
  const auto& grid = state.grid();
  if (slice.chi.grid() != grid || pump.grid() != grid) throw ShapeError("nonlinear_step: grid mismatch");
  const std::size_t n = grid.size();
  const cplx carrier = spec.gain * std::polar(1.0, -spec.delta_k() * slice.zeta) * dz;
  RealVec ch(n);
  CplxVec k(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx g = carrier * slice.chi[i] * pump[i];
    const double r = std::abs(g);
    ch[i] = std::cosh(r);
    k[i] = cplx(0.0, -1.0) * g * (r > 0.0 ? std::sinh(r) / r : 1.0);
  }
  const auto& kt = kernels::active();
  for (std::size_t r = 0; r < state.count(); ++r) {
    kt.squeeze(state.field(Stack::signal_out, r), state.field(Stack::idler_vac, r), ch.data(), k.data(), n);
    kt.squeeze(state.field(Stack::idler_out, r), state.field(Stack::signal_vac, r), ch.data(), k.data(), n);
  }
}

SplitStepModel::SplitStepModel(const TransverseGrid& grid, const InteractionSpec& spec,
                               const structure::Crystal& crystal, const ComplexField& pump_waist_plane)
    : grid_(grid), spec_(spec), n_z_(spec.n_z), fft_(grid) {
  spec.validate();
  if (crystal.size() != n_z_) throw ShapeError("crystal must have one slice per propagation step");
  if (pump_waist_plane.grid() != grid) throw ShapeError("pump grid differs from the simulation grid");
  const double dz = spec.dz();
  const double L = spec.length;
  const std::size_t n = grid.size();
  const double kp = spec.k_p();

  for (std::size_t j = 0; j < n_z_; ++j) {
    if (crystal[j].chi.grid() != grid) throw ShapeError("crystal slice grid differs from the simulation grid");
    const double zeta = spec.zeta(j);
    pump_.push_back(spec.pump_diffraction ? solver::diffract(pump_waist_plane, kp, zeta - L / 2.0) : pump_waist_plane);
    if (spec.pump_diffraction) pump_back_.push_back(diffraction_phase(grid, kp, L / 2.0 - zeta));
    chi_.push_back(crystal[j].chi);
    carrier_.push_back(spec.gain * std::polar(1.0, -spec.delta_k() * zeta) * dz);

    CplxVec g(n), k(n);
    RealVec ch(n), sh(n), dsh(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = carrier_[j] * chi_[j][i] * pump_[j][i];
      const double r = std::abs(g[i]);
      const double t = r * r;
      const double s = r > 0.0 ? std::sinh(r) / r : 1.0;
      ch[i] = std::cosh(r);
      sh[i] = s;
      dsh[i] = t < 1e-6 ? 1.0 / 6.0 + t / 60.0 : (ch[i] - s) / (2.0 * t);
      k[i] = cplx(0.0, -1.0) * g[i] * s;
    }
    if (!finite(g)) throw NumericBlowup(j, "coupling coefficient");
    g_.push_back(std::move(g));
    k_.push_back(std::move(k));
    cosh_.push_back(std::move(ch));
    sh_.push_back(std::move(sh));
    dsh_.push_back(std::move(dsh));
  }
  h_first_s_ = diffraction_phase(grid, spec.k_s(), dz / 2.0);
  h_step_s_ = diffraction_phase(grid, spec.k_s(), dz);
  h_last_s_ = diffraction_phase(grid, spec.k_s(), dz / 2.0 - L / 2.0);
  h_exit_s_ = h_first_s_;
  h_first_i_ = diffraction_phase(grid, spec.k_i(), dz / 2.0);
  h_step_i_ = diffraction_phase(grid, spec.k_i(), dz);
  h_last_i_ = diffraction_phase(grid, spec.k_i(), dz / 2.0 - L / 2.0);
  h_exit_i_ = h_first_i_;
  h_first_s_adj_ = conjugated(h_first_s_);
  h_step_s_adj_ = conjugated(h_step_s_);
  h_last_s_adj_ = conjugated(h_last_s_);
  h_first_i_adj_ = conjugated(h_first_i_);
  h_step_i_adj_ = conjugated(h_step_i_);
  h_last_i_adj_ = conjugated(h_last_i_);
}

void SplitStepModel::diffract(CplxVec& field, const CplxVec& phase) const {
  fft_.forward(field.data());
  kernels::active().cmul(field.data(), phase.data(), field.size());
  fft_.inverse(field.data());
}

void SplitStepModel::forward(FieldSet& fs, std::vector<FieldSet>* trajectory, bool to_center) const {
  const auto& kt = kernels::active();
  const std::size_t n = grid_.size();
  auto linear = [&](const CplxVec& hs, const CplxVec& hi) {
    diffract(fs[Stack::signal_out], hs);
    diffract(fs[Stack::signal_vac], hs);
    diffract(fs[Stack::idler_out], hi);
    diffract(fs[Stack::idler_vac], hi);
  };
  if (trajectory) trajectory->resize(n_z_);
  for (std::size_t j = 0; j < n_z_; ++j) {
    if (j == 0)
      linear(h_first_s_, h_first_i_);
    else
      linear(h_step_s_, h_step_i_);
    if (trajectory) (*trajectory)[j] = fs;
    kt.squeeze(fs[Stack::signal_out].data(), fs[Stack::idler_vac].data(), cosh_[j].data(), k_[j].data(), n);
    kt.squeeze(fs[Stack::idler_out].data(), fs[Stack::signal_vac].data(), cosh_[j].data(), k_[j].data(), n);
    if (!finite(fs[Stack::signal_out]) || !finite(fs[Stack::idler_out]))
      throw NumericBlowup(j, "field amplitude");
  }
  if (to_center)
    linear(h_last_s_, h_last_i_);
  else
    linear(h_exit_s_, h_exit_i_);
}

void SplitStepModel::backward(const std::vector<FieldSet>& trajectory, FieldSet& grad,
                              std::vector<CplxVec>& grad_g) const {
  if (trajectory.size() != n_z_) throw ShapeError("trajectory length differs from the step count");
  if (grad_g.size() != n_z_) grad_g.assign(n_z_, CplxVec(grid_.size()));
  const auto& kt = kernels::active();
  const std::size_t n = grid_.size();
  auto linear_adj = [&](const CplxVec& hs, const CplxVec& hi) {
    diffract(grad[Stack::signal_out], hs);
    diffract(grad[Stack::signal_vac], hs);
    diffract(grad[Stack::idler_out], hi);
    diffract(grad[Stack::idler_vac], hi);
  };
  linear_adj(h_last_s_adj_, h_last_i_adj_);
  for (std::size_t jj = n_z_; jj-- > 0;) {
    const auto& pre = trajectory[jj];
    const kernels::SqueezeCoeffs c{cosh_[jj].data(), k_[jj].data(), g_[jj].data(), sh_[jj].data(), dsh_[jj].data()};
    kt.squeeze_coupling_grad(pre[Stack::signal_out].data(), pre[Stack::idler_vac].data(),
                             grad[Stack::signal_out].data(), grad[Stack::idler_vac].data(), c, grad_g[jj].data(), n);
    kt.squeeze_coupling_grad(pre[Stack::idler_out].data(), pre[Stack::signal_vac].data(),
                             grad[Stack::idler_out].data(), grad[Stack::signal_vac].data(), c, grad_g[jj].data(), n);
    // The squeeze Jacobian transpose has the same form as the forward step.
    kt.squeeze(grad[Stack::signal_out].data(), grad[Stack::idler_vac].data(), cosh_[jj].data(), k_[jj].data(), n);
    kt.squeeze(grad[Stack::idler_out].data(), grad[Stack::signal_vac].data(), cosh_[jj].data(), k_[jj].data(), n);
    if (jj == 0)
      linear_adj(h_first_s_adj_, h_first_i_adj_);
    else
      linear_adj(h_step_s_adj_, h_step_i_adj_);
  }
}

std::vector<ComplexField> SplitStepModel::chi_gradient(const std::vector<CplxVec>& grad_g) const {
  std::vector<ComplexField> out;
  out.reserve(n_z_);
  for (std::size_t j = 0; j < n_z_; ++j) {
    ComplexField gc(grid_);
    for (std::size_t i = 0; i < grid_.size(); ++i) gc[i] = std::conj(carrier_[j] * pump_[j][i]) * grad_g[j][i];
    out.push_back(std::move(gc));
  }
  return out;
}

ComplexField SplitStepModel::pump_gradient(const std::vector<CplxVec>& grad_g) const {
  ComplexField total(grid_);
  for (std::size_t j = 0; j < n_z_; ++j) {
    CplxVec gp(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) gp[i] = std::conj(carrier_[j] * chi_[j][i]) * grad_g[j][i];
    if (spec_.pump_diffraction) diffract(gp, pump_back_[j]);
    for (std::size_t i = 0; i < grid_.size(); ++i) total[i] += gp[i];
  }
  return total;
}

EnsembleState& propagate(EnsembleState& state, const structure::Crystal& crystal, const ComplexField& pump,
                         const InteractionSpec& spec, std::size_t workers) {
  SplitStepModel model(state.grid(), spec, crystal, pump);
  parallel_for(
      state.count(),
      [&](std::size_t r) {
        FieldSet fs(state.grid().size());
        state.store(r, fs);
        model.forward(fs, nullptr, false);
        state.load(r, fs);
      },
      workers);
  state.zeta = spec.length;
  return state;
}

void refocus(EnsembleState& state, const InteractionSpec& spec) {
  linear_half_step(state, spec, -spec.length / 2.0);
}

}  // namespace spdc::solver
