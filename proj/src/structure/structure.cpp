#include "spdc/structure/structure.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spdc/core/errors.hpp"

namespace spdc::structure {

namespace {

ComplexField raw_mode(const modes::ModeIndex& idx, double waist, const TransverseGrid& grid) {
  return idx.family == modes::Family::LG ? modes::lg_mode(idx, waist, grid)
                                         : modes::hg_mode(idx, waist, grid);
}

void check_sizes(const std::string& what, std::size_t got, std::size_t want) {
  if (got != want) {
    std::ostringstream os;
    os << what << " has " << got << " entries, expected " << want;
    throw ConfigError(os.str());
  }
}

void check_waists(const std::string& what, const std::vector<double>& w) {
  for (double v : w)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}

// Transverse superposition per segment plus the location of max |S|.
struct CrystalProfile {
  std::vector<ComplexField> segments;
  double max_abs = 1.0;
  std::size_t arg_segment = 0;
  std::size_t arg_cell = 0;
};

CrystalProfile crystal_profile(const CrystalParams& c, const TransverseGrid& grid,
                               std::vector<ComplexField>* basis_out = nullptr) {
  CrystalProfile prof;
  if (c.uniform()) {
    ComplexField one(grid);
    for (std::size_t i = 0; i < one.size(); ++i) one[i] = 1.0;
    prof.segments.assign(c.n_segments, one);
    return prof;
  }
  std::vector<ComplexField> basis;
  for (std::size_t n = 0; n < c.modes.size(); ++n) basis.push_back(raw_mode(c.modes[n], c.waists[n], grid));
  prof.max_abs = 0.0;
  for (std::size_t s = 0; s < c.n_segments; ++s) {
    ComplexField S(grid);
    for (std::size_t n = 0; n < c.modes.size(); ++n) {
      const cplx a = c.coeff(s, n);
      if (a == 0.0) continue;
      for (std::size_t i = 0; i < S.size(); ++i) S[i] += a * basis[n][i];
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double v = std::abs(S[i]);
      if (v > prof.max_abs) {
        prof.max_abs = v;
        prof.arg_segment = s;
        prof.arg_cell = i;
      }
    }
    prof.segments.push_back(std::move(S));
  }
  if (!(prof.max_abs > 0.0)) throw ConfigError("degenerate crystal: all structure coefficients are zero");
  if (basis_out) *basis_out = std::move(basis);
  return prof;
}

}  // namespace

void ParamSet::validate() const {
  if (pump.modes.empty()) throw ConfigError("pump needs at least one mode");
  check_sizes("pump coefficients", pump.coeffs.size(), pump.modes.size());
  check_sizes("pump waists", pump.waists.size(), pump.modes.size());
  check_sizes("pump coefficient mask", pump.learn_coeffs.size(), 2 * pump.modes.size());
  check_sizes("pump waist mask", pump.learn_waists.size(), pump.modes.size());
  check_waists("pump waists", pump.waists);
  if (crystal.n_segments < 1) throw ConfigError("crystal needs at least one segment");
  check_sizes("crystal coefficients", crystal.coeffs.size(), crystal.n_segments * crystal.modes.size());
  check_sizes("crystal waists", crystal.waists.size(), crystal.modes.size());
  check_sizes("crystal coefficient mask", crystal.learn_coeffs.size(), 2 * crystal.coeffs.size());
  check_sizes("crystal waist mask", crystal.learn_waists.size(), crystal.modes.size());
  check_waists("crystal waists", crystal.waists);
  for (auto z : pump.coeffs)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ConfigError("pump coefficient not finite");
  for (auto z : crystal.coeffs)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ConfigError("crystal coefficient not finite");
}

void ParamSet::validate(const InteractionSpec& spec) const {
  validate();
  if (spec.n_z % crystal.n_segments != 0)
    throw ConfigError("crystal segment count " + std::to_string(crystal.n_segments) +
                      " does not divide n_z = " + std::to_string(spec.n_z));
}

std::size_t ParamSet::n_scalars() const { return crystal_waist_offset() + crystal.waists.size(); }

std::vector<double> ParamSet::pack() const {
  std::vector<double> v;
  v.reserve(n_scalars());
  for (auto z : pump.coeffs) {
    v.push_back(z.real());
    v.push_back(z.imag());
  }
  for (double w : pump.waists) v.push_back(w / kWaistUnit);
  for (auto z : crystal.coeffs) {
    v.push_back(z.real());
    v.push_back(z.imag());
  }
  for (double w : crystal.waists) v.push_back(w / kWaistUnit);
  return v;
}

void ParamSet::unpack(const std::vector<double>& v) {
  if (v.size() != n_scalars()) throw ShapeError("parameter vector length mismatch");
  std::size_t k = 0;
  for (auto& z : pump.coeffs) {
    z = {v[k], v[k + 1]};
    k += 2;
  }
  for (auto& w : pump.waists) w = v[k++] * kWaistUnit;
  for (auto& z : crystal.coeffs) {
    z = {v[k], v[k + 1]};
    k += 2;
  }
  for (auto& w : crystal.waists) w = v[k++] * kWaistUnit;
}

std::vector<bool> ParamSet::mask() const {
  std::vector<bool> m;
  m.insert(m.end(), pump.learn_coeffs.begin(), pump.learn_coeffs.end());
  m.insert(m.end(), pump.learn_waists.begin(), pump.learn_waists.end());
  m.insert(m.end(), crystal.learn_coeffs.begin(), crystal.learn_coeffs.end());
  m.insert(m.end(), crystal.learn_waists.begin(), crystal.learn_waists.end());
  return m;
}

std::size_t ParamSet::n_learnable() const {
  std::size_t n = 0;
  for (bool b : mask()) n += b;
  return n;
}

std::vector<std::string> ParamSet::scalar_names() const {
  std::vector<std::string> names;
  for (const auto& m : pump.modes) {
    names.push_back("pump." + m.label() + ".re");
    names.push_back("pump." + m.label() + ".im");
  }
  for (const auto& m : pump.modes) names.push_back("pump." + m.label() + ".waist_um");
  for (std::size_t s = 0; s < crystal.n_segments; ++s)
    for (const auto& m : crystal.modes) {
      const std::string base = "crystal[" + std::to_string(s) + "]." + m.label();
      names.push_back(base + ".re");
      names.push_back(base + ".im");
    }
  for (const auto& m : crystal.modes) names.push_back("crystal." + m.label() + ".waist_um");
  return names;
}

void ParamSet::freeze_all() {
  set_learn_pump_coeffs(false);
  set_learn_pump_waists(false);
  set_learn_crystal_coeffs(false);
  set_learn_crystal_waists(false);
}
void ParamSet::set_learn_pump_waists(bool on) { pump.learn_waists.assign(pump.waists.size(), on); }
void ParamSet::set_learn_pump_coeffs(bool on) { pump.learn_coeffs.assign(2 * pump.coeffs.size(), on); }
void ParamSet::set_learn_crystal_coeffs(bool on) { crystal.learn_coeffs.assign(2 * crystal.coeffs.size(), on); }
void ParamSet::set_learn_crystal_waists(bool on) { crystal.learn_waists.assign(crystal.waists.size(), on); }

namespace {

io::json mask_json(const std::vector<bool>& m) {
  io::json a = io::json::array();
  for (bool b : m) a.push_back(b);
  return a;
}

// Accepts a single bool, one bool per entry, or (for coefficient masks) one
// [re, im] bool pair per entry.
std::vector<bool> mask_from_json(const io::json* j, std::size_t entries, std::size_t per_entry,
                                 const std::string& where) {
  if (!j) return std::vector<bool>(entries * per_entry, false);
  if (j->is_boolean()) return std::vector<bool>(entries * per_entry, j->get<bool>());
  if (!j->is_array()) throw ConfigError(where + ": mask must be a bool or an array");
  std::vector<bool> out;
  if (j->size() == entries * per_entry && (j->empty() || (*j)[0].is_boolean())) {
    for (const auto& b : *j) {
      if (!b.is_boolean()) throw ConfigError(where + ": mask entries must be bools");
      out.push_back(b.get<bool>());
    }
    return out;
  }
  if (j->size() != entries) throw ConfigError(where + ": mask length does not match");
  for (const auto& b : *j) {
    if (b.is_boolean()) {
      out.insert(out.end(), per_entry, b.get<bool>());
    } else if (b.is_array() && b.size() == per_entry) {
      for (const auto& x : b) {
        if (!x.is_boolean()) throw ConfigError(where + ": mask entries must be bools");
        out.push_back(x.get<bool>());
      }
    } else {
      throw ConfigError(where + ": malformed mask entry");
    }
  }
  return out;
}

std::vector<double> waists_from_json(const io::json& j, std::size_t n, const std::string& where) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  if (!j.is_array() || j.size() != n) throw ConfigError(where + ": need one waist per mode");
  std::vector<double> w;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(where + ": waists must be numbers");
    w.push_back(x.get<double>());
  }
  return w;
}

}  // namespace

io::json ParamSet::to_json() const {
  io::json p;
  p["modes"] = io::json::array();
  for (const auto& m : pump.modes) p["modes"].push_back(io::to_json(m));
  p["coeffs"] = io::json::array();
  for (auto z : pump.coeffs) p["coeffs"].push_back(io::to_json(z));
  p["waists"] = pump.waists;
  p["learn_coeffs"] = mask_json(pump.learn_coeffs);
  p["learn_waists"] = mask_json(pump.learn_waists);

  io::json c;
  c["modes"] = io::json::array();
  for (const auto& m : crystal.modes) c["modes"].push_back(io::to_json(m));
  c["segments"] = io::json::array();
  for (std::size_t s = 0; s < crystal.n_segments; ++s) {
    io::json seg = io::json::array();
    for (std::size_t n = 0; n < crystal.modes.size(); ++n) seg.push_back(io::to_json(crystal.coeff(s, n)));
    c["segments"].push_back(seg);
  }
  c["waists"] = crystal.waists;
  c["learn_coeffs"] = mask_json(crystal.learn_coeffs);
  c["learn_waists"] = mask_json(crystal.learn_waists);
  return io::json{{"pump", p}, {"crystal", c}};
}

ParamSet ParamSet::from_json(const io::json& j) {
  io::reject_unknown_keys(j, {"pump", "crystal"}, "parameters");
  if (!j.contains("pump")) throw ConfigError("parameters: missing \"pump\"");
  ParamSet ps;
  const auto& p = j["pump"];
  io::reject_unknown_keys(p, {"modes", "coeffs", "waists", "learn_coeffs", "learn_waists"}, "parameters.pump");
  if (!p.contains("modes") || !p["modes"].is_array()) throw ConfigError("parameters.pump: missing \"modes\"");
  for (std::size_t k = 0; k < p["modes"].size(); ++k)
    ps.pump.modes.push_back(io::mode_from_json(p["modes"][k], "parameters.pump.modes[" + std::to_string(k) + "]"));
  const std::size_t np = ps.pump.modes.size();
  if (!p.contains("coeffs") || !p["coeffs"].is_array() || p["coeffs"].size() != np)
    throw ConfigError("parameters.pump: need one coefficient per mode");
  for (std::size_t k = 0; k < np; ++k)
    ps.pump.coeffs.push_back(io::complex_from_json(p["coeffs"][k], "parameters.pump.coeffs[" + std::to_string(k) + "]"));
  if (!p.contains("waists")) throw ConfigError("parameters.pump: missing \"waists\"");
  ps.pump.waists = waists_from_json(p["waists"], np, "parameters.pump.waists");
  ps.pump.learn_coeffs = mask_from_json(p.contains("learn_coeffs") ? &p["learn_coeffs"] : nullptr, np, 2,
                                        "parameters.pump.learn_coeffs");
  ps.pump.learn_waists = mask_from_json(p.contains("learn_waists") ? &p["learn_waists"] : nullptr, np, 1,
                                        "parameters.pump.learn_waists");

  if (j.contains("crystal")) {
    const auto& c = j["crystal"];
    io::reject_unknown_keys(c, {"modes", "segments", "waists", "learn_coeffs", "learn_waists"},
                            "parameters.crystal");
    if (c.contains("modes")) {
      if (!c["modes"].is_array()) throw ConfigError("parameters.crystal.modes must be an array");
      for (std::size_t k = 0; k < c["modes"].size(); ++k)
        ps.crystal.modes.push_back(
            io::mode_from_json(c["modes"][k], "parameters.crystal.modes[" + std::to_string(k) + "]"));
    }
    const std::size_t nc = ps.crystal.modes.size();
    if (nc > 0) {
      if (!c.contains("segments") || !c["segments"].is_array() || c["segments"].empty())
        throw ConfigError("parameters.crystal: need \"segments\", one coefficient list per segment");
      ps.crystal.n_segments = c["segments"].size();
      for (std::size_t s = 0; s < ps.crystal.n_segments; ++s) {
        const auto& seg = c["segments"][s];
        const std::string where = "parameters.crystal.segments[" + std::to_string(s) + "]";
        if (!seg.is_array() || seg.size() != nc) throw ConfigError(where + ": need one coefficient per mode");
        for (std::size_t n = 0; n < nc; ++n)
          ps.crystal.coeffs.push_back(io::complex_from_json(seg[n], where + "[" + std::to_string(n) + "]"));
      }
      if (!c.contains("waists")) throw ConfigError("parameters.crystal: missing \"waists\"");
      ps.crystal.waists = waists_from_json(c["waists"], nc, "parameters.crystal.waists");
    } else if (c.contains("segments") && c["segments"].is_array() && !c["segments"].empty()) {
      bool all_empty = true;
      for (const auto& seg : c["segments"]) all_empty = all_empty && seg.is_array() && seg.empty();
      if (!all_empty) throw ConfigError("parameters.crystal: segments given without modes");
    }
    ps.crystal.learn_coeffs =
        mask_from_json(c.contains("learn_coeffs") ? &c["learn_coeffs"] : nullptr, ps.crystal.coeffs.size(), 2,
                       "parameters.crystal.learn_coeffs");
    ps.crystal.learn_waists = mask_from_json(c.contains("learn_waists") ? &c["learn_waists"] : nullptr, nc, 1,
                                             "parameters.crystal.learn_waists");
  }
  ps.validate();
  return ps;
}

PumpParams gaussian_pump(double waist) {
  return pump_from_modes({modes::ModeIndex::lg(0, 0)}, {1.0}, waist);
}

PumpParams pump_from_modes(std::vector<modes::ModeIndex> m, std::vector<cplx> coeffs, double waist) {
  PumpParams p;
  p.waists.assign(m.size(), waist);
  p.learn_coeffs.assign(2 * m.size(), false);
  p.learn_waists.assign(m.size(), false);
  p.modes = std::move(m);
  p.coeffs = std::move(coeffs);
  return p;
}

CrystalParams uniform_crystal() { return CrystalParams{}; }

ComplexField build_pump(const PumpParams& pump, const TransverseGrid& grid) {
  ComplexField S(grid);
  for (std::size_t n = 0; n < pump.modes.size(); ++n) {
    if (pump.coeffs[n] == 0.0) continue;
    const auto phi = modes::mode_field(pump.modes[n], pump.waists[n], grid);
    for (std::size_t i = 0; i < S.size(); ++i) S[i] += pump.coeffs[n] * phi[i];
  }
  const double p = S.power();
  if (!(p > 0.0)) throw ConfigError("degenerate pump: all pump coefficients are zero");
  S *= 1.0 / std::sqrt(p);
  return S;
}

std::vector<double> build_pump_backward(const PumpParams& pump, const TransverseGrid& grid,
                                        const ComplexField& grad_E) {
  std::vector<ComplexField> basis;
  ComplexField S(grid);
  for (std::size_t n = 0; n < pump.modes.size(); ++n) {
    basis.push_back(modes::mode_field(pump.modes[n], pump.waists[n], grid));
    for (std::size_t i = 0; i < S.size(); ++i) S[i] += pump.coeffs[n] * basis[n][i];
  }
  const double norm = std::sqrt(S.power());
  if (!(norm > 0.0)) throw ConfigError("degenerate pump: all pump coefficients are zero");
  // E = S / |S|  =>  grad_S = G/|S| - (dA/|S|) Re<G, E> E
  double re_ge = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) re_ge += std::real(std::conj(grad_E[i]) * S[i]) / norm;
  ComplexField gS(grid);
  const double w = grid.cell_area();
  for (std::size_t i = 0; i < S.size(); ++i) gS[i] = grad_E[i] / norm - (w / norm) * re_ge * (S[i] / norm);

  std::vector<double> out(3 * pump.modes.size(), 0.0);
  for (std::size_t n = 0; n < pump.modes.size(); ++n) {
    cplx ga = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) ga += std::conj(basis[n][i]) * gS[i];
    out[2 * n] = ga.real();
    out[2 * n + 1] = ga.imag();
    if (pump.coeffs[n] == 0.0) continue;
    const auto dphi = modes::mode_waist_derivative(pump.modes[n], pump.waists[n], grid);
    double gw = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) gw += std::real(std::conj(gS[i]) * pump.coeffs[n] * dphi[i]);
    out[2 * pump.modes.size() + n] = gw * kWaistUnit;
  }
  return out;
}

double poling_carrier(double zeta, const InteractionSpec& spec) {
  if (!spec.poling_period) return 1.0;
  const double period = *spec.poling_period;
  if (!(period > 0.0)) throw ConfigError("poling period must be positive");
  return std::cos(2.0 * std::numbers::pi * zeta / period) >= 0.0 ? 1.0 : -1.0;
}

Crystal build_crystal(const CrystalParams& crystal, const InteractionSpec& spec, const TransverseGrid& grid) {
  if (crystal.n_segments < 1 || spec.n_z % crystal.n_segments != 0)
    throw ConfigError("crystal segment count must divide n_z");
  const auto prof = crystal_profile(crystal, grid);
  const std::size_t per_segment = spec.n_z / crystal.n_segments;
  Crystal slices;
  slices.reserve(spec.n_z);
  for (std::size_t j = 0; j < spec.n_z; ++j) {
    const double zeta = spec.zeta(j);
    const double scale = spec.chi2_magnitude * poling_carrier(zeta, spec) / prof.max_abs;
    ComplexField chi = prof.segments[j / per_segment];
    chi *= scale;
    slices.push_back(CrystalSlice{std::move(chi), zeta});
  }
  return slices;
}

std::vector<double> build_crystal_backward(const CrystalParams& crystal, const InteractionSpec& spec,
                                           const TransverseGrid& grid,
                                           const std::vector<ComplexField>& grad_chi) {
  const std::size_t nc = crystal.modes.size();
  std::vector<double> out(2 * crystal.coeffs.size() + nc, 0.0);
  if (crystal.uniform()) return out;
  if (grad_chi.size() != spec.n_z) throw ShapeError("one crystal gradient per step required");
  std::vector<ComplexField> basis;
  const auto prof = crystal_profile(crystal, grid, &basis);
  const std::size_t per_segment = spec.n_z / crystal.n_segments;
  const double M = prof.max_abs;

  std::vector<ComplexField> gS(crystal.n_segments, ComplexField(grid));
  double dl_dm = 0.0;  // dL/dM through the normalization
  for (std::size_t j = 0; j < spec.n_z; ++j) {
    const std::size_t s = j / per_segment;
    const double scale = spec.chi2_magnitude * poling_carrier(spec.zeta(j), spec);
    const auto& G = grad_chi[j];
    const auto& S = prof.segments[s];
    for (std::size_t i = 0; i < S.size(); ++i) {
      gS[s][i] += (scale / M) * G[i];
      dl_dm -= std::real(std::conj(G[i]) * S[i]) * scale / (M * M);
    }
  }
  const cplx s_star = prof.segments[prof.arg_segment][prof.arg_cell];
  gS[prof.arg_segment][prof.arg_cell] += dl_dm * s_star / std::abs(s_star);

  for (std::size_t s = 0; s < crystal.n_segments; ++s)
    for (std::size_t n = 0; n < nc; ++n) {
      cplx ga = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) ga += std::conj(basis[n][i]) * gS[s][i];
      out[2 * (s * nc + n)] = ga.real();
      out[2 * (s * nc + n) + 1] = ga.imag();
    }
  for (std::size_t n = 0; n < nc; ++n) {
    const auto d = modes::mode_waist_derivative(crystal.modes[n], crystal.waists[n], grid);
    double gw = 0.0;
    for (std::size_t s = 0; s < crystal.n_segments; ++s) {
      const cplx a = crystal.coeff(s, n);
      if (a == 0.0) continue;
      for (std::size_t i = 0; i < grid.size(); ++i) gw += std::real(std::conj(gS[s][i]) * a * d[i]);
    }
    out[2 * crystal.coeffs.size() + n] = gw * kWaistUnit;
  }
  return out;
}

}  // namespace spdc::structure
