#include "spdc/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spdc/core/errors.hpp"

namespace spdc::cli {

namespace fs = std::filesystem;
using io::json;
using modes::ModeIndex;
using observables::CMat;
using observables::RMat;

namespace {

const json& need(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return obj[key];
}

double number(const json& obj, const std::string& key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::uint64_t count(const json& obj, const std::string& key, const std::string& where, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number_unsigned()) throw ConfigError(where + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool flag(const json& obj, const std::string& key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

int integer(const json& obj, const std::string& key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

fs::path resolve(const json& v, const fs::path& base, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a file path");
  fs::path p(v.get<std::string>());
  if (p.is_relative()) p = base / p;
  if (!fs::is_regular_file(p)) throw ConfigError(where + ": file not found: " + p.string());
  return p;
}

json read_json_file(const fs::path& p, const std::string& where) {
  std::ifstream in(p);
  if (!in) throw ConfigError(where + ": cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(where + ": " + p.string() + ": " + e.what());
  }
}

TransverseGrid parse_grid(const json& j) {
  io::reject_unknown_keys(j, {"nx", "ny", "dx", "dy"}, "grid");
  const auto nx = count(j, "nx", "grid", 0);
  if (nx == 0) throw ConfigError("grid.nx: must be a positive integer");
  const auto ny = count(j, "ny", "grid", nx);
  const double dx = number(j, "dx", "grid", 0.0);
  const double dy = number(j, "dy", "grid", dx);
  if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("grid: dx and dy must be positive (meters)");
  try {
    return make_grid(nx, ny, dx, dy);
  } catch (const Error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

InteractionSpec parse_interaction(const json& j) {
  const std::string w = "interaction";
  io::reject_unknown_keys(j,
                          {"lambda_p", "lambda_s", "lambda_i", "refractive_index", "n_p", "n_s", "n_i", "length",
                           "n_z", "delta_k", "poling_period", "chi2_magnitude", "gain", "n_realizations", "seed",
                           "pump_diffraction"},
                          w);
  InteractionSpec s;
  s.lambda_p = number(j, "lambda_p", w, s.lambda_p);
  s.lambda_s = number(j, "lambda_s", w, 2.0 * s.lambda_p);
  s.lambda_i = number(j, "lambda_i", w, 1.0 / (1.0 / s.lambda_p - 1.0 / s.lambda_s));
  const double n = number(j, "refractive_index", w, 1.0);
  s.n_p = number(j, "n_p", w, n);
  s.n_s = number(j, "n_s", w, n);
  s.n_i = number(j, "n_i", w, n);
  s.length = number(j, "length", w, s.length);
  s.n_z = count(j, "n_z", w, s.n_z);
  if (j.contains("delta_k")) s.delta_k_override = number(j, "delta_k", w, 0.0);
  if (j.contains("poling_period")) s.poling_period = number(j, "poling_period", w, 0.0);
  s.chi2_magnitude = number(j, "chi2_magnitude", w, s.chi2_magnitude);
  s.gain = number(j, "gain", w, s.gain);
  s.n_realizations = count(j, "n_realizations", w, s.n_realizations);
  s.seed = count(j, "seed", w, s.seed);
  s.pump_diffraction = flag(j, "pump_diffraction", w, s.pump_diffraction);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(w + ": " + e.what());
  }
  return s;
}

std::vector<ModeIndex> parse_modes(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty list of modes");
  std::vector<ModeIndex> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(io::mode_from_json(j[k], where + "[" + std::to_string(k) + "]"));
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = a + 1; b < out.size(); ++b)
      if (out[a] == out[b]) throw ConfigError(where + ": duplicate mode " + out[a].label());
  return out;
}

std::vector<ModeIndex> parse_window(const json& j, const std::string& where) {
  const std::string family = j.value("family", "LG");
  if (family == "LG") {
    io::reject_unknown_keys(j, {"family", "l_min", "l_max", "p_min", "p_max"}, where);
    const int l_max = integer(j, "l_max", where, 0);
    const int l_min = integer(j, "l_min", where, -l_max);
    const int p_min = integer(j, "p_min", where, 0);
    const int p_max = integer(j, "p_max", where, 0);
    if (l_min > l_max || p_min > p_max || p_min < 0) throw ConfigError(where + ": empty or invalid window");
    return modes::lg_window(l_min, l_max, p_min, p_max);
  }
  if (family == "HG") {
    io::reject_unknown_keys(j, {"family", "nx_max", "ny_max"}, where);
    const int nx = integer(j, "nx_max", where, 0), ny = integer(j, "ny_max", where, 0);
    if (nx < 0 || ny < 0) throw ConfigError(where + ": window bounds must be >= 0");
    return modes::hg_window(nx, ny);
  }
  throw ConfigError(where + ".family: must be LG or HG");
}

BasisSpec parse_basis(const json& j, const std::string& where) {
  io::reject_unknown_keys(j, {"modes", "window", "waist", "waists"}, where);
  if (j.contains("modes") == j.contains("window")) throw ConfigError(where + ": give exactly one of modes or window");
  BasisSpec b;
  b.modes = j.contains("modes") ? parse_modes(j["modes"], where + ".modes") : parse_window(j["window"], where + ".window");
  if (j.contains("waists")) {
    const auto& ws = j["waists"];
    if (!ws.is_array() || ws.size() != b.modes.size()) throw ConfigError(where + ".waists: need one waist per mode");
    for (const auto& x : ws) {
      if (!x.is_number()) throw ConfigError(where + ".waists: expected numbers");
      b.waists.push_back(x.get<double>());
    }
  } else {
    b.waists.assign(b.modes.size(), number(j, "waist", where, 0.0));
  }
  for (double w : b.waists)
    if (!(w > 0.0)) throw ConfigError(where + ": waists must be positive (meters)");
  // Store in the canonical order the measurement basis uses.
  std::vector<std::size_t> order(b.modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return b.modes[x] < b.modes[y]; });
  BasisSpec sorted;
  for (auto k : order) {
    sorted.modes.push_back(b.modes[k]);
    sorted.waists.push_back(b.waists[k]);
  }
  return sorted;
}

structure::ParamSet parse_parameters(const json& j, const fs::path& base) {
  if (!j.is_object()) throw ConfigError("parameters: expected an object");
  if (!j.contains("file")) return structure::ParamSet::from_json(j);
  io::reject_unknown_keys(j, {"file", "pump", "learn"}, "parameters");
  auto ps = structure::ParamSet::from_json(read_json_file(resolve(j["file"], base, "parameters.file"), "parameters.file"));
  if (j.contains("pump")) ps.pump = structure::ParamSet::from_json(json{{"pump", j["pump"]}}).pump;
  if (j.contains("learn")) {
    const auto& l = j["learn"];
    const std::string w = "parameters.learn";
    io::reject_unknown_keys(l, {"pump_coeffs", "pump_waists", "crystal_coeffs", "crystal_waists"}, w);
    ps.set_learn_pump_coeffs(flag(l, "pump_coeffs", w, false));
    ps.set_learn_pump_waists(flag(l, "pump_waists", w, false));
    ps.set_learn_crystal_coeffs(flag(l, "crystal_coeffs", w, false));
    ps.set_learn_crystal_waists(flag(l, "crystal_waists", w, false));
  }
  ps.validate();
  return ps;
}

std::size_t position(const std::vector<ModeIndex>& list, const ModeIndex& m, const std::string& where) {
  for (std::size_t k = 0; k < list.size(); ++k)
    if (list[k] == m) return k;
  throw ConfigError(where + ": mode " + m.label() + " is not available");
}

struct StateTerm {
  ModeIndex s, i;
  cplx amp;
};

std::vector<StateTerm> parse_state(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty list of terms");
  std::vector<StateTerm> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string w = where + "[" + std::to_string(k) + "]";
    io::reject_unknown_keys(j[k], {"signal", "idler", "amplitude"}, w);
    StateTerm t{io::mode_from_json(need(j[k], "signal", w), w + ".signal"),
                io::mode_from_json(need(j[k], "idler", w), w + ".idler"), 1.0};
    if (j[k].contains("amplitude")) {
      const auto& a = j[k]["amplitude"];
      t.amp = a.is_number() ? cplx(a.get<double>(), 0.0) : io::complex_from_json(a, w + ".amplitude");
    }
    out.push_back(t);
  }
  return out;
}

RMat normalized_target(RMat m, const std::string& where) {
  if (!m.allFinite() || m.minCoeff() < 0.0) throw ConfigError(where + ": entries must be finite and >= 0");
  if (!(m.sum() > 0.0)) throw ConfigError(where + ": all entries are zero");
  return m / m.sum();
}

RMat rmat_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError(where + ": expected a matrix");
  RMat m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != j[0].size()) throw ConfigError(where + ": ragged matrix");
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      if (!j[r][c].is_number()) throw ConfigError(where + ": entries must be numbers");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

CMat cmat_from_json(const json& j, const std::string& where) {
  const auto rows = io::complex_matrix_from_json(j, where);
  if (rows.empty()) throw ConfigError(where + ": empty matrix");
  CMat m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw ConfigError(where + ": ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void parse_targets(const json& j, ExperimentConfig& cfg, const fs::path& base) {
  if (!j.is_object()) throw ConfigError("targets: expected an object of named targets");
  for (const auto& [name, t] : j.items()) {
    const std::string w = "targets." + name;
    io::reject_unknown_keys(t, {"kind", "values", "file", "state"}, w);
    const int sources = int(t.contains("values")) + int(t.contains("file")) + int(t.contains("state"));
    if (sources != 1) throw ConfigError(w + ": give exactly one of values, file or state");
    const std::string kind = t.value("kind", "coincidence");
    if (kind == "coincidence") {
      const auto ns = cfg.signal.modes.size(), ni = cfg.idler.modes.size();
      RMat m;
      if (t.contains("values")) {
        m = rmat_from_json(t["values"], w + ".values");
      } else if (t.contains("file")) {
        m = read_matrix_file(resolve(t["file"], base, w + ".file"));
      } else {
        m = RMat::Zero(ni, ns);
        for (const auto& term : parse_state(t["state"], w + ".state"))
          m(position(cfg.idler.modes, term.i, w + ".state"), position(cfg.signal.modes, term.s, w + ".state")) +=
              std::norm(term.amp);
      }
      if (static_cast<std::size_t>(m.rows()) != ni || static_cast<std::size_t>(m.cols()) != ns)
        throw ConfigError(w + ": expected a " + std::to_string(ni) + " x " + std::to_string(ns) +
                          " matrix (idler rows, signal columns)");
      cfg.targets.coincidence[name] = normalized_target(m, w);
    } else if (kind == "density") {
      if (!cfg.tomography) throw ConfigError(w + ": density targets need measurement.tomography");
      const int d = cfg.tomography->d();
      CMat rho;
      if (t.contains("values")) {
        rho = cmat_from_json(t["values"], w + ".values");
      } else if (t.contains("file")) {
        const auto doc = read_json_file(resolve(t["file"], base, w + ".file"), w + ".file");
        rho = cmat_from_json(doc.contains("rho") ? doc["rho"] : doc, w + ".file");
      } else {
        observables::CVec psi = observables::CVec::Zero(d * d);
        for (const auto& term : parse_state(t["state"], w + ".state"))
          psi(position(cfg.tomography->subspace_s, term.s, w + ".state") * d +
              position(cfg.tomography->subspace_i, term.i, w + ".state")) += term.amp;
        if (!(psi.norm() > 0.0)) throw ConfigError(w + ": state has zero norm");
        psi /= psi.norm();
        rho = psi * psi.adjoint();
      }
      if (rho.rows() != d * d || rho.cols() != d * d)
        throw ConfigError(w + ": expected a " + std::to_string(d * d) + " x " + std::to_string(d * d) + " matrix");
      if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8) throw ConfigError(w + ": matrix is not Hermitian");
      const double tr = rho.trace().real();
      if (!(tr > 0.0)) throw ConfigError(w + ": trace must be positive");
      cfg.targets.density[name] = rho / tr;
    } else {
      throw ConfigError(w + ".kind: must be coincidence or density");
    }
  }
}

RobustnessConfig parse_robustness(const json& j, const fs::path& base, const inverse::OptimizerConfig& fallback) {
  const std::string w = "robustness";
  io::reject_unknown_keys(j, {"baseline", "sigmas", "seed", "optimizer"}, w);
  RobustnessConfig r;
  r.baseline = resolve(need(j, "baseline", w), base, w + ".baseline");
  const auto& sg = need(j, "sigmas", w);
  io::reject_unknown_keys(sg, {"multiplicative", "additive"}, w + ".sigmas");
  for (const auto mode : {inverse::PerturbMode::multiplicative, inverse::PerturbMode::additive}) {
    const auto key = inverse::perturb_mode_name(mode);
    if (!sg.contains(key)) continue;
    std::vector<double> list;
    for (const auto& x : sg[key]) {
      if (!x.is_number() || !(x.get<double>() >= 0.0))
        throw ConfigError(w + ".sigmas." + key + ": entries must be numbers >= 0");
      list.push_back(x.get<double>());
    }
    r.sigmas.emplace_back(mode, std::move(list));
  }
  if (r.sigmas.empty()) throw ConfigError(w + ".sigmas: list sigmas for multiplicative and/or additive");
  r.seed = count(j, "seed", w, r.seed);
  r.recovery = j.contains("optimizer") ? inverse::OptimizerConfig::from_json(j["optimizer"]) : fallback;
  return r;
}

// Line of the key named by a message such as "loss.terms[1]: ...", found by
// walking the key path through the raw text. 0 when it cannot be located.
std::size_t locate(const std::string& text, const std::string& message) {
  const auto colon = message.find(": ");
  if (colon == std::string::npos) return 0;
  std::string path = message.substr(0, colon);
  if (path.find(' ') != std::string::npos) return 0;
  std::size_t pos = 0;
  bool found = false;
  std::stringstream ss(path);
  std::string key;
  while (std::getline(ss, key, '.')) {
    key = key.substr(0, key.find('['));
    if (key.empty()) continue;
    const auto at = text.find("\"" + key + "\"", pos);
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  const auto uk = message.find("unknown key \"");
  if (uk != std::string::npos) {
    const auto start = uk + 12, end = message.find('"', start + 1);
    const auto at = text.find(message.substr(start, end + 1 - start), pos);
    if (at != std::string::npos) {
      pos = at;
      found = true;
    }
  }
  if (!found) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

}  // namespace

RMat read_matrix_file(const fs::path& path) {
  if (path.extension() == ".json") {
    const auto doc = read_json_file(path, path.string());
    return rmat_from_json(doc.contains("values") ? doc["values"] : doc, path.string());
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    std::vector<double> vals;
    bool header = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size() && cells[c].find_first_not_of(" \t\r", used) != std::string::npos)
          throw std::invalid_argument("trailing");
        vals.push_back(v);
      } catch (const std::exception&) {
        if (c == 0) continue;  // row label
        if (first) {
          header = true;
          break;
        }
        throw ConfigError(path.string() + ": non-numeric cell '" + cells[c] + "'");
      }
    }
    first = false;
    if (!header) rows.push_back(vals);
  }
  if (rows.empty()) throw ConfigError(path.string() + ": no numeric rows");
  RMat m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw ConfigError(path.string() + ": ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

ExperimentConfig parse_config(const json& doc, const fs::path& base) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  io::reject_unknown_keys(doc,
                          {"description", "grid", "interaction", "measurement", "parameters", "loss", "targets",
                           "optimizer", "robustness", "output"},
                          "config");
  ExperimentConfig cfg;
  cfg.document = doc;
  try {
    cfg.grid = parse_grid(need(doc, "grid", "config"));
    cfg.interaction = parse_interaction(need(doc, "interaction", "config"));

    const auto& m = need(doc, "measurement", "config");
    io::reject_unknown_keys(m, {"signal", "idler", "tomography"}, "measurement");
    cfg.signal = parse_basis(need(m, "signal", "measurement"), "measurement.signal");
    cfg.idler = m.contains("idler") ? parse_basis(m["idler"], "measurement.idler") : cfg.signal;
    if (m.contains("tomography")) {
      const auto& t = m["tomography"];
      io::reject_unknown_keys(t, {"signal", "idler", "target"}, "measurement.tomography");
      inverse::QstConfig q;
      q.subspace_s = parse_modes(need(t, "signal", "measurement.tomography"), "measurement.tomography.signal");
      q.subspace_i = t.contains("idler") ? parse_modes(t["idler"], "measurement.tomography.idler") : q.subspace_s;
      if (q.subspace_s.size() != q.subspace_i.size())
        throw ConfigError("measurement.tomography: signal and idler subspaces differ in size");
      for (const auto& x : q.subspace_s) position(cfg.signal.modes, x, "measurement.tomography.signal");
      for (const auto& x : q.subspace_i) position(cfg.idler.modes, x, "measurement.tomography.idler");
      cfg.tomography = q;
      if (t.contains("target")) {
        if (!t["target"].is_string()) throw ConfigError("measurement.tomography.target: expected a target name");
        cfg.tomography_target = t["target"].get<std::string>();
      }
    }

    cfg.parameters = parse_parameters(need(doc, "parameters", "config"), base);
    cfg.parameters.validate(cfg.interaction);

    if (doc.contains("targets")) parse_targets(doc["targets"], cfg, base);
    if (doc.contains("loss"))
      cfg.loss = objectives::LossSpec::from_json(doc["loss"]);
    else if (cfg.targets.coincidence.count("coincidence"))
      cfg.loss = objectives::LossSpec::default_composite("coincidence");
    if (cfg.loss) {
      for (const auto& term : cfg.loss->terms) {
        const bool density = term.kind == objectives::Kind::TraceDistance;
        const bool present =
            density ? cfg.targets.density.count(term.target) > 0 : cfg.targets.coincidence.count(term.target) > 0;
        if (!present)
          throw ConfigError("loss.terms: no " + std::string(density ? "density" : "coincidence") + " target named '" +
                            term.target + "'");
        if (density && !cfg.tomography) throw ConfigError("loss.terms: trace distance needs measurement.tomography");
      }
    }
    if (cfg.tomography_target && !cfg.targets.density.count(*cfg.tomography_target))
      throw ConfigError("measurement.tomography.target: no density target named '" + *cfg.tomography_target + "'");

    if (doc.contains("optimizer")) cfg.optimizer = inverse::OptimizerConfig::from_json(doc["optimizer"]);
    if (doc.contains("robustness")) cfg.robustness = parse_robustness(doc["robustness"], base, cfg.optimizer);

    const json out = doc.contains("output") ? doc["output"] : json::object();
    io::reject_unknown_keys(out, {"directory", "csv", "images"}, "output");
    cfg.output.directory = base / fs::path(out.value("directory", std::string("results")));
    cfg.output.csv = flag(out, "csv", "output", true);
    cfg.output.images = flag(out, "images", "output", true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    auto cfg = parse_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
    cfg.source = path;
    return cfg;
  } catch (const ConfigError& e) {
    const auto line = locate(text, e.what());
    throw ConfigError(path.string() + (line ? ":" + std::to_string(line) : std::string()) + ": " + e.what());
  }
}

modes::ModeBasis ExperimentConfig::signal_basis() const { return modes::ModeBasis(signal.modes, signal.waists, grid); }
modes::ModeBasis ExperimentConfig::idler_basis() const { return modes::ModeBasis(idler.modes, idler.waists, grid); }

inverse::Experiment ExperimentConfig::make_experiment() const {
  return inverse::Experiment(grid, interaction, signal_basis(), idler_basis(), tomography);
}

}  // namespace spdc::cli
