#include "spdc/io/json_util.hpp"

#include <algorithm>

#include "spdc/core/errors.hpp"

namespace spdc::io {

json to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

std::complex<double> complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + ": expected a number or an [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const modes::ModeIndex& m) {
  if (m.family == modes::Family::LG) return json{{"family", "LG"}, {"l", m.l()}, {"p", m.p()}};
  return json{{"family", "HG"}, {"nx", m.nx()}, {"ny", m.ny()}};
}

modes::ModeIndex mode_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
    throw ConfigError(where + ": mode needs a \"family\" of \"LG\" or \"HG\"");
  const auto fam = j["family"].get<std::string>();
  auto get_int = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
      throw ConfigError(where + ": mode needs integer \"" + key + "\"");
    return j[key].get<int>();
  };
  if (fam == "LG") {
    reject_unknown_keys(j, {"family", "l", "p"}, where);
    return modes::ModeIndex::lg(get_int("l"), get_int("p"));
  }
  if (fam == "HG") {
    reject_unknown_keys(j, {"family", "nx", "ny"}, where);
    return modes::ModeIndex::hg(get_int("nx"), get_int("ny"));
  }
  throw ConfigError(where + ": unknown mode family \"" + fam + "\"");
}

json complex_matrix(const std::vector<std::vector<std::complex<double>>>& m) {
  json rows = json::array();
  for (const auto& r : m) {
    json row = json::array();
    for (auto z : r) row.push_back(to_json(z));
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::vector<std::complex<double>>> complex_matrix_from_json(const json& j,
                                                                         const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a matrix (array of rows)");
  std::vector<std::vector<std::complex<double>>> m;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array()) throw ConfigError(where + ": row " + std::to_string(r) + " is not an array");
    std::vector<std::complex<double>> row;
    for (std::size_t c = 0; c < j[r].size(); ++c)
      row.push_back(complex_from_json(j[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
    if (!m.empty() && row.size() != m.front().size())
      throw ConfigError(where + ": ragged matrix");
    m.push_back(std::move(row));
  }
  return m;
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key \"" + key + "\"");
}

}  // namespace spdc::io
