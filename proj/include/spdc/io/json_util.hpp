#pragma once

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "spdc/modes/modes.hpp"

namespace spdc::io {

using json = nlohmann::ordered_json;

// Complex numbers travel as [re, im].
json to_json(std::complex<double> z);
std::complex<double> complex_from_json(const json& j, const std::string& where);

json to_json(const modes::ModeIndex& m);
modes::ModeIndex mode_from_json(const json& j, const std::string& where);

json complex_matrix(const std::vector<std::vector<std::complex<double>>>& m);
std::vector<std::vector<std::complex<double>>> complex_matrix_from_json(const json& j,
                                                                         const std::string& where);

// Throws ConfigError naming `where` and the first key not in `allowed`.
void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where);

}  // namespace spdc::io
