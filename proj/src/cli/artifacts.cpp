#include "spdc/cli/artifacts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <openssl/evp.h>

#include "spdc/core/errors.hpp"

namespace spdc::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

namespace {

using Rgb = std::array<double, 3>;

Rgb lerp(const std::vector<Rgb>& stops, double t) {
  t = std::clamp(t, 0.0, 1.0) * static_cast<double>(stops.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(k);
  Rgb c;
  for (int i = 0; i < 3; ++i) c[i] = stops[k][i] + f * (stops[k + 1][i] - stops[k][i]);
  return c;
}

void write_ppm(const fs::path& path, const Eigen::MatrixXd& m, int cell, const std::vector<Rgb>& stops, double lo,
               double hi) {
  const int w = static_cast<int>(m.cols()) * cell, h = static_cast<int>(m.rows()) * cell;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << w << ' ' << h << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = m(y / cell, x / cell);
      const Rgb c = lerp(stops, std::isfinite(v) ? (v - lo) / span : 0.0);
      for (double ch : c) out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * ch))));
    }
}

}  // namespace

void write_heatmap(const fs::path& path, const Eigen::MatrixXd& m, int cell) {
  static const std::vector<Rgb> stops{{0.267, 0.005, 0.329}, {0.229, 0.322, 0.546}, {0.128, 0.567, 0.551},
                                      {0.369, 0.789, 0.383}, {0.993, 0.906, 0.144}};
  write_ppm(path, m, cell, stops, 0.0, m.size() ? std::max(m.maxCoeff(), 0.0) : 1.0);
}

void write_signed_heatmap(const fs::path& path, const Eigen::MatrixXd& m, int cell) {
  static const std::vector<Rgb> stops{{0.230, 0.299, 0.754}, {0.865, 0.865, 0.865}, {0.706, 0.016, 0.150}};
  const double a = m.size() ? std::max(m.cwiseAbs().maxCoeff(), 1e-300) : 1.0;
  write_ppm(path, m, cell, stops, -a, a);
}

ArtifactWriter::ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

fs::path ArtifactWriter::path(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  return dir_ / name;
}

void ArtifactWriter::text(const std::string& name, const std::string& content) {
  std::ofstream out(path(name), std::ios::binary);
  if (!out) throw Error("cannot write " + (dir_ / name).string());
  out << content;
}

void ArtifactWriter::json(const std::string& name, const io::json& j) { text(name, j.dump(2) + "\n"); }

void ArtifactWriter::heatmap(const std::string& name, const Eigen::MatrixXd& m) { write_heatmap(path(name), m); }

void ArtifactWriter::signed_heatmap(const std::string& name, const Eigen::MatrixXd& m) {
  write_signed_heatmap(path(name), m);
}

}  // namespace spdc::cli
