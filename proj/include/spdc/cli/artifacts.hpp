#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdc/io/json_util.hpp"

namespace spdc::cli {

std::string sha256_hex(const std::string& bytes);

// Sequential colormap for non-negative data, scaled to the matrix maximum.
// Each matrix entry becomes a cell x cell block of a binary PPM image.
void write_heatmap(const std::filesystem::path& path, const Eigen::MatrixXd& m, int cell = 24);
// Diverging colormap symmetric about zero (for real/imaginary parts of rho).
void write_signed_heatmap(const std::filesystem::path& path, const Eigen::MatrixXd& m, int cell = 24);

// Collects the files written by one command so the manifest can list them.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name);

  void text(const std::string& name, const std::string& content);
  void json(const std::string& name, const io::json& j);
  void heatmap(const std::string& name, const Eigen::MatrixXd& m);
  void signed_heatmap(const std::string& name, const Eigen::MatrixXd& m);

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

}  // namespace spdc::cli
