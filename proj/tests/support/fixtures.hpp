#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "wfboot/dgp.hpp"

namespace fixtures {

// The three (alpha, d) design cells.
inline wfboot::DgpConfig cell(int which, int T = 100, int N = 100) {
  wfboot::DgpConfig cfg;
  cfg.T = T;
  cfg.N = N;
  switch (which) {
    case 0: cfg.alphas = {1.0, 1.0}; cfg.d = {0.05, 0.2}; break;
    case 1: cfg.alphas = {1.0, 0.8}; cfg.d = {0.2, 0.2}; break;
    default: cfg.alphas = {0.8, 0.6}; cfg.d = {0.2, 0.2}; break;
  }
  return cfg;
}

inline wfboot::DgpConfig noiseless(wfboot::DgpConfig cfg) {
  cfg.error_var_lo = 0.0;
  cfg.error_var_hi = 0.0;
  cfg.sigma_eps2 = 0.0;
  return cfg;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(gen);
  return m;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("wfboot_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
