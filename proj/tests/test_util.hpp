#pragma once

// Shared helpers for the test suites: deterministic synthetic data
// generators and a self-cleaning temporary directory.

#include <Eigen/Core>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "primlib/random.hpp"
#include "primlib/trajectory.hpp"

namespace testutil {

/// Deterministic standard normal via Box-Muller on the project's pinned
/// uniform sampler (std::normal_distribution is implementation-defined).
inline double gaussian(std::mt19937_64& rng) {
  double u = primlib::uniform_double(rng);
  while (u == 0.0) u = primlib::uniform_double(rng);
  const double v = primlib::uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u)) *
         std::cos(2.0 * 3.14159265358979323846 * v);
}

/// Temporary directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    const std::filesystem::path base =
        std::filesystem::temp_directory_path() / "primlib_test_XXXXXX";
    std::string name = base.string();
    if (::mkdtemp(name.data()) == nullptr)
      throw std::runtime_error("mkdtemp failed");
    path_ = name;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Piecewise-linear curve through `corners`, corner k hit at sample
/// `knots[k]`; knots.front() == 0, knots.back() == samples-1.
inline Eigen::MatrixXd polyline(const std::vector<Eigen::Vector2d>& corners,
                                const std::vector<int>& knots, int samples) {
  Eigen::MatrixXd out(samples, 2);
  for (int i = 0; i < samples; ++i) {
    std::size_t k = 0;
    while (k + 2 < knots.size() && i > knots[k + 1]) ++k;
    const double a = static_cast<double>(i - knots[k]) /
                     static_cast<double>(knots[k + 1] - knots[k]);
    out.row(i) = ((1.0 - a) * corners[k] + a * corners[k + 1]).transpose();
  }
  return out;
}

/// Random smooth-ish walk: cumulative sum of small normal increments.
inline Eigen::MatrixXd random_walk(std::mt19937_64& rng, int samples,
                                   int dims, double step = 0.05) {
  Eigen::MatrixXd out(samples, dims);
  out.row(0).setZero();
  for (int i = 1; i < samples; ++i)
    for (int d = 0; d < dims; ++d)
      out(i, d) = out(i - 1, d) + step * gaussian(rng);
  return out;
}

/// Gaussian blob features: `counts[k]` points around `centers[k]`.
inline Eigen::MatrixXd blobs(std::mt19937_64& rng,
                             const std::vector<Eigen::Vector2d>& centers,
                             const std::vector<int>& counts, double sigma,
                             std::vector<int>* labels = nullptr) {
  int total = 0;
  for (const int c : counts) total += c;
  Eigen::MatrixXd out(total, 2);
  int row = 0;
  for (std::size_t k = 0; k < centers.size(); ++k)
    for (int j = 0; j < counts[k]; ++j, ++row) {
      out(row, 0) = centers[k].x() + sigma * gaussian(rng);
      out(row, 1) = centers[k].y() + sigma * gaussian(rng);
      if (labels) labels->push_back(static_cast<int>(k));
    }
  return out;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace testutil
