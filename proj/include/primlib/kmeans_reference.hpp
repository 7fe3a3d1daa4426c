#pragma once

#include <Eigen/Core>
#include <vector>

namespace primlib {

/// Textbook Lloyd's k-means, kept deliberately free of the elastic
/// clustering code so it can serve as an independent cross-check of the
/// lambda = 0 case. Same tie rules as the checked path: nearest centre
/// with ties to the lowest index; an empty cluster's centre relocates to
/// the datum farthest from its own centre (then everything reassigns).
struct LloydResult {
  Eigen::MatrixXd centers;      ///< N x F
  std::vector<int> assignment;  ///< size M
  int iterations = 0;
  bool converged = false;
};

inline LloydResult lloyd_kmeans(const Eigen::MatrixXd& data,
                                Eigen::MatrixXd centers, int max_iterations = 200,
                                double tolerance = 1e-9) {
  const Eigen::Index m = data.rows();
  const Eigen::Index n = centers.rows();
  LloydResult result;
  result.assignment.assign(static_cast<std::size_t>(m), 0);
  const double step_tolerance =
      tolerance * (1.0 + (m > 0 ? data.cwiseAbs().maxCoeff() : 0.0));

  const auto assign_all = [&] {
    for (Eigen::Index j = 0; j < m; ++j) {
      int best = 0;
      double best_distance = (data.row(j) - centers.row(0)).squaredNorm();
      for (Eigen::Index i = 1; i < n; ++i) {
        const double distance = (data.row(j) - centers.row(i)).squaredNorm();
        if (distance < best_distance) {
          best_distance = distance;
          best = static_cast<int>(i);
        }
      }
      result.assignment[static_cast<std::size_t>(j)] = best;
    }
  };

  for (int iteration = 0; iteration < max_iterations; ++iteration) {
    assign_all();
    // Repair empty clusters before averaging.
    for (Eigen::Index pass = 0; pass < n; ++pass) {
      std::vector<Eigen::Index> occupancy(static_cast<std::size_t>(n), 0);
      for (const int node : result.assignment)
        ++occupancy[static_cast<std::size_t>(node)];
      Eigen::Index empty = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (occupancy[static_cast<std::size_t>(i)] == 0) {
          empty = i;
          break;
        }
      if (empty < 0) break;
      Eigen::Index farthest = 0;
      double farthest_distance = -1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const int node = result.assignment[static_cast<std::size_t>(j)];
        const double distance = (data.row(j) - centers.row(node)).squaredNorm();
        if (distance > farthest_distance) {
          farthest_distance = distance;
          farthest = j;
        }
      }
      centers.row(empty) = data.row(farthest);
      assign_all();
    }

    Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(n, data.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < m; ++j) {
      updated.row(result.assignment[static_cast<std::size_t>(j)]) += data.row(j);
      counts(result.assignment[static_cast<std::size_t>(j)]) += 1.0;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      if (counts(i) > 0.0) updated.row(i) /= counts(i);
    const double step = (updated - centers).cwiseAbs().maxCoeff();
    centers = std::move(updated);
    result.iterations = iteration + 1;
    if (step <= step_tolerance) {
      result.converged = true;
      break;
    }
  }
  assign_all();
  result.centers = std::move(centers);
  return result;
}

}  // namespace primlib
