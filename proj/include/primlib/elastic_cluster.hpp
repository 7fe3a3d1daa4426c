#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace primlib {

/// Feature vectors to cluster: one row per item, one column per feature.
struct FeatureSet {
  Eigen::MatrixXd data;          ///< M x F
  std::vector<std::string> ids;  ///< size M, unique

  Eigen::Index count() const noexcept { return data.rows(); }
  Eigen::Index dim() const noexcept { return data.cols(); }
  /// Throws std::invalid_argument when shapes, finiteness, or id
  /// uniqueness are violated.
  void validate() const;
};

/// A fitted elastic clustering: fully connected node graph with a
/// quadratic stretch penalty between every node pair.
struct ElasticClusterModel {
  Eigen::MatrixXd nodes;        ///< N x F node positions
  std::vector<int> assignment;  ///< size M, values in [0, N)
  double lambda = 0.0;          ///< stretch weight used by the fit
  double u_x = 0.0;             ///< approximation energy (>= 0)
  double u_e = 0.0;             ///< stretch energy (<= 0 for lambda >= 0)
  bool converged = false;
  int iterations = 0;

  int cluster_count() const noexcept { return static_cast<int>(nodes.rows()); }
  double total_energy() const noexcept { return u_x + u_e; }
};

/// Linear system A X = C whose solution is the energy-minimising node
/// layout for a fixed assignment. A is N x N, C is N x F.
struct EnergySystem {
  Eigen::MatrixXd a;
  Eigen::MatrixXd c;
};

/// Sum of squared distances from each datum to its assigned node.
double approximation_energy(const FeatureSet& features,
                            const ElasticClusterModel& model);

/// Negative stretch energy of the fully connected node graph:
/// -lambda * sum over unordered node pairs of squared distance.
double stretching_energy(const ElasticClusterModel& model);

/// Builds the node-update system for a fixed assignment:
/// A = diag(|cluster_i| - (N-1) * lambda) + lambda * (ones - identity),
/// row i of C = sum of data assigned to cluster i.
EnergySystem build_energy_system(const FeatureSet& features,
                                 const std::vector<int>& assignment, int n,
                                 double lambda);

/// Solves the system by Cholesky factorisation. Throws
/// infeasible_stretching when A is not positive definite (lambda too
/// large for the cluster occupancies), carrying an estimate of the
/// smallest eigenvalue.
Eigen::MatrixXd m_step(const EnergySystem& system);

/// Nearest-node assignment; ties resolve to the lowest node index.
std::vector<int> e_step(const FeatureSet& features, const Eigen::MatrixXd& nodes);

/// Default node initialisation: n distinct data rows chosen by seeded
/// shuffle. Throws degenerate_init when fewer than n distinct rows exist.
Eigen::MatrixXd initial_nodes(const FeatureSet& features, int n, std::uint64_t seed);

struct FitOptions {
  int max_iterations = 200;
  /// Convergence when the largest node coordinate change falls below
  /// tolerance * (1 + data scale).
  double tolerance = 1e-9;
  /// Explicit initial nodes (bypasses seeded initialisation).
  std::optional<Eigen::MatrixXd> init;
};

/// Alternating e/m optimisation at fixed cluster count. Deterministic for
/// a given seed. Empty clusters are repaired by relocating the node to the
/// datum farthest from its assigned node. Throws infeasible_stretching or
/// degenerate_init (see above); rejects n < 1 or n > item count.
ElasticClusterModel fit_fixed_n(const FeatureSet& features, int n, double lambda,
                                std::uint64_t seed, const FitOptions& options = {});

/// Why cluster-count discovery stopped growing.
enum class AutoStopReason {
  energy_increase,  ///< next count no longer improved the objective
  reached_data_size,
  next_infeasible,  ///< every restart at the next count failed
};

struct AutoFitResult {
  ElasticClusterModel model;
  struct TraceEntry {
    int n = 0;
    /// Best stretch-penalised objective (u_x - u_e) across restarts.
    double best_energy = 0.0;
  };
  std::vector<TraceEntry> trace;  ///< one entry per cluster count tried
  AutoStopReason stop_reason = AutoStopReason::energy_increase;
  /// Restarts at the count after the accepted one that raised
  /// infeasible_stretching (used for diagnostics when stopping early).
  int infeasible_restarts_at_next = 0;
};

/// Best of `restarts` seeded fits (seeds seed, seed+1, ...) at a fixed
/// count, judged by lowest total energy (ties: earliest restart). Restarts
/// that throw are discarded; when every restart fails the dominant
/// failure is rethrown (stretching infeasibility wins over degenerate
/// initialisation).
ElasticClusterModel fit_best_of(const FeatureSet& features, int n, double lambda,
                                std::uint64_t seed, int restarts = 10,
                                int threads = 1, const FitOptions& options = {});

/// Grows the cluster count from 1, running `restarts` seeded fits per
/// count (seed, seed+1, ... continuing across counts) and keeping each
/// count's best model by lowest total energy (ties: earliest restart).
/// Growth stops when the best stretch-penalised objective u_x - u_e stops
/// decreasing, when the count reaches the item count, or when every
/// restart at the next count fails; the previous count's model is
/// returned. Restarts that throw are discarded (a count with no surviving
/// restart while some threw stretching infeasibility rethrows at count 1).
AutoFitResult fit_auto(const FeatureSet& features, double lambda, std::uint64_t seed,
                       int restarts = 10, int threads = 1,
                       const FitOptions& options = {});

}  // namespace primlib
