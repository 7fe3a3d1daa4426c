#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "primlib/trajectory.hpp"

namespace primlib {

/// Pins one sample of an edited trajectory to a target position.
struct EditConstraint {
  /// Sample to pin; negative values count from the end (-1 = last sample).
  long long sample_index = 0;
  Eigen::VectorXd target;  ///< must match the trajectory dimension
  double weight = 1e3;     ///< soft-constraint weight (> 0)
};

/// A deformed trajectory plus how faithfully it met the constraints.
struct EditResult {
  Trajectory edited;
  /// Largest Euclidean gap between a constrained sample and its target.
  double constraint_residual = 0.0;
  /// Edited arc length over original arc length; +inf when the original
  /// had zero length and the edit stretched it.
  double length_ratio = 1.0;
};

/// Laplacian trajectory editing: deforms the input so the constrained
/// samples move to their targets while the discrete Laplacian of the path
/// (its local shape) changes as little as possible. Solved per dimension
/// as a weighted least-squares system over the sample positions with
///   - interior second-difference rows (-1/2, 1, -1/2) at weight 1,
///   - first-difference rows at both ends, down-weighted to 1e-4 so they
///     stabilise the system without fighting the constraints,
///   - one row per constraint at its weight.
/// Requires at least 3 samples and at least one constraint; throws
/// constraint_conflict when two constraints pin the same sample to
/// different targets, std::invalid_argument for bad indices, dimensions,
/// or weights.
EditResult edit_trajectory(const Trajectory& trajectory,
                           const std::vector<EditConstraint>& constraints);

/// How retarget candidates are ordered.
enum class RankMode {
  least_distortion,  ///< smallest |length_ratio - 1|, then arc length, then id
  shortest,          ///< smallest edited arc length, then id
};

/// One successfully edited candidate.
struct RankedCandidate {
  std::string id;
  EditResult result;
  double edited_arc_length = 0.0;
};

/// Outcome of editing a pool of primitives against shared constraints.
struct SelectionReport {
  std::vector<RankedCandidate> ranked;  ///< best first, truncated to top_k
  /// Primitives whose edit failed, as (id, reason); never aborts the rest.
  std::vector<std::pair<std::string, std::string>> errors;
};

/// Applies the same constraints to every candidate primitive and ranks
/// the successful edits. Candidates whose edit throws are reported in
/// `errors` and skipped. top_k larger than the pool returns everything.
SelectionReport select_candidates(
    const std::vector<std::pair<std::string, Trajectory>>& candidates,
    const std::vector<EditConstraint>& constraints, int top_k,
    RankMode mode = RankMode::least_distortion, int threads = 1);

}  // namespace primlib
