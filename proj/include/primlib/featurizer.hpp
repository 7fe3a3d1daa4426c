#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "primlib/trajectory.hpp"

namespace primlib {

/// Reference primitives that define the feature axes.
struct RepresentativeSet {
  /// (name, trajectory) pairs; all trajectories share one dimension count.
  std::vector<std::pair<std::string, Trajectory>> representatives;
  /// Common sample count everything is resampled to before comparing.
  int resample_length = 100;

  /// Throws std::invalid_argument when empty, mismatched, or misnamed.
  void validate() const;
};

/// Feature vector of one primitive: entry i is the warping distance to
/// representative i after canonicalisation.
struct FeatureResult {
  Eigen::VectorXd features;
  /// True when the primitive had zero arc length, so its scale
  /// normalisation was skipped.
  bool degenerate_scale = false;
};

/// Removes nuisance variation before comparison: resample to
/// resample_length, translate so the first sample sits at the origin, and
/// divide by arc length (skipped for zero-length trajectories).
Trajectory canonicalize(const Trajectory& trajectory, int resample_length);

/// Distances from the canonicalised primitive to every canonicalised
/// representative, in representative order.
FeatureResult featurize(const Trajectory& primitive, const RepresentativeSet& reps);

/// Index of the trajectory minimising the summed warping distance to all
/// others (after canonicalisation to resample_length); ties resolve to the
/// lowest index. Requires a non-empty, dimension-consistent group.
std::size_t pick_medoid(const std::vector<Trajectory>& group,
                        int resample_length = 100);

}  // namespace primlib
