#include "primlib/featurizer.hpp"

#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "primlib/trajcore.hpp"

namespace primlib {

void RepresentativeSet::validate() const {
  if (representatives.empty())
    throw std::invalid_argument("representative set must be non-empty");
  if (resample_length < 2)
    throw std::invalid_argument("resample length must be at least 2");
  std::unordered_set<std::string> seen;
  const Eigen::Index dim = representatives.front().second.dim();
  for (const auto& [name, trajectory] : representatives) {
    if (name.empty())
      throw std::invalid_argument("representative name must be non-empty");
    if (!seen.insert(name).second)
      throw std::invalid_argument("duplicate representative name: " + name);
    if (trajectory.dim() != dim)
      throw std::invalid_argument(
          "representatives disagree on dimension count: " + name);
  }
}

Trajectory canonicalize(const Trajectory& trajectory, int resample_length) {
  if (resample_length < 2)
    throw std::invalid_argument("resample length must be at least 2");
  const Trajectory uniform = resample(trajectory, resample_length);
  Eigen::MatrixXd samples = uniform.samples();
  const Eigen::RowVectorXd origin = samples.row(0);
  samples.rowwise() -= origin;
  const double length = arc_length(samples);
  if (length > 0.0) samples /= length;
  return Trajectory(std::move(samples), uniform.dt(), uniform.dim_names());
}

FeatureResult featurize(const Trajectory& primitive, const RepresentativeSet& reps) {
  reps.validate();
  if (primitive.dim() != reps.representatives.front().second.dim())
    throw std::invalid_argument(
        "primitive dimension does not match the representatives");

  FeatureResult result;
  result.degenerate_scale = arc_length(primitive) == 0.0;
  const Trajectory canonical = canonicalize(primitive, reps.resample_length);
  result.features.resize(std::ssize(reps.representatives));
  for (Eigen::Index i = 0; i < std::ssize(reps.representatives); ++i) {
    const Trajectory reference = canonicalize(
        reps.representatives[static_cast<std::size_t>(i)].second,
        reps.resample_length);
    result.features(i) = dtw_distance(canonical, reference);
  }
  return result;
}

std::size_t pick_medoid(const std::vector<Trajectory>& group, int resample_length) {
  if (group.empty()) throw std::invalid_argument("medoid of an empty group");
  std::vector<Trajectory> canonical;
  canonical.reserve(group.size());
  for (const Trajectory& trajectory : group) {
    if (trajectory.dim() != group.front().dim())
      throw std::invalid_argument("medoid group disagrees on dimension count");
    canonical.push_back(canonicalize(trajectory, resample_length));
  }

  std::size_t best = 0;
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < canonical.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < canonical.size(); ++j) {
      if (i == j) continue;
      total += dtw_distance(canonical[i], canonical[j]);
    }
    if (total < best_total) {
      best_total = total;
      best = i;
    }
  }
  return best;
}

}  // namespace primlib
