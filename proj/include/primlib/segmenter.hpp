#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "primlib/trajectory.hpp"

namespace primlib {

/// How keypoints are pulled out of the fused density.
enum class ExtractionMode { deterministic, sampled };

/// Tuning for changepoint detection, fusion, and keypoint extraction.
struct SegmentationParams {
  int window = 16;          ///< sliding-window width for jerk smoothing
  int min_segment = 64;     ///< minimum samples between keypoints / to bounds
  double threshold = 0.16;  ///< windowed-jerk height a changepoint must reach
  /// Additive density floor; 0 means "use 1/T", which makes a stream with no
  /// changepoints exactly neutral in the fusion product.
  double density_floor = 0.0;
  ExtractionMode mode = ExtractionMode::deterministic;
  int sample_count = 2000;         ///< draws in sampled extraction
  double density_quantile = 0.95;  ///< height cutoff in deterministic extraction

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

/// Changepoint sample indices found in one stream.
struct ChangepointSet {
  std::string stream_name;
  std::vector<Eigen::Index> indices;  ///< ascending
};

/// One changepoint softened to a Gaussian over sample indices.
struct GaussianKeypoint {
  double mu = 0.0;
  double sigma = 1.0;
};

/// A stream's changepoints as Gaussian bumps (sigma = window / 2).
struct ProbabilisticKeypoints {
  std::string stream_name;
  std::vector<GaussianKeypoint> gaussians;
};

/// Normalised per-sample keypoint density after multiplying streams.
struct FusedKeypointDensity {
  Eigen::VectorXd values;  ///< length T, strictly positive, sums to 1
};

/// Final keypoints with the streams that support each one.
struct KeypointSet {
  std::vector<Eigen::Index> indices;  ///< ascending sample indices
  /// For each keypoint, names of streams holding a Gaussian whose mean lies
  /// within two sigma of it. Parallel to `indices`.
  std::vector<std::vector<std::string>> provenance;
};

/// Everything produced when segmenting one demonstration.
struct SegmentationResult {
  KeypointSet keypoints;
  std::vector<Demonstration> segments;             ///< ids "<demo>/seg<i>"
  std::vector<ChangepointSet> stream_changepoints; ///< demo stream order
  FusedKeypointDensity density;
  std::vector<Eigen::VectorXd> stream_jerk;        ///< windowed jerk per stream
};

/// Changepoints of a single stream: min-max normalise, take the windowed
/// third-derivative magnitude, then greedily accept local maxima above the
/// threshold in descending height subject to min_segment spacing between
/// picks and to both series ends. Streams shorter than 2 * min_segment
/// yield no changepoints.
ChangepointSet detect_changepoints(const Trajectory& stream,
                                   const SegmentationParams& params,
                                   std::string stream_name = "");

/// Lifts detected changepoints to Gaussians with sigma = window / 2.
ProbabilisticKeypoints to_probabilistic(const ChangepointSet& changepoints,
                                        const SegmentationParams& params);

/// Pointwise product of per-stream densities on the integer grid [0, T):
/// each stream contributes floor + sum of its Gaussian pdfs, and the
/// product is normalised to sum 1. Streams without keypoints only scale
/// the product and drop out after normalisation.
FusedKeypointDensity fuse_keypoints(std::span<const ProbabilisticKeypoints> streams,
                                    Eigen::Index t, const SegmentationParams& params);

/// Keypoints from the fused density. Deterministic mode keeps density
/// peaks above the density_quantile level, greedily in descending height
/// with min_segment spacing (to each other and to the bounds). Sampled
/// mode draws sample_count indices by inverse CDF, merges draws within
/// window/2, keeps clusters holding >= 5% of draws, and greedily accepts
/// cluster means by descending mass under the same spacing rule.
/// `streams` (optional) fills provenance: a stream supports a keypoint
/// when one of its Gaussians has |mu - k| <= 2 sigma.
KeypointSet extract_keypoints(const FusedKeypointDensity& density,
                              const SegmentationParams& params, std::uint64_t seed,
                              std::span<const ProbabilisticKeypoints> streams = {});

/// Full pipeline over all streams of a demonstration, then splitting every
/// stream at the fused keypoints (keypoint sample starts the next
/// segment). K keypoints yield K+1 segments with ids "<demo>/seg<i>".
/// Requires length >= 7 (resampling shorter demos is the caller's call).
SegmentationResult segment_demonstration(const Demonstration& demo,
                                         const SegmentationParams& params,
                                         std::uint64_t seed, int threads = 1);

}  // namespace primlib
