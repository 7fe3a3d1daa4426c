#include "primlib/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "primlib/parallel.hpp"
#include "primlib/random.hpp"
#include "primlib/trajcore.hpp"

namespace primlib {

namespace {

/// Greedy acceptance shared by changepoint detection and keypoint
/// extraction: walk candidates by descending score (ties: lower index),
/// keep one when it stays min_segment away from the bounds and from every
/// already-kept index. Returns the kept indices in ascending order.
std::vector<Eigen::Index> accept_spaced(std::vector<SeriesPeak> candidates,
                                        Eigen::Index t, Eigen::Index min_gap) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SeriesPeak& a, const SeriesPeak& b) {
                     if (a.value != b.value) return a.value > b.value;
                     return a.index < b.index;
                   });
  std::vector<Eigen::Index> kept;
  for (const SeriesPeak& candidate : candidates) {
    const Eigen::Index i = candidate.index;
    if (i < min_gap || i > t - 1 - min_gap) continue;
    const bool clear = std::none_of(kept.begin(), kept.end(), [&](Eigen::Index k) {
      return std::abs(k - i) < min_gap;
    });
    if (clear) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

double gaussian_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

void SegmentationParams::validate() const {
  if (window < 2) throw std::invalid_argument("window must be at least 2");
  if (min_segment < window)
    throw std::invalid_argument("min_segment (" + std::to_string(min_segment) +
                                ") must be at least the window (" +
                                std::to_string(window) + ")");
  if (!(threshold > 0.0))
    throw std::invalid_argument("threshold must be positive");
  if (density_floor < 0.0)
    throw std::invalid_argument("density floor must be non-negative");
  if (sample_count < 1)
    throw std::invalid_argument("sample count must be at least 1");
  if (!(density_quantile >= 0.0 && density_quantile < 1.0))
    throw std::invalid_argument("density quantile must lie in [0, 1)");
}

ChangepointSet detect_changepoints(const Trajectory& stream,
                                   const SegmentationParams& params,
                                   std::string stream_name) {
  params.validate();
  ChangepointSet result;
  result.stream_name = std::move(stream_name);

  const Eigen::Index t = stream.length();
  if (t < 2 * static_cast<Eigen::Index>(params.min_segment)) return result;
  if (t < 5) return result;

  const Eigen::VectorXd jerk = third_derivative_magnitude(stream);
  const Eigen::VectorXd smooth =
      sliding_window_mean(jerk, std::min<int>(params.window, static_cast<int>(t)));

  std::vector<SeriesPeak> candidates = series_peaks(smooth);
  std::erase_if(candidates, [&](const SeriesPeak& peak) {
    return peak.value <= params.threshold;
  });
  result.indices = accept_spaced(std::move(candidates), t, params.min_segment);
  return result;
}

ProbabilisticKeypoints to_probabilistic(const ChangepointSet& changepoints,
                                        const SegmentationParams& params) {
  params.validate();
  ProbabilisticKeypoints result;
  result.stream_name = changepoints.stream_name;
  result.gaussians.reserve(changepoints.indices.size());
  const double sigma = static_cast<double>(params.window) / 2.0;
  for (const Eigen::Index index : changepoints.indices)
    result.gaussians.push_back({static_cast<double>(index), sigma});
  return result;
}

FusedKeypointDensity fuse_keypoints(std::span<const ProbabilisticKeypoints> streams,
                                    Eigen::Index t, const SegmentationParams& params) {
  params.validate();
  if (t < 1) throw std::invalid_argument("fusion needs a positive grid length");
  const double floor =
      params.density_floor > 0.0 ? params.density_floor : 1.0 / static_cast<double>(t);

  Eigen::VectorXd product = Eigen::VectorXd::Ones(t);
  for (const ProbabilisticKeypoints& stream : streams) {
    Eigen::VectorXd density = Eigen::VectorXd::Constant(t, floor);
    for (const GaussianKeypoint& g : stream.gaussians)
      for (Eigen::Index i = 0; i < t; ++i)
        density(i) += gaussian_pdf(static_cast<double>(i), g.mu, g.sigma);
    product.array() *= density.array();
  }
  const double total = product.sum();
  if (!(total > 0.0) || !product.allFinite())
    throw std::invalid_argument("fused density degenerated to zero mass");
  product /= total;
  return {std::move(product)};
}

namespace {

std::vector<std::string> supporting_streams(
    Eigen::Index keypoint, std::span<const ProbabilisticKeypoints> streams) {
  std::vector<std::string> names;
  for (const ProbabilisticKeypoints& stream : streams) {
    const bool supports =
        std::any_of(stream.gaussians.begin(), stream.gaussians.end(),
                    [&](const GaussianKeypoint& g) {
                      return std::abs(g.mu - static_cast<double>(keypoint)) <=
                             2.0 * g.sigma;
                    });
    if (supports) names.push_back(stream.stream_name);
  }
  return names;
}

std::vector<Eigen::Index> extract_deterministic(const Eigen::VectorXd& density,
                                                const SegmentationParams& params) {
  const double level = series_quantile(density, params.density_quantile);
  std::vector<SeriesPeak> candidates = series_peaks(density);
  std::erase_if(candidates,
                [&](const SeriesPeak& peak) { return peak.value <= level; });
  return accept_spaced(std::move(candidates), density.size(), params.min_segment);
}

std::vector<Eigen::Index> extract_sampled(const Eigen::VectorXd& density,
                                          const SegmentationParams& params,
                                          std::uint64_t seed) {
  const Eigen::Index t = density.size();
  Eigen::VectorXd cdf(t);
  double running = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) {
    running += density(i);
    cdf(i) = running;
  }
  cdf(t - 1) = 1.0;  // guard the last bin against round-off

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> draws(static_cast<std::size_t>(params.sample_count));
  for (auto& draw : draws) {
    const double u = uniform_double(rng);
    draw = std::lower_bound(cdf.data(), cdf.data() + t, u) - cdf.data();
  }
  std::sort(draws.begin(), draws.end());

  // Merge draws whose gap is at most window / 2 into clusters.
  const auto merge_gap = static_cast<Eigen::Index>(params.window / 2);
  struct Cluster {
    double mass = 0.0;       // fraction of all draws
    double mean = 0.0;
    Eigen::Index index = 0;  // rounded mean
  };
  std::vector<Cluster> clusters;
  std::size_t begin = 0;
  while (begin < draws.size()) {
    std::size_t end = begin + 1;
    while (end < draws.size() && draws[end] - draws[end - 1] <= merge_gap) ++end;
    double sum = 0.0;
    for (std::size_t k = begin; k < end; ++k)
      sum += static_cast<double>(draws[k]);
    Cluster cluster;
    cluster.mass = static_cast<double>(end - begin) /
                   static_cast<double>(params.sample_count);
    cluster.mean = sum / static_cast<double>(end - begin);
    cluster.index = static_cast<Eigen::Index>(std::llround(cluster.mean));
    clusters.push_back(cluster);
    begin = end;
  }
  std::erase_if(clusters, [](const Cluster& c) { return c.mass < 0.05; });

  std::vector<SeriesPeak> candidates;
  candidates.reserve(clusters.size());
  for (const Cluster& cluster : clusters)
    candidates.push_back({cluster.index, cluster.mass});
  return accept_spaced(std::move(candidates), t, params.min_segment);
}

}  // namespace

KeypointSet extract_keypoints(const FusedKeypointDensity& density,
                              const SegmentationParams& params, std::uint64_t seed,
                              std::span<const ProbabilisticKeypoints> streams) {
  params.validate();
  if (density.values.size() == 0)
    throw std::invalid_argument("empty fused density");

  KeypointSet result;
  result.indices = params.mode == ExtractionMode::deterministic
                       ? extract_deterministic(density.values, params)
                       : extract_sampled(density.values, params, seed);
  result.provenance.reserve(result.indices.size());
  for (const Eigen::Index index : result.indices)
    result.provenance.push_back(supporting_streams(index, streams));
  return result;
}

SegmentationResult segment_demonstration(const Demonstration& demo,
                                         const SegmentationParams& params,
                                         std::uint64_t seed, int threads) {
  params.validate();
  const Eigen::Index t = demo.length();
  if (t < 7)
    throw std::invalid_argument("segmentation needs at least 7 samples, got " +
                                std::to_string(t));

  SegmentationResult result;
  const int stream_count = static_cast<int>(demo.stream_count());
  result.stream_changepoints.resize(stream_count);
  result.stream_jerk.resize(stream_count);
  parallel_for(stream_count, threads, [&](int s) {
    const auto& [name, stream] = demo.streams()[static_cast<std::size_t>(s)];
    result.stream_changepoints[static_cast<std::size_t>(s)] =
        detect_changepoints(stream, params, name);
    if (t >= 5) {
      const Eigen::VectorXd jerk = third_derivative_magnitude(stream);
      result.stream_jerk[static_cast<std::size_t>(s)] = sliding_window_mean(
          jerk, std::min<int>(params.window, static_cast<int>(t)));
    } else {
      result.stream_jerk[static_cast<std::size_t>(s)] = Eigen::VectorXd::Zero(t);
    }
  });

  std::vector<ProbabilisticKeypoints> probabilistic;
  probabilistic.reserve(result.stream_changepoints.size());
  for (const ChangepointSet& changepoints : result.stream_changepoints)
    probabilistic.push_back(to_probabilistic(changepoints, params));

  result.density = fuse_keypoints(probabilistic, t, params);
  result.keypoints = extract_keypoints(result.density, params, seed, probabilistic);

  // Split every stream at the keypoints; a keypoint starts the next segment.
  std::vector<Eigen::Index> cuts;
  cuts.push_back(0);
  for (const Eigen::Index k : result.keypoints.indices) cuts.push_back(k);
  cuts.push_back(t);
  for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
    const Eigen::Index lo = cuts[piece];
    const Eigen::Index hi = cuts[piece + 1];  // exclusive except final piece
    const Eigen::Index count = (piece + 2 == cuts.size() ? hi : hi + 1) - lo;
    std::vector<std::pair<std::string, Trajectory>> streams;
    streams.reserve(demo.stream_count());
    for (const auto& [name, stream] : demo.streams())
      streams.emplace_back(
          name, Trajectory(stream.samples().middleRows(lo, count), stream.dt(),
                           stream.dim_names()));
    result.segments.emplace_back(demo.id() + "/seg" + std::to_string(piece),
                                 std::move(streams));
  }
  return result;
}

}  // namespace primlib
