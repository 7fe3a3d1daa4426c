#pragma once

#include <Eigen/Core>
#include <vector>

#include "primlib/trajectory.hpp"

namespace primlib {

/// Linear interpolation onto t_new uniformly spaced samples over the same
/// time span. Endpoints are copied exactly; t_new == length() reproduces
/// the input bit-for-bit. Requires t_new >= 2.
Trajectory resample(const Trajectory& trajectory, Eigen::Index t_new);

/// Pointwise magnitude of the third time derivative (jerk of a position
/// signal), estimated per dimension with the second-order central
/// difference
///     (x[i+2] - 2 x[i+1] + 2 x[i-1] - x[i-2]) / (2 dt^3)
/// after min-max normalising each dimension to [0, 1] (constant dimensions
/// stay zero). The two samples at each end copy the nearest interior
/// estimate. Returns one magnitude per sample; requires length >= 5.
Eigen::VectorXd third_derivative_magnitude(const Trajectory& trajectory);

/// Mean over a centred window of w samples, truncated at the series
/// bounds: entry i averages indices [i - (w-1)/2, i + w/2] clipped to
/// [0, T) and divides by the number of samples actually in range.
/// Requires 1 <= w <= series length.
Eigen::VectorXd sliding_window_mean(const Eigen::VectorXd& series, int window);

/// Sum of Euclidean distances between consecutive samples.
double arc_length(const Trajectory& trajectory);
double arc_length(const Eigen::MatrixXd& samples);

/// Dynamic time warping distance with Euclidean local cost, unit steps
/// {(i-1,j), (i,j-1), (i-1,j-1)} and matched endpoints. Dimensions must
/// agree. Symmetric, non-negative, zero for identical trajectories.
double dtw_distance(const Trajectory& a, const Trajectory& b);
double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// A local maximum of a scalar series (plateau-aware).
struct SeriesPeak {
  Eigen::Index index = 0;  ///< centre of the maximal equal-value run
  double value = 0.0;
};

/// Local maxima of a series where a maximal run of equal values counts as
/// one peak at the run's centre (rounded down). A run qualifies when both
/// flanking values are strictly smaller; series boundaries do not qualify
/// as flanks, so monotone ends produce no peak there.
std::vector<SeriesPeak> series_peaks(const Eigen::VectorXd& series);

/// Linear-interpolation quantile of a series (q in [0, 1]).
double series_quantile(const Eigen::VectorXd& series, double q);

}  // namespace primlib
