#include "primlib/trajcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace primlib {

Trajectory resample(const Trajectory& trajectory, Eigen::Index t_new) {
  if (t_new < 2)
    throw std::invalid_argument("resample target must be at least 2 samples");
  if (t_new == trajectory.length()) return trajectory;
  const Eigen::MatrixXd& in = trajectory.samples();
  const Eigen::Index t_old = in.rows();
  const double span = trajectory.dt() * static_cast<double>(t_old - 1);
  const double dt_new = span / static_cast<double>(t_new - 1);

  Eigen::MatrixXd out(t_new, in.cols());
  out.row(0) = in.row(0);
  out.row(t_new - 1) = in.row(t_old - 1);
  const double scale =
      static_cast<double>(t_old - 1) / static_cast<double>(t_new - 1);
  for (Eigen::Index i = 1; i + 1 < t_new; ++i) {
    const double position = static_cast<double>(i) * scale;
    const auto lower = static_cast<Eigen::Index>(std::floor(position));
    const Eigen::Index upper = std::min(lower + 1, t_old - 1);
    const double frac = position - static_cast<double>(lower);
    out.row(i) = (1.0 - frac) * in.row(lower) + frac * in.row(upper);
  }
  return Trajectory(std::move(out), dt_new, trajectory.dim_names());
}

Eigen::VectorXd third_derivative_magnitude(const Trajectory& trajectory) {
  const Eigen::MatrixXd& raw = trajectory.samples();
  const Eigen::Index t = raw.rows();
  if (t < 5)
    throw std::invalid_argument(
        "third derivative needs at least 5 samples, got " + std::to_string(t));

  // Min-max normalise each dimension so streams with different units
  // contribute comparably; constant dimensions normalise to zero.
  Eigen::MatrixXd data = raw;
  for (Eigen::Index d = 0; d < data.cols(); ++d) {
    const double lo = data.col(d).minCoeff();
    const double hi = data.col(d).maxCoeff();
    if (hi > lo)
      data.col(d) = (data.col(d).array() - lo) / (hi - lo);
    else
      data.col(d).setZero();
  }

  const double dt3 = trajectory.dt() * trajectory.dt() * trajectory.dt();
  Eigen::VectorXd magnitude(t);
  for (Eigen::Index i = 2; i + 2 < t; ++i) {
    const Eigen::RowVectorXd estimate =
        (data.row(i + 2) - 2.0 * data.row(i + 1) + 2.0 * data.row(i - 1) -
         data.row(i - 2)) /
        (2.0 * dt3);
    magnitude(i) = estimate.norm();
  }
  magnitude(0) = magnitude(1) = magnitude(2);
  magnitude(t - 1) = magnitude(t - 2) = magnitude(t - 3);
  return magnitude;
}

Eigen::VectorXd sliding_window_mean(const Eigen::VectorXd& series, int window) {
  const Eigen::Index t = series.size();
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  if (window > t)
    throw std::invalid_argument("window " + std::to_string(window) +
                                " exceeds series length " + std::to_string(t));
  const Eigen::Index back = (window - 1) / 2;   // samples before the centre
  const Eigen::Index ahead = window / 2;        // samples after the centre

  // Prefix sums keep the pass O(T) and the truncated means exact.
  Eigen::VectorXd prefix(t + 1);
  prefix(0) = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) prefix(i + 1) = prefix(i) + series(i);

  Eigen::VectorXd out(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - back);
    const Eigen::Index hi = std::min<Eigen::Index>(t - 1, i + ahead);
    out(i) = (prefix(hi + 1) - prefix(lo)) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double arc_length(const Eigen::MatrixXd& samples) {
  double total = 0.0;
  for (Eigen::Index i = 1; i < samples.rows(); ++i)
    total += (samples.row(i) - samples.row(i - 1)).norm();
  return total;
}

double arc_length(const Trajectory& trajectory) {
  return arc_length(trajectory.samples());
}

double dtw_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("dtw requires matching dimensions, got " +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.cols()));
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Rolling rows of the accumulated-cost table.
  Eigen::VectorXd previous = Eigen::VectorXd::Constant(m + 1, kInf);
  Eigen::VectorXd current(m + 1);
  previous(0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    current(0) = kInf;
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double cost = (a.row(i - 1) - b.row(j - 1)).norm();
      current(j) =
          cost + std::min({previous(j), current(j - 1), previous(j - 1)});
    }
    std::swap(previous, current);
  }
  return previous(m);
}

double dtw_distance(const Trajectory& a, const Trajectory& b) {
  return dtw_distance(a.samples(), b.samples());
}

std::vector<SeriesPeak> series_peaks(const Eigen::VectorXd& series) {
  std::vector<SeriesPeak> peaks;
  const Eigen::Index t = series.size();
  Eigen::Index i = 0;
  while (i < t) {
    Eigen::Index run_end = i;  // inclusive end of the equal-value run
    while (run_end + 1 < t && series(run_end + 1) == series(i)) ++run_end;
    const bool rises_in = i > 0 && series(i - 1) < series(i);
    const bool falls_out = run_end + 1 < t && series(run_end + 1) < series(i);
    if (rises_in && falls_out)
      peaks.push_back({(i + run_end) / 2, series(i)});
    i = run_end + 1;
  }
  return peaks;
}

double series_quantile(const Eigen::VectorXd& series, double q) {
  if (series.size() == 0)
    throw std::invalid_argument("quantile of an empty series");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::vector<double> sorted(series.data(), series.data() + series.size());
  std::sort(sorted.begin(), sorted.end());
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(position);
  if (lower + 1 >= sorted.size()) return sorted.back();
  const double frac = position - static_cast<double>(lower);
  return sorted[lower] + frac * (sorted[lower + 1] - sorted[lower]);
}

}  // namespace primlib
