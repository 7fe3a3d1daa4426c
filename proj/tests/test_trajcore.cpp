#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <random>
#include <vector>

#include "primlib/trajcore.hpp"
#include "primlib/trajectory.hpp"
#include "test_util.hpp"

using namespace primlib;

namespace {

Trajectory column(const std::vector<double>& values, double dt = 1.0) {
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i)
    samples(static_cast<Eigen::Index>(i), 0) = values[i];
  return Trajectory(samples, dt);
}

}  // namespace

TEST_CASE("resample reproduces the input bit-for-bit at equal length") {
  std::mt19937_64 rng(7);
  const Trajectory original(testutil::random_walk(rng, 37, 3), 0.02);
  const Trajectory same = resample(original, 37);
  CHECK(same.samples() == original.samples());
  CHECK(same.dt() == original.dt());
}

TEST_CASE("resample interpolates a linear ramp exactly") {
  // A straight line is reproduced by linear interpolation at any density.
  Eigen::MatrixXd line(10, 2);
  for (int i = 0; i < 10; ++i) line.row(i) << 0.5 * i, 3.0 - 0.25 * i;
  const Trajectory original(line, 0.1);

  for (const Eigen::Index t_new : {2, 7, 19, 64}) {
    const Trajectory result = resample(original, t_new);
    REQUIRE(result.length() == t_new);
    // Same span, uniform spacing.
    CHECK(result.dt() ==
          doctest::Approx(original.duration() / static_cast<double>(t_new - 1))
              .epsilon(1e-15));
    for (Eigen::Index i = 0; i < t_new; ++i) {
      const double position =
          static_cast<double>(i) * 9.0 / static_cast<double>(t_new - 1);
      CHECK(result.samples()(i, 0) == doctest::Approx(0.5 * position).epsilon(1e-13));
      CHECK(result.samples()(i, 1) ==
            doctest::Approx(3.0 - 0.25 * position).epsilon(1e-13));
    }
    // Endpoints are copied, not recomputed.
    CHECK(result.samples().row(0) == line.row(0));
    CHECK(result.samples().row(t_new - 1) == line.row(9));
  }
}

TEST_CASE("resample rejects fewer than two output samples") {
  std::mt19937_64 rng(1);
  const Trajectory original(testutil::random_walk(rng, 10, 1), 0.1);
  CHECK_THROWS_AS((void)resample(original, 1), std::invalid_argument);
}

TEST_CASE("third derivative magnitude matches a hand-worked stencil") {
  // Frozen oracle: x = [0, .1, .8, 1, .7, .2, .05], dt = 0.5, already
  // spanning [0,1] so normalisation is the identity. Interior stencil at
  // i = 2,3,4; both ends copy the nearest interior value.
  const Trajectory trajectory =
      column({0.0, 0.1, 0.8, 1.0, 0.7, 0.2, 0.05}, 0.5);
  const Eigen::VectorXd magnitude = third_derivative_magnitude(trajectory);
  REQUIRE(magnitude.size() == 7);
  const double expected[7] = {4.4000000000000004, 4.4000000000000004,
                              4.4000000000000004, 1.2000000000000006,
                              3.3999999999999995, 3.3999999999999995,
                              3.3999999999999995};
  for (int i = 0; i < 7; ++i)
    CHECK(magnitude[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("third derivative magnitude is scale and offset invariant") {
  // Min-max normalisation makes the statistic invariant to per-dimension
  // affine changes, which is what lets streams in different units vote.
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd base = testutil::random_walk(rng, 50, 2);
  const Trajectory plain(base, 0.1);
  Eigen::MatrixXd scaled = base;
  scaled.col(0) = 250.0 * base.col(0).array() - 40.0;
  scaled.col(1) = 0.001 * base.col(1).array() + 7.0;
  const Trajectory transformed(scaled, 0.1);
  const Eigen::VectorXd a = third_derivative_magnitude(plain);
  const Eigen::VectorXd b = third_derivative_magnitude(transformed);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("third derivative of a constant dimension is zero") {
  Eigen::MatrixXd samples(8, 2);
  for (int i = 0; i < 8; ++i) samples.row(i) << 5.0, 1.0 * i * i * i;
  const Eigen::VectorXd with_constant =
      third_derivative_magnitude(Trajectory(samples, 1.0));
  const Eigen::VectorXd alone =
      third_derivative_magnitude(Trajectory(samples.col(1), 1.0));
  // The flat column contributes nothing to the norm.
  CHECK((with_constant - alone).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("third derivative requires at least five samples") {
  CHECK_THROWS_AS((void)third_derivative_magnitude(column({1, 2, 3, 4})),
                  std::invalid_argument);
  CHECK_NOTHROW((void)third_derivative_magnitude(column({1, 2, 3, 4, 5})));
}

TEST_CASE("sliding window mean truncates at the series bounds") {
  Eigen::VectorXd series(5);
  series << 1, 2, 3, 4, 5;

  const Eigen::VectorXd w3 = sliding_window_mean(series, 3);
  const double expected3[5] = {1.5, 2.0, 3.0, 4.0, 4.5};
  for (int i = 0; i < 5; ++i) CHECK(w3[i] == doctest::Approx(expected3[i]));

  // Even windows look one further ahead than back.
  const Eigen::VectorXd w2 = sliding_window_mean(series, 2);
  const double expected2[5] = {1.5, 2.5, 3.5, 4.5, 5.0};
  for (int i = 0; i < 5; ++i) CHECK(w2[i] == doctest::Approx(expected2[i]));

  // Window covering everything yields the global mean everywhere it fits.
  const Eigen::VectorXd w5 = sliding_window_mean(series, 5);
  CHECK(w5[2] == doctest::Approx(3.0));

  CHECK(sliding_window_mean(series, 1) == series);
  CHECK_THROWS_AS((void)sliding_window_mean(series, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)sliding_window_mean(series, 6), std::invalid_argument);
}

TEST_CASE("arc length of a polyline sums its segment lengths") {
  Eigen::MatrixXd samples(3, 2);
  samples << 0, 0, 3, 4, 3, 10;  // 5 + 6
  CHECK(arc_length(samples) == doctest::Approx(11.0));
  CHECK(arc_length(Trajectory(samples, 1.0)) == doctest::Approx(11.0));
  Eigen::MatrixXd still(4, 3);
  still.setConstant(2.5);
  CHECK(arc_length(still) == 0.0);
}

TEST_CASE("dtw distance matches a hand-filled table") {
  // Frozen oracle: a = [0,1,3] vs b = [0,2,2,3] costs 2 along the path
  // (0,0)(1,1)(1,2)(2,3).
  Eigen::MatrixXd a(3, 1), b(4, 1);
  a << 0, 1, 3;
  b << 0, 2, 2, 3;
  CHECK(dtw_distance(a, b) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(dtw_distance(b, a) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("dtw distance is zero on identical input and tolerant to warps") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd walk = testutil::random_walk(rng, 40, 2);
  CHECK(dtw_distance(walk, walk) == 0.0);

  // Re-timing a curve (sampling the same path non-uniformly) should cost
  // far less than a genuinely different path.
  Eigen::MatrixXd slow(79, 2);
  for (int i = 0; i < 40; ++i) slow.row(2 * i > 78 ? 78 : 2 * i) = walk.row(i);
  for (int i = 1; i < 79; i += 2)
    slow.row(i) = 0.5 * (slow.row(i - 1) + slow.row(i + 1));
  const double warped = dtw_distance(walk, slow);
  const double different =
      dtw_distance(walk, Eigen::MatrixXd(walk.colwise().reverse()));
  CHECK(warped < 0.2 * different);
}

TEST_CASE("dtw distance rejects mismatched dimensions") {
  Eigen::MatrixXd a(3, 1), b(3, 2);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS((void)dtw_distance(a, b), std::invalid_argument);
}

TEST_CASE("series peaks treat equal-value runs as one peak") {
  Eigen::VectorXd series(8);
  series << 0, 1, 1, 0, 2, 5, 2, 0;
  const std::vector<SeriesPeak> peaks = series_peaks(series);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].index == 1);  // centre of the run [1,2] rounds down
  CHECK(peaks[0].value == 1.0);
  CHECK(peaks[1].index == 5);
  CHECK(peaks[1].value == 5.0);
}

TEST_CASE("series peaks ignore monotone boundaries") {
  Eigen::VectorXd rising(5);
  rising << 0, 1, 2, 3, 4;
  CHECK(series_peaks(rising).empty());
  Eigen::VectorXd plateau_end(4);
  plateau_end << 0, 1, 2, 2;
  CHECK(series_peaks(plateau_end).empty());
  Eigen::VectorXd flat(6);
  flat.setConstant(3.0);
  CHECK(series_peaks(flat).empty());
}

TEST_CASE("series quantile interpolates between order statistics") {
  Eigen::VectorXd series(4);
  series << 4, 1, 3, 2;
  CHECK(series_quantile(series, 0.5) == doctest::Approx(2.5));
  CHECK(series_quantile(series, 0.0) == doctest::Approx(1.0));
  CHECK(series_quantile(series, 1.0) == doctest::Approx(4.0));
  CHECK(series_quantile(series, 0.95) ==
        doctest::Approx(3.8499999999999996).epsilon(1e-15));
}
