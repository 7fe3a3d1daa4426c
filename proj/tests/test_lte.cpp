#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <vector>

#include "primlib/errors.hpp"
#include "primlib/lte_editor.hpp"
#include "primlib/trajcore.hpp"
#include "primlib/trajectory.hpp"
#include "test_util.hpp"

using namespace primlib;

namespace {

Trajectory straight_line(int samples) {
  Eigen::MatrixXd points(samples, 2);
  for (int i = 0; i < samples; ++i) points.row(i) << 0.1 * i, 0.05 * i;
  return Trajectory(points, 0.1);
}

Trajectory line_to(Eigen::Vector2d target, int samples = 30) {
  Eigen::MatrixXd points(samples, 2);
  for (int i = 0; i < samples; ++i)
    points.row(i) =
        (target * (static_cast<double>(i) / (samples - 1))).transpose();
  return Trajectory(points, 0.1);
}

EditConstraint pin(long long index, std::initializer_list<double> target,
                   double weight = 1e3) {
  EditConstraint constraint;
  constraint.sample_index = index;
  constraint.target = Eigen::Map<const Eigen::VectorXd>(
      std::data(target), static_cast<Eigen::Index>(target.size()));
  constraint.weight = weight;
  return constraint;
}

}  // namespace

TEST_CASE("re-pinning the current endpoints reproduces the trajectory") {
  std::mt19937_64 rng(5);
  const Trajectory original(testutil::random_walk(rng, 80, 3, 0.1), 0.05);
  const Eigen::VectorXd first = original.samples().row(0).transpose();
  const Eigen::VectorXd last =
      original.samples().row(original.length() - 1).transpose();
  EditConstraint front;
  front.sample_index = 0;
  front.target = first;
  EditConstraint back;
  back.sample_index = -1;
  back.target = last;

  const EditResult result = edit_trajectory(original, {front, back});
  CHECK((result.edited.samples() - original.samples()).cwiseAbs().maxCoeff() <
        1e-8);
  CHECK(result.length_ratio == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(result.constraint_residual < 1e-8);
}

TEST_CASE("doubling the far endpoint of a line doubles the line") {
  const Trajectory original = straight_line(50);
  const Eigen::Vector2d start = original.samples().row(0);
  const Eigen::Vector2d finish = original.samples().row(49);
  const Eigen::Vector2d doubled = start + 2.0 * (finish - start);

  const EditResult result = edit_trajectory(
      original,
      {pin(0, {start.x(), start.y()}), pin(-1, {doubled.x(), doubled.y()})});

  // Laplacian preservation keeps the path straight, so every sample lands
  // on the doubled line.
  Eigen::MatrixXd expected(50, 2);
  for (int i = 0; i < 50; ++i)
    expected.row(i) =
        (start + (doubled - start) * (static_cast<double>(i) / 49.0))
            .transpose();
  CHECK((result.edited.samples() - expected).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(result.length_ratio == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("an interior via point bends the path smoothly") {
  const Trajectory original = straight_line(60);
  const EditResult result = edit_trajectory(
      original, {pin(0, {0.0, 0.0}), pin(30, {1.5, 2.0}), pin(-1, {5.9, 2.95})});
  // Constraints hit their targets.
  CHECK((result.edited.samples().row(30).transpose() -
         Eigen::Vector2d(1.5, 2.0))
            .norm() < 1e-3);
  CHECK(result.constraint_residual < 1e-3);
  // The rest of the path stays smooth: no sample-to-sample jump may exceed
  // a few times the mean step.
  const Eigen::MatrixXd& edited = result.edited.samples();
  double max_step = 0.0;
  for (int i = 1; i < 60; ++i)
    max_step = std::max(max_step, (edited.row(i) - edited.row(i - 1)).norm());
  CHECK(max_step < 5.0 * arc_length(edited) / 59.0);
}

TEST_CASE("the timing grid survives the edit") {
  const Trajectory original = straight_line(40);
  const EditResult result =
      edit_trajectory(original, {pin(-1, {10.0, -3.0})});
  CHECK(result.edited.dt() == original.dt());
  CHECK(result.edited.length() == original.length());
  CHECK(result.edited.dim_names() == original.dim_names());
}

TEST_CASE("negative indices address samples from the end") {
  const Trajectory original = straight_line(25);
  const EditResult by_negative =
      edit_trajectory(original, {pin(-2, {9.9, 1.0})});
  const EditResult by_positive =
      edit_trajectory(original, {pin(23, {9.9, 1.0})});
  CHECK(by_negative.edited.samples() == by_positive.edited.samples());
}

TEST_CASE("conflicting pins on one sample are rejected") {
  const Trajectory original = straight_line(30);
  CHECK_THROWS_AS((void)edit_trajectory(original, {pin(4, {0.0, 0.0}),
                                                   pin(4, {1.0, 0.0})}),
                  constraint_conflict);
  // The same target twice is not a conflict; -1 aliases sample 29.
  CHECK_THROWS_AS((void)edit_trajectory(original, {pin(29, {0.0, 0.0}),
                                                   pin(-1, {1.0, 0.0})}),
                  constraint_conflict);
  CHECK_NOTHROW((void)edit_trajectory(original, {pin(7, {2.0, 2.0}),
                                                 pin(7, {2.0, 2.0})}));
}

TEST_CASE("malformed constraints are rejected up front") {
  const Trajectory original = straight_line(30);
  CHECK_THROWS_AS((void)edit_trajectory(original, {}), std::invalid_argument);
  CHECK_THROWS_AS((void)edit_trajectory(original, {pin(30, {0.0, 0.0})}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)edit_trajectory(original, {pin(-31, {0.0, 0.0})}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)edit_trajectory(original, {pin(0, {0.0})}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)edit_trajectory(original, {pin(0, {0.0, 0.0}, 0.0)}),
                  std::invalid_argument);
  Eigen::MatrixXd two(2, 2);
  two.setZero();
  CHECK_THROWS_AS(
      (void)edit_trajectory(Trajectory(two, 0.1), {pin(0, {0.0, 0.0})}),
      std::invalid_argument);
}

TEST_CASE("stronger constraint weights shrink the residual") {
  // Three displaced pins (both ends plus an off-path via point) cannot be
  // met without bending the path, so the residual stays positive and must
  // fall as the constraint weight grows.
  std::mt19937_64 rng(41);
  for (int instance = 0; instance < 8; ++instance) {
    const Trajectory original(
        testutil::random_walk(rng, 50 + 10 * instance, 2, 0.15), 0.1);
    const Eigen::Index t = original.length();
    const long long indices[3] = {0, t / 2, t - 1};
    std::vector<EditConstraint> constraints;
    for (const long long index : indices) {
      EditConstraint constraint;
      constraint.sample_index = index;
      constraint.target =
          original.samples().row(index).transpose() +
          Eigen::Vector2d(testutil::gaussian(rng), testutil::gaussian(rng));
      constraints.push_back(std::move(constraint));
    }
    double previous = std::numeric_limits<double>::infinity();
    for (const double weight : {1e1, 1e2, 1e3, 1e4}) {
      for (EditConstraint& constraint : constraints)
        constraint.weight = weight;
      const double residual =
          edit_trajectory(original, constraints).constraint_residual;
      CHECK(residual < previous);
      previous = residual;
    }
  }
}

TEST_CASE("ranking prefers the least distorted candidate") {
  // Everyone is pinned to the chord (0,0) -> (2,0). The half-circle
  // already spans it (no distortion), the half-length line must stretch
  // 2x, the overshooting line must shrink to half.
  Eigen::MatrixXd half_circle(30, 2);
  for (int i = 0; i < 30; ++i) {
    const double theta = 3.14159265358979323846 * (1.0 - i / 29.0);
    half_circle.row(i) << 1.0 + std::cos(theta), std::sin(theta);
  }
  const std::vector<std::pair<std::string, Trajectory>> candidates = {
      {"already_there", Trajectory(half_circle, 0.1)},
      {"half", line_to({1.0, 0.0})},
      {"wayover", line_to({4.0, 0.0})},
  };
  const std::vector<EditConstraint> constraints = {pin(0, {0.0, 0.0}),
                                                   pin(-1, {2.0, 0.0})};

  const SelectionReport by_distortion =
      select_candidates(candidates, constraints, 3, RankMode::least_distortion);
  REQUIRE(by_distortion.ranked.size() == 3);
  CHECK(by_distortion.ranked[0].id == "already_there");
  CHECK(by_distortion.ranked[0].result.length_ratio ==
        doctest::Approx(1.0).epsilon(1e-5));
  CHECK(by_distortion.ranked[1].id == "wayover");  // ratio 0.5
  CHECK(by_distortion.ranked[2].id == "half");     // ratio 2

  // Shortest mode: both lines edit onto the length-2 chord; the
  // half-circle keeps its length pi.
  const SelectionReport by_length =
      select_candidates(candidates, constraints, 3, RankMode::shortest);
  REQUIRE(by_length.ranked.size() == 3);
  CHECK(by_length.ranked[2].id == "already_there");
  CHECK(by_length.ranked[0].edited_arc_length ==
        doctest::Approx(2.0).epsilon(1e-5));
  CHECK(by_length.ranked[1].edited_arc_length ==
        doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("a failing candidate is reported, not fatal") {
  Eigen::MatrixXd three_d(20, 3);
  three_d.setZero();
  for (int i = 0; i < 20; ++i) three_d(i, 0) = 0.1 * i;
  const std::vector<std::pair<std::string, Trajectory>> candidates = {
      {"good", straight_line(20)},
      {"wrong_dims", Trajectory(three_d, 0.1)},
  };
  const SelectionReport report = select_candidates(
      candidates, {pin(-1, {1.0, 1.0})}, 5, RankMode::least_distortion);
  REQUIRE(report.ranked.size() == 1);
  CHECK(report.ranked[0].id == "good");
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].first == "wrong_dims");
}

TEST_CASE("top-k truncates after ranking") {
  std::vector<std::pair<std::string, Trajectory>> candidates;
  for (int i = 0; i < 6; ++i)
    candidates.emplace_back("c" + std::to_string(i), straight_line(20 + i));
  const SelectionReport report = select_candidates(
      candidates, {pin(-1, {3.0, 1.5})}, 2, RankMode::least_distortion);
  CHECK(report.ranked.size() == 2);
  CHECK_THROWS_AS((void)select_candidates(candidates, {pin(-1, {3.0, 1.5})}, 0,
                                          RankMode::shortest),
                  std::invalid_argument);
}
