#include "primlib/lte_editor.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

#include "primlib/errors.hpp"
#include "primlib/parallel.hpp"
#include "primlib/trajcore.hpp"

namespace primlib {

namespace {

constexpr double kBoundaryWeight = 1e-4;

/// Resolves (possibly end-relative) constraint indices and checks for
/// conflicts. Returns resolved (index -> rows) with validated targets.
std::map<Eigen::Index, std::vector<const EditConstraint*>> resolve_constraints(
    const Trajectory& trajectory, const std::vector<EditConstraint>& constraints) {
  const auto t = static_cast<long long>(trajectory.length());
  std::map<Eigen::Index, std::vector<const EditConstraint*>> resolved;
  for (const EditConstraint& constraint : constraints) {
    if (constraint.target.size() != trajectory.dim())
      throw std::invalid_argument(
          "constraint target dimension does not match the trajectory");
    if (!constraint.target.allFinite())
      throw std::invalid_argument("constraint target must be finite");
    if (!(constraint.weight > 0.0) || !std::isfinite(constraint.weight))
      throw std::invalid_argument("constraint weight must be positive");
    long long index = constraint.sample_index;
    if (index < 0) index += t;
    if (index < 0 || index >= t)
      throw std::invalid_argument(
          "constraint index " + std::to_string(constraint.sample_index) +
          " is outside a trajectory of " + std::to_string(t) + " samples");
    resolved[static_cast<Eigen::Index>(index)].push_back(&constraint);
  }
  for (const auto& [index, entries] : resolved)
    for (std::size_t k = 1; k < entries.size(); ++k)
      if (!(entries[k]->target.array() == entries.front()->target.array()).all())
        throw constraint_conflict("sample " + std::to_string(index) +
                                  " is pinned to two different targets");
  return resolved;
}

}  // namespace

EditResult edit_trajectory(const Trajectory& trajectory,
                           const std::vector<EditConstraint>& constraints) {
  const Eigen::Index t = trajectory.length();
  if (t < 3)
    throw std::invalid_argument("editing needs at least 3 samples, got " +
                                std::to_string(t));
  if (constraints.empty())
    throw std::invalid_argument("editing needs at least one constraint");
  const auto resolved = resolve_constraints(trajectory, constraints);

  // Normal equations of the stacked weighted least-squares system. The
  // shape rows (Laplacian L with first-difference boundary rows) share one
  // Gram matrix K = L' W^2 L across dimensions; constraints add w^2 on the
  // diagonal. The right-hand side K * P keeps the original shape targets.
  std::vector<Eigen::Triplet<double>> shape_rows;
  shape_rows.reserve(static_cast<std::size_t>(3 * t));
  const double b = kBoundaryWeight;
  shape_rows.emplace_back(0, 0, 0.5 * b);
  shape_rows.emplace_back(0, 1, -0.5 * b);
  for (Eigen::Index i = 1; i + 1 < t; ++i) {
    shape_rows.emplace_back(i, i - 1, -0.5);
    shape_rows.emplace_back(i, i, 1.0);
    shape_rows.emplace_back(i, i + 1, -0.5);
  }
  shape_rows.emplace_back(t - 1, t - 2, 0.5 * b);
  shape_rows.emplace_back(t - 1, t - 1, -0.5 * b);

  Eigen::SparseMatrix<double> weighted_shape(t, t);
  weighted_shape.setFromTriplets(shape_rows.begin(), shape_rows.end());
  Eigen::SparseMatrix<double> gram =
      Eigen::SparseMatrix<double>(weighted_shape.transpose()) * weighted_shape;

  const Eigen::MatrixXd& original = trajectory.samples();
  Eigen::MatrixXd rhs = gram * original;
  for (const auto& [index, entries] : resolved) {
    double weight_sq = 0.0;
    for (const EditConstraint* constraint : entries)
      weight_sq += constraint->weight * constraint->weight;
    gram.coeffRef(index, index) += weight_sq;
    rhs.row(index) +=
        weight_sq * entries.front()->target.transpose();
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(gram);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("edit system factorisation failed");
  Eigen::MatrixXd edited = solver.solve(rhs);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("edit system solve failed");

  EditResult result{Trajectory(edited, trajectory.dt(), trajectory.dim_names()),
                    0.0, 1.0};
  for (const auto& [index, entries] : resolved)
    result.constraint_residual = std::max(
        result.constraint_residual,
        (edited.row(index).transpose() - entries.front()->target).norm());

  const double original_length = arc_length(original);
  const double edited_length = arc_length(edited);
  if (original_length > 0.0)
    result.length_ratio = edited_length / original_length;
  else
    result.length_ratio =
        edited_length > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return result;
}

SelectionReport select_candidates(
    const std::vector<std::pair<std::string, Trajectory>>& candidates,
    const std::vector<EditConstraint>& constraints, int top_k, RankMode mode,
    int threads) {
  if (top_k < 1) throw std::invalid_argument("top_k must be at least 1");

  struct Slot {
    std::optional<RankedCandidate> ok;
    std::string error;
  };
  std::vector<Slot> slots(candidates.size());
  parallel_for(static_cast<int>(candidates.size()), threads, [&](int i) {
    const auto& [id, trajectory] = candidates[static_cast<std::size_t>(i)];
    try {
      EditResult result = edit_trajectory(trajectory, constraints);
      const double edited_length = arc_length(result.edited);
      slots[static_cast<std::size_t>(i)].ok =
          RankedCandidate{id, std::move(result), edited_length};
    } catch (const std::exception& failure) {
      slots[static_cast<std::size_t>(i)].error = failure.what();
    }
  });

  SelectionReport report;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok.has_value())
      report.ranked.push_back(std::move(*slots[i].ok));
    else
      report.errors.emplace_back(candidates[i].first, slots[i].error);
  }

  const auto distortion = [](const RankedCandidate& candidate) {
    return std::abs(candidate.result.length_ratio - 1.0);
  };
  std::sort(report.ranked.begin(), report.ranked.end(),
            [&](const RankedCandidate& a, const RankedCandidate& b) {
              if (mode == RankMode::least_distortion) {
                if (distortion(a) != distortion(b))
                  return distortion(a) < distortion(b);
              }
              if (a.edited_arc_length != b.edited_arc_length)
                return a.edited_arc_length < b.edited_arc_length;
              return a.id < b.id;
            });
  if (std::ssize(report.ranked) > top_k)
    report.ranked.erase(report.ranked.begin() + top_k, report.ranked.end());
  return report;
}

}  // namespace primlib
