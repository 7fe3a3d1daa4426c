#include "primlib/elastic_cluster.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "primlib/errors.hpp"
#include "primlib/parallel.hpp"
#include "primlib/random.hpp"

namespace primlib {

void FeatureSet::validate() const {
  if (data.rows() < 1) throw std::invalid_argument("feature set must be non-empty");
  if (data.cols() < 1)
    throw std::invalid_argument("feature vectors need at least one dimension");
  if (!data.allFinite())
    throw std::invalid_argument("feature values must all be finite");
  if (!ids.empty()) {
    if (std::ssize(ids) != data.rows())
      throw std::invalid_argument("feature id count does not match row count");
    std::unordered_set<std::string> seen;
    for (const std::string& id : ids)
      if (!seen.insert(id).second)
        throw std::invalid_argument("duplicate feature id: " + id);
  }
}

double approximation_energy(const FeatureSet& features,
                            const ElasticClusterModel& model) {
  features.validate();
  if (std::ssize(model.assignment) != features.count())
    throw std::invalid_argument("assignment size does not match feature count");
  if (model.nodes.cols() != features.dim())
    throw std::invalid_argument("node dimension does not match feature dimension");
  double energy = 0.0;
  for (Eigen::Index j = 0; j < features.count(); ++j) {
    const int node = model.assignment[static_cast<std::size_t>(j)];
    if (node < 0 || node >= model.cluster_count())
      throw std::invalid_argument("assignment refers to a missing node");
    energy += (features.data.row(j) - model.nodes.row(node)).squaredNorm();
  }
  return energy;
}

double stretching_energy(const ElasticClusterModel& model) {
  double pair_sum = 0.0;
  for (Eigen::Index i = 0; i < model.nodes.rows(); ++i)
    for (Eigen::Index j = i + 1; j < model.nodes.rows(); ++j)
      pair_sum += (model.nodes.row(i) - model.nodes.row(j)).squaredNorm();
  const double energy = -model.lambda * pair_sum;
  return energy == 0.0 ? 0.0 : energy;  // avoid -0.0 when lambda == 0
}

EnergySystem build_energy_system(const FeatureSet& features,
                                 const std::vector<int>& assignment, int n,
                                 double lambda) {
  features.validate();
  if (n < 1) throw std::invalid_argument("cluster count must be at least 1");
  if (lambda < 0.0)
    throw std::invalid_argument("stretch weight must be non-negative");
  if (std::ssize(assignment) != features.count())
    throw std::invalid_argument("assignment size does not match feature count");

  Eigen::VectorXd occupancy = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, features.dim());
  for (Eigen::Index j = 0; j < features.count(); ++j) {
    const int node = assignment[static_cast<std::size_t>(j)];
    if (node < 0 || node >= n)
      throw std::invalid_argument("assignment value out of range");
    occupancy(node) += 1.0;
    c.row(node) += features.data.row(j);
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, lambda);
  for (int i = 0; i < n; ++i)
    a(i, i) = occupancy(i) - static_cast<double>(n - 1) * lambda;
  return {std::move(a), std::move(c)};
}

Eigen::MatrixXd m_step(const EnergySystem& system) {
  if (system.a.rows() != system.a.cols() || system.a.rows() != system.c.rows())
    throw std::invalid_argument("inconsistent energy system shapes");
  const Eigen::LLT<Eigen::MatrixXd> llt(system.a);
  if (llt.info() != Eigen::Success) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(
        system.a, Eigen::EigenvaluesOnly);
    const double min_eigenvalue =
        eigen.info() == Eigen::Success ? eigen.eigenvalues().minCoeff() : 0.0;
    throw infeasible_stretching(
        "node-update system is not positive definite (smallest eigenvalue " +
            std::to_string(min_eigenvalue) +
            "); lower the stretch weight or the cluster count",
        min_eigenvalue);
  }
  return llt.solve(system.c);
}

std::vector<int> e_step(const FeatureSet& features, const Eigen::MatrixXd& nodes) {
  features.validate();
  if (nodes.rows() < 1) throw std::invalid_argument("no nodes to assign to");
  if (nodes.cols() != features.dim())
    throw std::invalid_argument("node dimension does not match feature dimension");
  std::vector<int> assignment(static_cast<std::size_t>(features.count()));
  for (Eigen::Index j = 0; j < features.count(); ++j) {
    int best = 0;
    double best_distance = (features.data.row(j) - nodes.row(0)).squaredNorm();
    for (Eigen::Index i = 1; i < nodes.rows(); ++i) {
      const double distance = (features.data.row(j) - nodes.row(i)).squaredNorm();
      if (distance < best_distance) {
        best_distance = distance;
        best = static_cast<int>(i);
      }
    }
    assignment[static_cast<std::size_t>(j)] = best;
  }
  return assignment;
}

Eigen::MatrixXd initial_nodes(const FeatureSet& features, int n, std::uint64_t seed) {
  features.validate();
  if (n < 1) throw std::invalid_argument("cluster count must be at least 1");
  if (n > features.count())
    throw std::invalid_argument("cluster count exceeds item count");

  std::mt19937_64 rng(seed);
  const std::vector<std::size_t> order = sample_indices(
      rng, static_cast<std::size_t>(features.count()),
      static_cast<std::size_t>(features.count()));

  Eigen::MatrixXd nodes(n, features.dim());
  Eigen::Index taken = 0;
  for (const std::size_t row : order) {
    const auto candidate = features.data.row(static_cast<Eigen::Index>(row));
    bool duplicate = false;
    for (Eigen::Index k = 0; k < taken && !duplicate; ++k)
      duplicate = (nodes.row(k).array() == candidate.array()).all();
    if (duplicate) continue;
    nodes.row(taken++) = candidate;
    if (taken == n) break;
  }
  if (taken < n)
    throw degenerate_init("only " + std::to_string(taken) +
                          " distinct feature rows for " + std::to_string(n) +
                          " nodes");
  return nodes;
}

namespace {

/// Relocates nodes of empty clusters to the datum farthest from its
/// assigned node, re-assigning after each relocation. Returns the repaired
/// assignment; `repaired` reports whether anything moved.
std::vector<int> repair_empty_clusters(const FeatureSet& features,
                                       Eigen::MatrixXd& nodes,
                                       std::vector<int> assignment, bool& repaired) {
  const int n = static_cast<int>(nodes.rows());
  for (int pass = 0; pass < n; ++pass) {
    std::vector<Eigen::Index> occupancy(static_cast<std::size_t>(n), 0);
    for (const int node : assignment) ++occupancy[static_cast<std::size_t>(node)];
    const auto empty = std::find(occupancy.begin(), occupancy.end(), 0);
    if (empty == occupancy.end()) return assignment;

    const int empty_node = static_cast<int>(empty - occupancy.begin());
    Eigen::Index farthest = 0;
    double farthest_distance = -1.0;
    for (Eigen::Index j = 0; j < features.count(); ++j) {
      const int node = assignment[static_cast<std::size_t>(j)];
      const double distance =
          (features.data.row(j) - nodes.row(node)).squaredNorm();
      if (distance > farthest_distance) {
        farthest_distance = distance;
        farthest = j;
      }
    }
    nodes.row(empty_node) = features.data.row(farthest);
    assignment = e_step(features, nodes);
    repaired = true;
  }
  return assignment;
}

ElasticClusterModel finish_model(const FeatureSet& features, Eigen::MatrixXd nodes,
                                 double lambda, bool converged, int iterations) {
  ElasticClusterModel model;
  model.nodes = std::move(nodes);
  model.assignment = e_step(features, model.nodes);
  model.lambda = lambda;
  model.converged = converged;
  model.iterations = iterations;
  model.u_x = approximation_energy(features, model);
  model.u_e = stretching_energy(model);
  return model;
}

}  // namespace

ElasticClusterModel fit_fixed_n(const FeatureSet& features, int n, double lambda,
                                std::uint64_t seed, const FitOptions& options) {
  features.validate();
  if (n < 1) throw std::invalid_argument("cluster count must be at least 1");
  if (n > features.count())
    throw std::invalid_argument("cluster count " + std::to_string(n) +
                                " exceeds item count " +
                                std::to_string(features.count()));
  if (lambda < 0.0)
    throw std::invalid_argument("stretch weight must be non-negative");
  if (options.max_iterations < 1)
    throw std::invalid_argument("max iterations must be at least 1");

  Eigen::MatrixXd nodes;
  if (options.init.has_value()) {
    nodes = *options.init;
    if (nodes.rows() != n || nodes.cols() != features.dim())
      throw std::invalid_argument("explicit initial nodes have the wrong shape");
    if (!nodes.allFinite())
      throw std::invalid_argument("explicit initial nodes must be finite");
  } else {
    nodes = initial_nodes(features, n, seed);
  }

  const double scale = features.data.cwiseAbs().maxCoeff();
  const double step_tolerance = options.tolerance * (1.0 + scale);

  bool converged = false;
  int iterations = 0;
  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    std::vector<int> assignment = e_step(features, nodes);
    bool repaired = false;
    assignment = repair_empty_clusters(features, nodes, std::move(assignment),
                                       repaired);
    const EnergySystem system =
        build_energy_system(features, assignment, n, lambda);
    Eigen::MatrixXd updated = m_step(system);
    const double step = (updated - nodes).cwiseAbs().maxCoeff();
    nodes = std::move(updated);
    iterations = iteration + 1;
    if (step <= step_tolerance) {
      converged = true;
      break;
    }
  }
  return finish_model(features, std::move(nodes), lambda, converged, iterations);
}

namespace {

struct RestartOutcome {
  std::optional<ElasticClusterModel> best;  // lowest total energy
  int infeasible = 0;                       // stretching failures
  double worst_min_eigenvalue = 0.0;
  int degenerate = 0;  // too few distinct rows
};

/// Runs `restarts` fits with consecutive seeds and keeps the best by total
/// energy; failed restarts are tallied instead of propagated.
RestartOutcome run_restarts(const FeatureSet& features, int n, double lambda,
                            std::uint64_t first_seed, int restarts, int threads,
                            const FitOptions& options) {
  std::vector<std::optional<ElasticClusterModel>> slots(
      static_cast<std::size_t>(restarts));
  std::vector<int> failure(static_cast<std::size_t>(restarts), 0);
  std::vector<double> eigenvalue(static_cast<std::size_t>(restarts), 0.0);
  parallel_for(restarts, threads, [&](int r) {
    try {
      slots[static_cast<std::size_t>(r)] =
          fit_fixed_n(features, n, lambda,
                      first_seed + static_cast<std::uint64_t>(r), options);
    } catch (const infeasible_stretching& failure_info) {
      failure[static_cast<std::size_t>(r)] = 1;
      eigenvalue[static_cast<std::size_t>(r)] = failure_info.min_eigenvalue();
    } catch (const degenerate_init&) {
      failure[static_cast<std::size_t>(r)] = 2;
    }
  });
  RestartOutcome outcome;
  for (int r = 0; r < restarts; ++r) {
    const auto& slot = slots[static_cast<std::size_t>(r)];
    if (!slot.has_value()) {
      if (failure[static_cast<std::size_t>(r)] == 1) {
        ++outcome.infeasible;
        outcome.worst_min_eigenvalue =
            std::min(outcome.worst_min_eigenvalue,
                     eigenvalue[static_cast<std::size_t>(r)]);
      } else {
        ++outcome.degenerate;
      }
      continue;
    }
    if (!outcome.best.has_value() ||
        slot->total_energy() < outcome.best->total_energy())
      outcome.best = *slot;
  }
  return outcome;
}

}  // namespace

ElasticClusterModel fit_best_of(const FeatureSet& features, int n, double lambda,
                                std::uint64_t seed, int restarts, int threads,
                                const FitOptions& options) {
  features.validate();
  if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  const RestartOutcome outcome =
      run_restarts(features, n, lambda, seed, restarts, threads, options);
  if (outcome.best.has_value()) return *outcome.best;
  if (outcome.infeasible > 0)
    throw infeasible_stretching(
        "all " + std::to_string(restarts) + " restarts at " + std::to_string(n) +
            " nodes hit a non-positive-definite system; lower the stretch "
            "weight below (smallest cluster size) / (node count)",
        outcome.worst_min_eigenvalue);
  throw degenerate_init("no restart found " + std::to_string(n) +
                        " distinct feature rows to initialise from");
}

AutoFitResult fit_auto(const FeatureSet& features, double lambda, std::uint64_t seed,
                       int restarts, int threads, const FitOptions& options) {
  features.validate();
  if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  if (lambda < 0.0)
    throw std::invalid_argument("stretch weight must be non-negative");

  // Seeded fits use consecutive seeds, counted across cluster counts, so a
  // run is reproducible from the master seed alone.
  FitOptions fit_options = options;
  fit_options.init.reset();

  const auto run_count = [&](int n, std::uint64_t first_seed) {
    return run_restarts(features, n, lambda, first_seed, restarts, threads,
                        fit_options);
  };
  // The across-count objective: approximation plus the (positive) stretch
  // penalty. Unlike u_x + u_e it does not reward spreading nodes, so it
  // levels off once real structure is exhausted.
  const auto objective = [](const ElasticClusterModel& model) {
    return model.u_x - model.u_e;
  };

  AutoFitResult result;
  std::uint64_t next_seed = seed;
  std::optional<ElasticClusterModel> accepted;
  double accepted_objective = 0.0;

  const int max_count = static_cast<int>(features.count());
  for (int n = 1; n <= max_count; ++n) {
    const RestartOutcome outcome = run_count(n, next_seed);
    next_seed += static_cast<std::uint64_t>(restarts);

    if (!outcome.best.has_value()) {
      if (!accepted.has_value())
        throw infeasible_stretching(
            "every restart failed at a single node; the data admits no fit",
            0.0);
      result.stop_reason = AutoStopReason::next_infeasible;
      result.infeasible_restarts_at_next = outcome.infeasible;
      break;
    }

    const double candidate_objective = objective(*outcome.best);
    if (accepted.has_value() && candidate_objective >= accepted_objective) {
      result.stop_reason = AutoStopReason::energy_increase;
      result.trace.push_back({n, candidate_objective});
      break;
    }

    accepted = *outcome.best;
    accepted_objective = candidate_objective;
    result.trace.push_back({n, candidate_objective});
    if (n == max_count) {
      result.stop_reason = AutoStopReason::reached_data_size;
      break;
    }
  }

  result.model = std::move(*accepted);
  return result;
}

}  // namespace primlib
