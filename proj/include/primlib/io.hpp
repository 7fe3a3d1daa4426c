#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "primlib/elastic_cluster.hpp"
#include "primlib/lte_editor.hpp"
#include "primlib/trajectory.hpp"

namespace primlib {

/// Formats a double with 17 significant digits: enough for the exact bit
/// pattern to survive a write/parse round trip.
std::string format_double(double value);

/// Trajectory CSV: header "t,<dim>,..." then one row per sample with the
/// absolute time in the first column. Times must be strictly increasing
/// and uniform to 1e-9 relative tolerance. Throws parse_error on
/// malformed content.
Trajectory read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& trajectory);

/// Demonstration directory: demo.json ({"id", "streams", "samples"}) next
/// to one "<stream>.csv" per stream.
Demonstration read_demonstration_dir(const std::filesystem::path& directory);
void write_demonstration_dir(const std::filesystem::path& directory,
                             const Demonstration& demo);

/// Feature CSV: header "id,f0,f1,..." then one row per item.
FeatureSet read_features_csv(const std::filesystem::path& path);
void write_features_csv(const std::filesystem::path& path,
                        const FeatureSet& features);

/// Constraints JSON: array of {"index": int, "target": [..], "weight": w}
/// ("weight" optional, default 1000). Indices may be negative
/// (end-relative).
std::vector<EditConstraint> read_constraints_json(
    const std::filesystem::path& path);

/// Sparse labels JSON: object {"<primitive id>": "<label>", ...}.
std::map<std::string, std::string> read_labels_json(
    const std::filesystem::path& path);

/// Clustering result file (clusters.json) as produced by the CLI and
/// consumed by library assignment.
struct ClusterFile {
  std::uint64_t seed = 0;
  double lambda = 0.0;
  Eigen::MatrixXd nodes;
  double u_x = 0.0;
  double u_e = 0.0;
  std::vector<std::pair<std::string, int>> assignments;  ///< (id, cluster)
  std::vector<std::pair<int, double>> energy_trace;      ///< (n, best energy)
};

ClusterFile read_cluster_file(const std::filesystem::path& path);
void write_cluster_file(const std::filesystem::path& path, const ClusterFile& file);

/// Atomically replaces `path` with `content` (temp file + rename).
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace primlib
