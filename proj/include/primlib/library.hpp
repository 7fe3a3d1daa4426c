#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "primlib/io.hpp"
#include "primlib/trajectory.hpp"

namespace primlib {

/// One stored primitive: a slice of a demonstration plus bookkeeping.
struct PrimitiveRecord {
  std::string id;           ///< unique within a library; used as directory path
  std::string source_demo;  ///< id of the demonstration it was cut from
  int segment_index = 0;    ///< position within the source demonstration (>= 0)
  std::optional<Demonstration> streams;  ///< loaded on demand
  std::optional<Eigen::VectorXd> features;
  std::optional<int> cluster_id;
  std::optional<std::string> label;
};

/// Cluster table entry in the manifest.
struct ClusterEntry {
  int cluster_id = 0;
  Eigen::VectorXd node;
  std::vector<std::string> member_ids;  ///< sorted
  std::optional<std::string> majority_label;
};

/// On-disk store of primitives: `manifest.json` plus one directory per
/// primitive under `primitives/`. The manifest is rewritten atomically
/// (temp file + rename) on every mutation, so concurrent readers always
/// see a complete manifest. Mutations take a lock file; a second
/// concurrent writer fails with library_locked.
class PrimitiveLibrary {
 public:
  /// Initialises an empty library at `root` (created if missing). Throws
  /// parse_error when a manifest already exists there.
  static PrimitiveLibrary create(const std::filesystem::path& root);
  /// Opens an existing library. Throws parse_error when absent/corrupt.
  static PrimitiveLibrary open(const std::filesystem::path& root);

  const std::filesystem::path& root() const noexcept { return root_; }
  int version() const noexcept { return version_; }

  /// Persists the records (with streams) and rewrites the manifest. The
  /// whole batch is validated first: any id collision (against the
  /// library or within the batch) rejects the batch unchanged. Records
  /// must carry their streams. An empty batch is a no-op.
  void add_primitives(const std::vector<PrimitiveRecord>& records);

  /// Writes cluster ids onto the referenced primitives and rebuilds the
  /// cluster table (majority label per cluster from sparse labels, ties
  /// resolving to the lexicographically first label). Assignments
  /// referencing unknown ids reject the whole update.
  void assign_clusters(const ClusterFile& model);

  /// Stores features per primitive id; unknown ids reject the update.
  void set_features(const std::vector<std::pair<std::string, Eigen::VectorXd>>&);

  /// Attaches sparse labels by id; unknown ids reject the update.
  void set_labels(const std::map<std::string, std::string>& labels);

  /// Metadata of every primitive, id order; streams not loaded.
  std::vector<PrimitiveRecord> list() const;
  const std::vector<ClusterEntry>& clusters() const noexcept { return clusters_; }

  std::vector<PrimitiveRecord> query_by_label(const std::string& label) const;
  std::vector<PrimitiveRecord> query_by_cluster(int cluster_id) const;
  /// Segments of one demonstration in (segment_index, id) order.
  std::vector<PrimitiveRecord> query_by_source_demo(const std::string& demo) const;

  /// Loads a primitive's streams from disk. Throws parse_error for an
  /// unknown id.
  PrimitiveRecord load(const std::string& id) const;

  /// Records which parameters produced the library contents (free-form
  /// JSON text, merged key-by-key into the manifest's provenance object).
  void merge_params_provenance(const std::string& json_text);

 private:
  explicit PrimitiveLibrary(std::filesystem::path root);
  void read_manifest();
  void write_manifest() const;
  std::filesystem::path primitive_dir(const std::string& id) const;

  std::filesystem::path root_;
  int version_ = 1;
  std::vector<PrimitiveRecord> records_;  ///< metadata only, id order
  std::vector<ClusterEntry> clusters_;
  std::string params_provenance_ = "{}";
};

/// Validates an id for use as a relative directory path (no "..", no
/// absolute paths, a restricted character set). Throws parse_error.
void validate_primitive_id(const std::string& id);

}  // namespace primlib
