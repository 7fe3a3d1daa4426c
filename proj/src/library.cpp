#include "primlib/library.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "primlib/errors.hpp"

namespace primlib {

namespace {

using nlohmann::json;

/// Holds the single-writer lock file for the duration of a mutation.
/// O_CREAT|O_EXCL makes acquisition atomic on POSIX filesystems.
class WriterLock {
 public:
  explicit WriterLock(const std::filesystem::path& root)
      : path_(root / "manifest.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST)
        throw library_locked("library at " + root.string() +
                             " is locked by another writer (" + path_.string() +
                             " exists)");
      throw std::runtime_error("cannot create lock file " + path_.string() +
                               ": " + std::strerror(errno));
    }
  }
  ~WriterLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ignored;
      std::filesystem::remove(path_, ignored);
    }
  }
  WriterLock(const WriterLock&) = delete;
  WriterLock& operator=(const WriterLock&) = delete;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

json record_to_json(const PrimitiveRecord& record) {
  json entry;
  entry["id"] = record.id;
  entry["source_demo"] = record.source_demo;
  entry["segment_index"] = record.segment_index;
  if (record.features.has_value()) {
    json features = json::array();
    for (Eigen::Index d = 0; d < record.features->size(); ++d)
      features.push_back((*record.features)(d));
    entry["features"] = std::move(features);
  } else {
    entry["features"] = nullptr;
  }
  entry["cluster_id"] =
      record.cluster_id.has_value() ? json(*record.cluster_id) : json(nullptr);
  entry["label"] = record.label.has_value() ? json(*record.label) : json(nullptr);
  return entry;
}

PrimitiveRecord record_from_json(const json& entry, const std::string& where) {
  PrimitiveRecord record;
  if (!entry.contains("id") || !entry["id"].is_string())
    throw parse_error(where + ": primitive entry lacks a string 'id'");
  record.id = entry["id"].get<std::string>();
  record.source_demo = entry.value("source_demo", std::string{});
  record.segment_index = entry.value("segment_index", 0);
  if (record.segment_index < 0)
    throw parse_error(where + ": negative segment_index for '" + record.id + "'");
  if (entry.contains("features") && !entry["features"].is_null()) {
    const json& features = entry["features"];
    Eigen::VectorXd vector(features.size());
    Eigen::Index d = 0;
    for (const json& value : features) vector(d++) = value.get<double>();
    record.features = std::move(vector);
  }
  if (entry.contains("cluster_id") && !entry["cluster_id"].is_null())
    record.cluster_id = entry["cluster_id"].get<int>();
  if (entry.contains("label") && !entry["label"].is_null())
    record.label = entry["label"].get<std::string>();
  return record;
}

}  // namespace

void validate_primitive_id(const std::string& id) {
  if (id.empty()) throw parse_error("primitive id must be non-empty");
  if (id.front() == '/' || id.back() == '/')
    throw parse_error("primitive id may not start or end with '/': '" + id + "'");
  if (id.find_first_not_of(
          "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-/") !=
      std::string::npos)
    throw parse_error("primitive id contains unsupported characters: '" + id +
                      "'");
  std::istringstream stream(id);
  std::string part;
  while (std::getline(stream, part, '/'))
    if (part.empty() || part == "." || part == "..")
      throw parse_error("primitive id contains an invalid path part: '" + id +
                        "'");
}

PrimitiveLibrary::PrimitiveLibrary(std::filesystem::path root)
    : root_(std::move(root)) {}

PrimitiveLibrary PrimitiveLibrary::create(const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  if (std::filesystem::exists(root / "manifest.json"))
    throw parse_error("a library already exists at " + root.string());
  PrimitiveLibrary library(root);
  const WriterLock lock(root);
  std::filesystem::create_directories(root / "primitives");
  library.write_manifest();
  return library;
}

PrimitiveLibrary PrimitiveLibrary::open(const std::filesystem::path& root) {
  if (!std::filesystem::exists(root / "manifest.json"))
    throw parse_error("no library manifest at " + root.string());
  PrimitiveLibrary library(root);
  library.read_manifest();
  return library;
}

void PrimitiveLibrary::read_manifest() {
  const std::filesystem::path path = root_ / "manifest.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& failure) {
    throw parse_error(path.string() + ": " + failure.what());
  }
  if (!root.contains("version") || !root["version"].is_number_integer())
    throw parse_error(path.string() + ": missing integer 'version'");
  version_ = root["version"].get<int>();
  if (version_ != 1)
    throw parse_error(path.string() + ": unsupported manifest version " +
                      std::to_string(version_));

  records_.clear();
  std::set<std::string> seen;
  for (const json& entry : root.value("primitives", json::array())) {
    PrimitiveRecord record = record_from_json(entry, path.string());
    validate_primitive_id(record.id);
    if (!seen.insert(record.id).second)
      throw parse_error(path.string() + ": duplicate primitive id '" +
                        record.id + "'");
    records_.push_back(std::move(record));
  }

  clusters_.clear();
  std::set<std::string> clustered;
  for (const json& entry : root.value("clusters", json::array())) {
    ClusterEntry cluster;
    cluster.cluster_id = entry.at("cluster_id").get<int>();
    const json& node = entry.at("node");
    cluster.node.resize(static_cast<Eigen::Index>(node.size()));
    Eigen::Index d = 0;
    for (const json& value : node) cluster.node(d++) = value.get<double>();
    for (const json& member : entry.at("members")) {
      const std::string id = member.get<std::string>();
      if (!seen.count(id))
        throw parse_error(path.string() + ": cluster member '" + id +
                          "' is not a primitive");
      if (!clustered.insert(id).second)
        throw parse_error(path.string() + ": primitive '" + id +
                          "' appears in two clusters");
      cluster.member_ids.push_back(id);
    }
    if (entry.contains("majority_label") && !entry["majority_label"].is_null())
      cluster.majority_label = entry["majority_label"].get<std::string>();
    clusters_.push_back(std::move(cluster));
  }
  params_provenance_ = root.value("params_provenance", json::object()).dump();
}

void PrimitiveLibrary::write_manifest() const {
  json root;
  root["version"] = version_;
  json primitives = json::array();
  for (const PrimitiveRecord& record : records_)
    primitives.push_back(record_to_json(record));
  root["primitives"] = std::move(primitives);
  json clusters = json::array();
  for (const ClusterEntry& cluster : clusters_) {
    json entry;
    entry["cluster_id"] = cluster.cluster_id;
    json node = json::array();
    for (Eigen::Index d = 0; d < cluster.node.size(); ++d)
      node.push_back(cluster.node(d));
    entry["node"] = std::move(node);
    entry["members"] = cluster.member_ids;
    entry["majority_label"] = cluster.majority_label.has_value()
                                  ? json(*cluster.majority_label)
                                  : json(nullptr);
    clusters.push_back(std::move(entry));
  }
  root["clusters"] = std::move(clusters);
  root["params_provenance"] = json::parse(params_provenance_);
  atomic_write_file(root_ / "manifest.json", root.dump(2) + "\n");
}

std::filesystem::path PrimitiveLibrary::primitive_dir(const std::string& id) const {
  return root_ / "primitives" / std::filesystem::path(id);
}

void PrimitiveLibrary::add_primitives(const std::vector<PrimitiveRecord>& records) {
  if (records.empty()) return;

  std::set<std::string> existing;
  for (const PrimitiveRecord& record : records_) existing.insert(record.id);
  for (const PrimitiveRecord& record : records) {
    validate_primitive_id(record.id);
    if (record.segment_index < 0)
      throw std::invalid_argument("negative segment_index for '" + record.id +
                                  "'");
    if (!record.streams.has_value())
      throw std::invalid_argument("primitive '" + record.id +
                                  "' has no stream data to persist");
    if (!existing.insert(record.id).second)
      throw id_collision("primitive id '" + record.id +
                         "' already exists in the library");
  }

  const WriterLock lock(root_);
  for (const PrimitiveRecord& record : records)
    write_demonstration_dir(primitive_dir(record.id), *record.streams);
  for (const PrimitiveRecord& record : records) {
    PrimitiveRecord metadata = record;
    metadata.streams.reset();
    records_.push_back(std::move(metadata));
  }
  std::sort(records_.begin(), records_.end(),
            [](const PrimitiveRecord& a, const PrimitiveRecord& b) {
              return a.id < b.id;
            });
  write_manifest();
}

void PrimitiveLibrary::assign_clusters(const ClusterFile& model) {
  std::map<std::string, PrimitiveRecord*> by_id;
  for (PrimitiveRecord& record : records_) by_id[record.id] = &record;
  std::set<std::string> assigned;
  for (const auto& [id, cluster] : model.assignments) {
    if (!by_id.count(id))
      throw parse_error("cluster model refers to unknown primitive '" + id +
                        "'; the model file is stale");
    if (cluster < 0 || cluster >= model.nodes.rows())
      throw parse_error("cluster index " + std::to_string(cluster) +
                        " out of range for '" + id + "'");
    if (!assigned.insert(id).second)
      throw parse_error("primitive '" + id + "' assigned twice in the model");
  }

  const WriterLock lock(root_);
  for (PrimitiveRecord& record : records_) record.cluster_id.reset();
  for (const auto& [id, cluster] : model.assignments)
    by_id[id]->cluster_id = cluster;

  clusters_.clear();
  for (Eigen::Index c = 0; c < model.nodes.rows(); ++c) {
    ClusterEntry entry;
    entry.cluster_id = static_cast<int>(c);
    entry.node = model.nodes.row(c).transpose();
    for (const auto& [id, cluster] : model.assignments)
      if (cluster == static_cast<int>(c)) entry.member_ids.push_back(id);
    std::sort(entry.member_ids.begin(), entry.member_ids.end());

    // Majority label over the members' sparse labels; ties resolve to the
    // lexicographically first label.
    std::map<std::string, int> votes;
    for (const std::string& id : entry.member_ids)
      if (by_id[id]->label.has_value()) ++votes[*by_id[id]->label];
    int best_count = 0;
    for (const auto& [label, count] : votes) {
      if (count > best_count) {
        best_count = count;
        entry.majority_label = label;
      }
      // std::map iterates labels in lexicographic order, so the first
      // label reaching the best count wins ties.
    }
    clusters_.push_back(std::move(entry));
  }
  write_manifest();
}

void PrimitiveLibrary::set_features(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& features) {
  std::map<std::string, PrimitiveRecord*> by_id;
  for (PrimitiveRecord& record : records_) by_id[record.id] = &record;
  for (const auto& [id, vector] : features)
    if (!by_id.count(id))
      throw parse_error("features refer to unknown primitive '" + id + "'");
  const WriterLock lock(root_);
  for (const auto& [id, vector] : features) by_id[id]->features = vector;
  write_manifest();
}

void PrimitiveLibrary::set_labels(const std::map<std::string, std::string>& labels) {
  std::map<std::string, PrimitiveRecord*> by_id;
  for (PrimitiveRecord& record : records_) by_id[record.id] = &record;
  for (const auto& [id, label] : labels)
    if (!by_id.count(id))
      throw parse_error("label refers to unknown primitive '" + id + "'");
  const WriterLock lock(root_);
  for (const auto& [id, label] : labels) by_id[id]->label = label;
  write_manifest();
}

std::vector<PrimitiveRecord> PrimitiveLibrary::list() const { return records_; }

std::vector<PrimitiveRecord> PrimitiveLibrary::query_by_label(
    const std::string& label) const {
  std::vector<PrimitiveRecord> matches;
  for (const PrimitiveRecord& record : records_)
    if (record.label.has_value() && *record.label == label)
      matches.push_back(record);
  return matches;
}

std::vector<PrimitiveRecord> PrimitiveLibrary::query_by_cluster(
    int cluster_id) const {
  std::vector<PrimitiveRecord> matches;
  for (const PrimitiveRecord& record : records_)
    if (record.cluster_id.has_value() && *record.cluster_id == cluster_id)
      matches.push_back(record);
  return matches;
}

std::vector<PrimitiveRecord> PrimitiveLibrary::query_by_source_demo(
    const std::string& demo) const {
  std::vector<PrimitiveRecord> matches;
  for (const PrimitiveRecord& record : records_)
    if (record.source_demo == demo) matches.push_back(record);
  std::sort(matches.begin(), matches.end(),
            [](const PrimitiveRecord& a, const PrimitiveRecord& b) {
              if (a.segment_index != b.segment_index)
                return a.segment_index < b.segment_index;
              return a.id < b.id;
            });
  return matches;
}

PrimitiveRecord PrimitiveLibrary::load(const std::string& id) const {
  const auto match =
      std::find_if(records_.begin(), records_.end(),
                   [&](const PrimitiveRecord& r) { return r.id == id; });
  if (match == records_.end())
    throw parse_error("no primitive '" + id + "' in the library");
  PrimitiveRecord record = *match;
  record.streams = read_demonstration_dir(primitive_dir(id));
  return record;
}

void PrimitiveLibrary::merge_params_provenance(const std::string& json_text) {
  json incoming;
  try {
    incoming = json::parse(json_text);
  } catch (const json::parse_error& failure) {
    throw std::invalid_argument(std::string{"provenance is not valid JSON: "} +
                                failure.what());
  }
  json current = json::parse(params_provenance_);
  for (const auto& [key, value] : incoming.items()) current[key] = value;
  params_provenance_ = current.dump();
  const WriterLock lock(root_);
  write_manifest();
}

}  // namespace primlib
