// primlib: segment demonstrations into motion primitives, cluster them,
// store them in an on-disk library, and retarget them to new constraints.
//
// Exit codes: 0 success, 2 malformed input, 3 parameter violation,
// 4 infeasible stretch weight, 5 empty selection.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "primlib/elastic_cluster.hpp"
#include "primlib/errors.hpp"
#include "primlib/featurizer.hpp"
#include "primlib/io.hpp"
#include "primlib/kmeans_reference.hpp"
#include "primlib/library.hpp"
#include "primlib/lte_editor.hpp"
#include "primlib/segmenter.hpp"
#include "primlib/svg.hpp"
#include "primlib/trajectory.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace primlib;

/// A query matched nothing to select from.
struct empty_selection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::uint64_t seed = 0;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
};

void add_common_options(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--seed", common.seed, "Random seed echoed into artifacts")
      ->envname("PRIMLIB_SEED")
      ->capture_default_str();
  cmd->add_option("--threads", common.threads,
                  "Worker threads for parallel stages (results are "
                  "independent of this value)")
      ->check(CLI::PositiveNumber);
}

std::string sanitize_for_filename(std::string id) {
  std::replace(id.begin(), id.end(), '/', '_');
  std::replace(id.begin(), id.end(), '\\', '_');
  return id;
}

void print_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], row[c].size());
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size())
        line += std::string(widths[c] - row[c].size() + 2, ' ');
    }
    std::cout << line << "\n";
  }
}

std::vector<std::vector<std::string>> record_table(
    const std::vector<PrimitiveRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"id", "source_demo", "segment", "cluster", "label", "features"});
  for (const PrimitiveRecord& record : records) {
    rows.push_back(
        {record.id, record.source_demo, std::to_string(record.segment_index),
         record.cluster_id.has_value() ? std::to_string(*record.cluster_id) : "-",
         record.label.value_or("-"),
         record.features.has_value()
             ? std::to_string(record.features->size()) + "-d"
             : "-"});
  }
  return rows;
}

// ---------------------------------------------------------------- segment

struct SegmentArgs {
  CommonOptions common;
  std::string demo_dir;
  std::string out_dir;
  SegmentationParams params;
  std::string mode = "deterministic";
  std::string plot_path;
};

int run_segment(const SegmentArgs& args) {
  SegmentationParams params = args.params;
  if (args.mode == "deterministic")
    params.mode = ExtractionMode::deterministic;
  else if (args.mode == "sampled")
    params.mode = ExtractionMode::sampled;
  else
    throw std::invalid_argument("--mode must be 'deterministic' or 'sampled'");
  params.validate();

  const Demonstration demo = read_demonstration_dir(args.demo_dir);
  const SegmentationResult result =
      segment_demonstration(demo, params, args.common.seed, args.common.threads);

  fs::create_directories(args.out_dir);
  for (std::size_t i = 0; i < result.segments.size(); ++i)
    write_demonstration_dir(fs::path(args.out_dir) / ("seg" + std::to_string(i)),
                            result.segments[i]);

  json report;
  report["seed"] = args.common.seed;
  report["demo_id"] = demo.id();
  report["params"] = {{"window", params.window},
                      {"min_segment", params.min_segment},
                      {"threshold", params.threshold},
                      {"density_floor", params.density_floor},
                      {"mode", args.mode},
                      {"sample_count", params.sample_count},
                      {"density_quantile", params.density_quantile}};
  report["indices"] = result.keypoints.indices;
  report["provenance"] = result.keypoints.provenance;
  json per_stream = json::object();
  for (const ChangepointSet& changepoints : result.stream_changepoints)
    per_stream[changepoints.stream_name] = changepoints.indices;
  report["per_stream_changepoints"] = std::move(per_stream);
  report["density"] = std::vector<double>(
      result.density.values.data(),
      result.density.values.data() + result.density.values.size());
  report["segment_count"] = result.segments.size();
  atomic_write_file(fs::path(args.out_dir) / "keypoints.json",
                    report.dump(2) + "\n");

  if (!args.plot_path.empty()) {
    std::vector<std::string> stream_names;
    for (const auto& [name, trajectory] : demo.streams())
      stream_names.push_back(name);
    write_density_svg(args.plot_path, result, stream_names, params.threshold,
                      args.common.seed);
  }
  std::cout << "wrote " << result.segments.size() << " segments to "
            << args.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------- cluster

struct ClusterArgs {
  CommonOptions common;
  std::string features_path;
  std::string out_dir;
  double lambda = 0.4;
  bool auto_n = false;
  int fixed_n = 0;
  int restarts = 10;
  bool kmeans_oracle = false;
  bool lambda_scale = false;
  std::string labels_path;
};

json misclustering_report(const FeatureSet& features,
                          const std::vector<int>& assignment, int n,
                          const std::map<std::string, std::string>& labels) {
  // Majority generative label per cluster; a labeled item counts as
  // misclustered when its label differs from its cluster's majority.
  std::vector<std::map<std::string, int>> votes(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < features.count(); ++j) {
    const auto label = labels.find(features.ids[static_cast<std::size_t>(j)]);
    if (label != labels.end())
      ++votes[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])]
             [label->second];
  }
  std::vector<std::string> majority(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    int best = 0;
    for (const auto& [label, count] : votes[static_cast<std::size_t>(c)])
      if (count > best) {
        best = count;
        majority[static_cast<std::size_t>(c)] = label;
      }
  }
  int labeled = 0;
  int misclustered = 0;
  for (Eigen::Index j = 0; j < features.count(); ++j) {
    const auto label = labels.find(features.ids[static_cast<std::size_t>(j)]);
    if (label == labels.end()) continue;
    ++labeled;
    if (label->second !=
        majority[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])])
      ++misclustered;
  }
  json per_cluster = json::array();
  for (int c = 0; c < n; ++c) {
    json entry;
    entry["cluster"] = c;
    entry["majority_label"] = majority[static_cast<std::size_t>(c)];
    json counts = json::object();
    for (const auto& [label, count] : votes[static_cast<std::size_t>(c)])
      counts[label] = count;
    entry["label_counts"] = std::move(counts);
    per_cluster.push_back(std::move(entry));
  }
  json report;
  report["labeled"] = labeled;
  report["misclustered"] = misclustered;
  report["rate"] = labeled > 0 ? static_cast<double>(misclustered) /
                                     static_cast<double>(labeled)
                               : 0.0;
  report["per_cluster"] = std::move(per_cluster);
  return report;
}

int run_cluster(const ClusterArgs& args) {
  if (args.auto_n == (args.fixed_n > 0))
    throw std::invalid_argument("pass exactly one of --auto or --n <count>");
  if (args.lambda < 0.0)
    throw std::invalid_argument("--lambda must be non-negative");

  const FeatureSet features = read_features_csv(args.features_path);
  double lambda = args.lambda;
  if (args.lambda_scale) {
    const Eigen::RowVectorXd mean = features.data.colwise().mean();
    const double variance =
        (features.data.rowwise() - mean).squaredNorm() /
        static_cast<double>(features.count());
    lambda *= variance / static_cast<double>(features.count());
    std::cout << "scaled stretch weight: " << lambda << "\n";
  }

  ElasticClusterModel model;
  std::vector<AutoFitResult::TraceEntry> trace;
  if (args.auto_n) {
    AutoFitResult result = fit_auto(features, lambda, args.common.seed,
                                    args.restarts, args.common.threads);
    if (result.stop_reason == AutoStopReason::next_infeasible &&
        result.model.cluster_count() == 1 && result.infeasible_restarts_at_next > 0)
      throw infeasible_stretching(
          "every restart at 2 nodes was infeasible; the stretch weight must "
          "stay below (smallest cluster size) / (node count) — lower --lambda",
          0.0);
    model = std::move(result.model);
    trace = std::move(result.trace);
  } else {
    model = fit_best_of(features, args.fixed_n, lambda, args.common.seed,
                        args.restarts, args.common.threads);
    trace.push_back({args.fixed_n, model.u_x - model.u_e});
  }

  fs::create_directories(args.out_dir);
  ClusterFile file;
  file.seed = args.common.seed;
  file.lambda = lambda;
  file.nodes = model.nodes;
  file.u_x = model.u_x;
  file.u_e = model.u_e;
  for (Eigen::Index j = 0; j < features.count(); ++j)
    file.assignments.emplace_back(features.ids[static_cast<std::size_t>(j)],
                                  model.assignment[static_cast<std::size_t>(j)]);
  for (const auto& entry : trace)
    file.energy_trace.emplace_back(entry.n, entry.best_energy);
  write_cluster_file(fs::path(args.out_dir) / "clusters.json", file);

  if (args.kmeans_oracle) {
    const int n = model.cluster_count();
    const Eigen::MatrixXd init = initial_nodes(features, n, args.common.seed);
    FitOptions options;
    options.init = init;
    const ElasticClusterModel elastic =
        fit_fixed_n(features, n, lambda, args.common.seed, options);
    const LloydResult lloyd = lloyd_kmeans(features.data, init);
    int agree = 0;
    for (std::size_t j = 0; j < elastic.assignment.size(); ++j)
      if (elastic.assignment[j] == lloyd.assignment[j]) ++agree;
    json oracle;
    oracle["n"] = n;
    oracle["lambda"] = lambda;
    oracle["agreement"] = static_cast<double>(agree) /
                          static_cast<double>(elastic.assignment.size());
    oracle["max_center_distance"] =
        (elastic.nodes - lloyd.centers).rowwise().norm().maxCoeff();
    oracle["elastic_iterations"] = elastic.iterations;
    oracle["lloyd_iterations"] = lloyd.iterations;
    atomic_write_file(fs::path(args.out_dir) / "kmeans_agreement.json",
                      oracle.dump(2) + "\n");
    std::cout << "k-means agreement: " << oracle["agreement"].dump() << "\n";
  }

  if (!args.labels_path.empty()) {
    const std::map<std::string, std::string> labels =
        read_labels_json(args.labels_path);
    const json report = misclustering_report(features, model.assignment,
                                             model.cluster_count(), labels);
    atomic_write_file(fs::path(args.out_dir) / "misclustering.json",
                      report.dump(2) + "\n");
    std::cout << "misclustering rate: " << report["rate"].dump() << " ("
              << report["misclustered"].dump() << " of "
              << report["labeled"].dump() << " labeled)\n";
  }

  std::cout << "clusters: " << model.cluster_count()
            << "  approximation energy: " << model.u_x
            << "  stretching energy: " << model.u_e << "\n";
  return 0;
}

// ---------------------------------------------------------------- featurize

struct FeaturizeArgs {
  CommonOptions common;
  std::string library_dir;
  std::string out_path;
  std::string meta_path;
  std::string stream_name;
  std::vector<std::string> rep_ids;
  bool reps_by_label = false;
  int resample_length = 100;
  bool update_library = false;
};

int run_featurize(const FeaturizeArgs& args) {
  if (args.rep_ids.empty() == !args.reps_by_label)
    throw std::invalid_argument("pass exactly one of --reps or --by-label");
  PrimitiveLibrary library = PrimitiveLibrary::open(args.library_dir);
  const std::vector<PrimitiveRecord> records = library.list();
  if (records.empty()) throw parse_error("the library holds no primitives");

  // Load every primitive's chosen stream once.
  std::map<std::string, Trajectory> trajectories;
  std::string stream_name = args.stream_name;
  for (const PrimitiveRecord& record : records) {
    const PrimitiveRecord loaded = library.load(record.id);
    if (stream_name.empty())
      stream_name = loaded.streams->streams().front().first;
    if (!loaded.streams->has_stream(stream_name))
      throw parse_error("primitive '" + record.id + "' has no stream '" +
                        stream_name + "'");
    trajectories.emplace(record.id, loaded.streams->stream(stream_name));
  }

  RepresentativeSet reps;
  reps.resample_length = args.resample_length;
  if (!args.rep_ids.empty()) {
    for (const std::string& id : args.rep_ids) {
      const auto found = trajectories.find(id);
      if (found == trajectories.end())
        throw parse_error("representative '" + id + "' is not in the library");
      reps.representatives.emplace_back(id, found->second);
    }
  } else {
    // One representative per label: the medoid of that label's primitives.
    std::map<std::string, std::vector<const PrimitiveRecord*>> by_label;
    for (const PrimitiveRecord& record : records)
      if (record.label.has_value())
        by_label[*record.label].push_back(&record);
    if (by_label.empty())
      throw parse_error("--by-label needs labeled primitives in the library");
    for (const auto& [label, members] : by_label) {
      std::vector<Trajectory> group;
      for (const PrimitiveRecord* member : members)
        group.push_back(trajectories.at(member->id));
      const std::size_t medoid = pick_medoid(group, args.resample_length);
      reps.representatives.emplace_back(label, group[medoid]);
    }
  }

  FeatureSet features;
  features.data.resize(std::ssize(records),
                       std::ssize(reps.representatives));
  std::vector<std::string> degenerate_ids;
  for (Eigen::Index i = 0; i < std::ssize(records); ++i) {
    const std::string& id = records[static_cast<std::size_t>(i)].id;
    const FeatureResult result = featurize(trajectories.at(id), reps);
    features.data.row(i) = result.features.transpose();
    features.ids.push_back(id);
    if (result.degenerate_scale) degenerate_ids.push_back(id);
  }
  write_features_csv(args.out_path, features);

  json meta;
  meta["seed"] = args.common.seed;
  meta["stream"] = stream_name;
  meta["resample_length"] = args.resample_length;
  json rep_list = json::array();
  for (const auto& [name, trajectory] : reps.representatives)
    rep_list.push_back(name);
  meta["representatives"] = std::move(rep_list);
  meta["degenerate_ids"] = degenerate_ids;
  const fs::path meta_path = args.meta_path.empty()
                                 ? fs::path(args.out_path).parent_path() /
                                       "features_meta.json"
                                 : fs::path(args.meta_path);
  atomic_write_file(meta_path, meta.dump(2) + "\n");

  if (args.update_library) {
    std::vector<std::pair<std::string, Eigen::VectorXd>> stored;
    for (Eigen::Index i = 0; i < features.count(); ++i)
      stored.emplace_back(features.ids[static_cast<std::size_t>(i)],
                          features.data.row(i).transpose());
    library.set_features(stored);
  }
  std::cout << "featurized " << features.count() << " primitives against "
            << reps.representatives.size() << " representatives\n";
  return 0;
}

// ---------------------------------------------------------------- library

int run_library_add(const std::string& library_dir, const std::string& segments_dir,
                    const std::string& labels_path) {
  PrimitiveLibrary library =
      fs::exists(fs::path(library_dir) / "manifest.json")
          ? PrimitiveLibrary::open(library_dir)
          : PrimitiveLibrary::create(library_dir);

  std::vector<fs::path> segment_dirs;
  if (!fs::is_directory(segments_dir))
    throw parse_error("'" + segments_dir + "' is not a directory");
  for (const auto& entry : fs::directory_iterator(segments_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "demo.json"))
      segment_dirs.push_back(entry.path());
  std::sort(segment_dirs.begin(), segment_dirs.end());
  if (segment_dirs.empty())
    throw parse_error("no segment directories (demo.json) under " +
                      segments_dir);

  std::vector<PrimitiveRecord> records;
  for (std::size_t position = 0; position < segment_dirs.size(); ++position) {
    Demonstration demo = read_demonstration_dir(segment_dirs[position]);
    PrimitiveRecord record;
    record.id = demo.id();
    // Ids minted by segmentation look like "<demo>/seg<i>".
    const std::size_t cut = record.id.rfind("/seg");
    record.source_demo = cut == std::string::npos ? record.id
                                                  : record.id.substr(0, cut);
    record.segment_index = static_cast<int>(position);
    if (cut != std::string::npos) {
      const std::string suffix = record.id.substr(cut + 4);
      if (!suffix.empty() &&
          suffix.find_first_not_of("0123456789") == std::string::npos)
        record.segment_index = std::stoi(suffix);
    }
    record.streams = std::move(demo);
    records.push_back(std::move(record));
  }
  library.add_primitives(records);

  if (!labels_path.empty()) library.set_labels(read_labels_json(labels_path));

  // Carry the segmentation parameters into the library's provenance.
  const fs::path keypoints = fs::path(segments_dir) / "keypoints.json";
  if (fs::exists(keypoints)) {
    std::ifstream in(keypoints);
    json report;
    in >> report;
    if (report.contains("params")) {
      json provenance;
      provenance["segmentation"] = report["params"];
      provenance["segmentation"]["seed"] = report.value("seed", 0);
      library.merge_params_provenance(provenance.dump());
    }
  }
  std::cout << "added " << records.size() << " primitives\n";
  return 0;
}

int run_library_assign(const std::string& library_dir,
                       const std::string& model_path) {
  PrimitiveLibrary library = PrimitiveLibrary::open(library_dir);
  const ClusterFile model = read_cluster_file(model_path);
  library.assign_clusters(model);
  json provenance;
  provenance["clustering"] = {{"lambda", model.lambda},
                              {"seed", model.seed},
                              {"n_clusters", model.nodes.rows()}};
  library.merge_params_provenance(provenance.dump());
  std::cout << "assigned " << model.assignments.size() << " primitives to "
            << model.nodes.rows() << " clusters\n";
  return 0;
}

// ---------------------------------------------------------------- select

struct SelectArgs {
  CommonOptions common;
  std::string library_dir;
  std::optional<int> cluster_id;
  std::string label;
  std::string constraints_path;
  std::string out_dir;
  int top_k = 3;
  std::string rank_mode = "least-distortion";
  std::string stream_name;
};

int run_select(const SelectArgs& args) {
  if (args.cluster_id.has_value() == !args.label.empty())
    throw std::invalid_argument("pass exactly one of --cluster or --label");
  RankMode mode;
  if (args.rank_mode == "least-distortion")
    mode = RankMode::least_distortion;
  else if (args.rank_mode == "shortest")
    mode = RankMode::shortest;
  else
    throw std::invalid_argument(
        "--rank-mode must be 'least-distortion' or 'shortest'");

  const std::vector<EditConstraint> constraints =
      read_constraints_json(args.constraints_path);
  PrimitiveLibrary library = PrimitiveLibrary::open(args.library_dir);
  const std::vector<PrimitiveRecord> matches =
      args.cluster_id.has_value() ? library.query_by_cluster(*args.cluster_id)
                                  : library.query_by_label(args.label);
  if (matches.empty())
    throw empty_selection(
        "no matching primitives for " +
        (args.cluster_id.has_value()
             ? "--cluster " + std::to_string(*args.cluster_id)
             : "--label '" + args.label + "'"));

  std::string stream_name = args.stream_name;
  std::vector<std::pair<std::string, Trajectory>> candidates;
  std::vector<std::pair<std::string, std::string>> load_errors;
  for (const PrimitiveRecord& record : matches) {
    const PrimitiveRecord loaded = library.load(record.id);
    if (stream_name.empty())
      stream_name = loaded.streams->streams().front().first;
    if (!loaded.streams->has_stream(stream_name)) {
      load_errors.emplace_back(record.id, "no stream '" + stream_name + "'");
      continue;
    }
    candidates.emplace_back(record.id, loaded.streams->stream(stream_name));
  }

  SelectionReport report;
  if (!candidates.empty())
    report = select_candidates(candidates, constraints, args.top_k, mode,
                               args.common.threads);
  report.errors.insert(report.errors.begin(), load_errors.begin(),
                       load_errors.end());

  fs::create_directories(args.out_dir);
  json selection;
  selection["seed"] = args.common.seed;
  selection["rank_mode"] = args.rank_mode;
  selection["stream"] = stream_name;
  json ranked = json::array();
  for (std::size_t rank = 0; rank < report.ranked.size(); ++rank) {
    const RankedCandidate& candidate = report.ranked[rank];
    const std::string file_name = "cand_" + std::to_string(rank + 1) + "_" +
                                  sanitize_for_filename(candidate.id) + ".csv";
    write_trajectory_csv(fs::path(args.out_dir) / file_name,
                         candidate.result.edited);
    json entry;
    entry["rank"] = rank + 1;
    entry["id"] = candidate.id;
    entry["length_ratio"] = candidate.result.length_ratio;
    entry["constraint_residual"] = candidate.result.constraint_residual;
    entry["edited_arc_length"] = candidate.edited_arc_length;
    entry["file"] = file_name;
    ranked.push_back(std::move(entry));
  }
  selection["candidates"] = std::move(ranked);
  json errors = json::array();
  for (const auto& [id, message] : report.errors)
    errors.push_back({{"id", id}, {"error", message}});
  selection["errors"] = std::move(errors);
  atomic_write_file(fs::path(args.out_dir) / "selection.json",
                    selection.dump(2) + "\n");
  std::cout << "ranked " << report.ranked.size() << " candidates ("
            << report.errors.size() << " failed)\n";
  return 0;
}

// ---------------------------------------------------------------- wiring

int dispatch(int argc, char** argv) {
  CLI::App app{
      "Motion-primitive toolkit: probabilistic multimodal segmentation, "
      "elastic clustering with automatic cluster-count discovery, a "
      "persistent primitive library, and Laplacian trajectory retargeting."};
  app.require_subcommand(1);

  SegmentArgs segment_args;
  CLI::App* segment = app.add_subcommand(
      "segment", "Split a demonstration into motion primitives");
  segment->add_option("demo_dir", segment_args.demo_dir,
                      "Demonstration directory (demo.json + <stream>.csv)")
      ->required();
  segment->add_option("--out", segment_args.out_dir, "Output directory")
      ->required();
  segment->add_option("--window", segment_args.params.window,
                      "Sliding-window width (samples)")
      ->capture_default_str();
  segment->add_option("--min-seg", segment_args.params.min_segment,
                      "Minimum segment length (samples)")
      ->capture_default_str();
  segment->add_option("--threshold", segment_args.params.threshold,
                      "Windowed-jerk changepoint threshold")
      ->capture_default_str();
  segment->add_option("--mode", segment_args.mode,
                      "Keypoint extraction: deterministic | sampled")
      ->capture_default_str();
  segment->add_option("--sample-count", segment_args.params.sample_count,
                      "Draws used by sampled extraction")
      ->capture_default_str();
  segment->add_option("--quantile", segment_args.params.density_quantile,
                      "Density height quantile for deterministic extraction")
      ->capture_default_str();
  segment->add_option("--floor", segment_args.params.density_floor,
                      "Additive density floor (0 = 1/T)")
      ->capture_default_str();
  segment->add_option("--plot", segment_args.plot_path,
                      "Write an SVG of the fused density and jerk profiles");
  add_common_options(segment, segment_args.common);

  ClusterArgs cluster_args;
  CLI::App* cluster = app.add_subcommand(
      "cluster", "Cluster feature vectors with the elastic node graph");
  cluster->add_option("--features", cluster_args.features_path,
                      "Feature CSV (id,f0,...)")
      ->required();
  cluster->add_option("--out", cluster_args.out_dir, "Output directory")
      ->required();
  cluster->add_option("--lambda", cluster_args.lambda, "Stretch weight")
      ->capture_default_str();
  cluster->add_flag("--auto", cluster_args.auto_n,
                    "Discover the cluster count by energy descent");
  cluster->add_option("--n", cluster_args.fixed_n, "Fixed cluster count");
  cluster->add_option("--restarts", cluster_args.restarts,
                      "Seeded restarts per cluster count")
      ->capture_default_str();
  cluster->add_flag("--kmeans-oracle", cluster_args.kmeans_oracle,
                    "Also run a reference k-means from the same "
                    "initialisation and write agreement stats");
  cluster->add_flag("--lambda-scale", cluster_args.lambda_scale,
                    "Scale --lambda by data variance / item count");
  cluster->add_option("--labels", cluster_args.labels_path,
                      "Labels JSON for a misclustering report");
  add_common_options(cluster, cluster_args.common);

  FeaturizeArgs featurize_args;
  CLI::App* featurize = app.add_subcommand(
      "featurize",
      "Compute warping-distance features for every library primitive");
  featurize->add_option("--library", featurize_args.library_dir, "Library root")
      ->required();
  featurize->add_option("--out", featurize_args.out_path, "Feature CSV path")
      ->required();
  featurize->add_option("--meta", featurize_args.meta_path,
                        "Metadata JSON path (default: features_meta.json "
                        "next to the CSV)");
  featurize->add_option("--stream", featurize_args.stream_name,
                        "Stream to compare (default: first stream)");
  featurize->add_option("--reps", featurize_args.rep_ids,
                        "Representative primitive ids")
      ->delimiter(',');
  featurize->add_flag("--by-label", featurize_args.reps_by_label,
                      "Use each label's medoid as its representative");
  featurize->add_option("--resample", featurize_args.resample_length,
                        "Common sample count before comparison")
      ->capture_default_str();
  featurize->add_flag("--update-library", featurize_args.update_library,
                      "Also store the features in the library manifest");
  add_common_options(featurize, featurize_args.common);

  CLI::App* library = app.add_subcommand("library", "Primitive library upkeep");
  library->require_subcommand(1);
  std::string lib_dir;
  std::string lib_segments;
  std::string lib_labels;
  std::string lib_model;
  std::string query_label;
  std::string query_source;
  std::optional<int> query_cluster;

  CLI::App* lib_add =
      library->add_subcommand("add", "Add segment directories as primitives");
  lib_add->add_option("--library", lib_dir, "Library root")->required();
  lib_add->add_option("--segments", lib_segments,
                      "Directory holding seg*/ demonstration directories")
      ->required();
  lib_add->add_option("--labels", lib_labels, "Labels JSON to attach");

  CLI::App* lib_list = library->add_subcommand("list", "List all primitives");
  lib_list->add_option("--library", lib_dir, "Library root")->required();

  CLI::App* lib_assign =
      library->add_subcommand("assign", "Write cluster assignments from a "
                                        "clusters.json into the manifest");
  lib_assign->add_option("--library", lib_dir, "Library root")->required();
  lib_assign->add_option("--model", lib_model, "clusters.json path")->required();

  CLI::App* lib_query = library->add_subcommand("query", "Query primitives");
  lib_query->add_option("--library", lib_dir, "Library root")->required();
  lib_query->add_option("--label", query_label, "Match this label");
  auto* query_cluster_opt = lib_query->add_option(
      "--cluster", [&query_cluster](const CLI::results_t& values) {
        query_cluster = std::stoi(values.front());
        return true;
      },
      "Match this cluster id");
  lib_query->add_option("--source-demo", query_source,
                        "Match this source demonstration");

  SelectArgs select_args;
  CLI::App* select = app.add_subcommand(
      "select", "Edit queried primitives toward constraints and rank them");
  select->add_option("--library", select_args.library_dir, "Library root")
      ->required();
  auto* select_cluster_opt = select->add_option(
      "--cluster", [&select_args](const CLI::results_t& values) {
        select_args.cluster_id = std::stoi(values.front());
        return true;
      },
      "Candidate pool: this cluster id");
  select->add_option("--label", select_args.label,
                     "Candidate pool: this label");
  select->add_option("--constraints", select_args.constraints_path,
                     "Constraints JSON ([{index, target, weight}])")
      ->required();
  select->add_option("--out", select_args.out_dir, "Output directory")
      ->required();
  select->add_option("--top-k", select_args.top_k, "Candidates to keep")
      ->capture_default_str();
  select->add_option("--rank-mode", select_args.rank_mode,
                     "least-distortion | shortest")
      ->capture_default_str();
  select->add_option("--stream", select_args.stream_name,
                     "Stream to edit (default: first stream)");
  add_common_options(select, select_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::CallForAllHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 3;
  }

  if (*segment) return run_segment(segment_args);
  if (*cluster) return run_cluster(cluster_args);
  if (*featurize) return run_featurize(featurize_args);
  if (*library) {
    if (*lib_add) return run_library_add(lib_dir, lib_segments, lib_labels);
    if (*lib_list) {
      print_table(record_table(PrimitiveLibrary::open(lib_dir).list()));
      return 0;
    }
    if (*lib_assign) return run_library_assign(lib_dir, lib_model);
    if (*lib_query) {
      const int given = (query_label.empty() ? 0 : 1) +
                        (query_cluster_opt->count() > 0 ? 1 : 0) +
                        (query_source.empty() ? 0 : 1);
      if (given != 1)
        throw std::invalid_argument(
            "pass exactly one of --label, --cluster, --source-demo");
      const PrimitiveLibrary lib = PrimitiveLibrary::open(lib_dir);
      std::vector<PrimitiveRecord> matches;
      if (!query_label.empty())
        matches = lib.query_by_label(query_label);
      else if (query_cluster.has_value())
        matches = lib.query_by_cluster(*query_cluster);
      else
        matches = lib.query_by_source_demo(query_source);
      print_table(record_table(matches));
      return 0;
    }
  }
  if (*select) {
    (void)select_cluster_opt;
    return run_select(select_args);
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const empty_selection& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 5;
  } catch (const infeasible_stretching& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 4;
  } catch (const parse_error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const id_collision& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const constraint_conflict& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const library_locked& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const degenerate_init& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 3;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}
