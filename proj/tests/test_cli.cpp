#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <cstdlib>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "primlib/io.hpp"
#include "primlib/trajectory.hpp"
#include "test_util.hpp"

using namespace primlib;

namespace {

std::string binary() {
  const char* path = std::getenv("PRIMLIB_BIN");
  REQUIRE_MESSAGE(path != nullptr, "PRIMLIB_BIN must point at the CLI");
  return path;
}

// Runs the CLI with the given arguments; returns the process exit code.
int run(const std::string& args, const std::string& env = "") {
  const std::string command =
      env + (env.empty() ? "" : " ") + "\"" + binary() + "\" " + args +
      " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

// A demonstration with two sharp corners, written to dir; returns dir.
std::filesystem::path write_corner_demo(const std::filesystem::path& dir,
                                        const std::string& id = "bend") {
  const std::vector<Eigen::Vector2d> corners = {
      {0.0, 0.0}, {0.0, 1.0}, {0.75, 0.4}, {0.1, 0.1}};
  const Demonstration demo(
      id, {{"task", Trajectory(testutil::polyline(corners, {0, 100, 200, 299},
                                                  300),
                               0.1)}});
  write_demonstration_dir(dir, demo);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("help exits cleanly") {
  CHECK(run("--help") == 0);
  CHECK(run("segment --help") == 0);
  CHECK(run("library --help") == 0);
}

TEST_CASE("parameter violations exit 3") {
  testutil::TempDir dir;
  write_corner_demo(dir.path() / "demo");
  const std::string demo = (dir.path() / "demo").string();
  const std::string out = (dir.path() / "out").string();
  CHECK(run("segment " + demo + " --out " + out +
            " --min-seg 8 --window 16") == 3);
  CHECK(run("segment " + demo + " --out " + out + " --mode sideways") == 3);
  CHECK(run("segment " + demo) == 3);  // missing required --out
  CHECK(run("juggle") == 3);           // unknown subcommand
}

TEST_CASE("malformed input exits 2") {
  testutil::TempDir dir;
  std::filesystem::create_directories(dir.path() / "demo");
  write_text(dir.path() / "demo" / "demo.json",
             R"({"id": "broken", "streams": ["task"]})");
  write_text(dir.path() / "demo" / "task.csv", "t,x\n0,0\n0.1,zebra\n");
  CHECK(run("segment " + (dir.path() / "demo").string() + " --out " +
            (dir.path() / "out").string()) == 2);
  CHECK(run("library list --library " + (dir.path() / "nolib").string()) == 2);
}

TEST_CASE("segmenting a corner demo writes segments and a report") {
  testutil::TempDir dir;
  write_corner_demo(dir.path() / "demo");
  const std::string out = (dir.path() / "out").string();
  CHECK(run("segment " + (dir.path() / "demo").string() + " --out " + out +
            " --window 16 --min-seg 64 --threshold 0.16 --seed 4 --plot " +
            out + "/density.svg") == 0);
  CHECK(std::filesystem::exists(dir.path() / "out" / "seg0" / "demo.json"));
  CHECK(std::filesystem::exists(dir.path() / "out" / "seg2" / "task.csv"));
  CHECK_FALSE(std::filesystem::exists(dir.path() / "out" / "seg3"));
  CHECK(std::filesystem::exists(dir.path() / "out" / "keypoints.json"));
  const std::string svg = testutil::slurp(dir.path() / "out" / "density.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("seed 4") != std::string::npos);
  const std::string report =
      testutil::slurp(dir.path() / "out" / "keypoints.json");
  CHECK(report.find("\"seed\": 4") != std::string::npos);
}

TEST_CASE("a constant demo stays whole with exit 0") {
  testutil::TempDir dir;
  Eigen::MatrixXd flat(200, 2);
  flat.setConstant(3.0);
  write_demonstration_dir(dir.path() / "demo",
                          Demonstration("idle", {{"task", Trajectory(flat, 0.1)}}));
  CHECK(run("segment " + (dir.path() / "demo").string() + " --out " +
            (dir.path() / "out").string()) == 0);
  CHECK(std::filesystem::exists(dir.path() / "out" / "seg0"));
  CHECK_FALSE(std::filesystem::exists(dir.path() / "out" / "seg1"));
}

TEST_CASE("clustering with --n 1 puts the node at the feature mean") {
  testutil::TempDir dir;
  FeatureSet features;
  features.data =
      (Eigen::MatrixXd(4, 2) << 0, 0, 1, 0, 0, 1, 1, 1).finished();
  features.ids = {"a", "b", "c", "d"};
  write_features_csv(dir.path() / "features.csv", features);
  CHECK(run("cluster --features " + (dir.path() / "features.csv").string() +
            " --out " + (dir.path() / "out").string() + " --n 1") == 0);
  const ClusterFile result =
      read_cluster_file(dir.path() / "out" / "clusters.json");
  REQUIRE(result.nodes.rows() == 1);
  CHECK(result.nodes(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(result.nodes(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(result.assignments.size() == 4);
}

TEST_CASE("the k-means oracle agrees fully at lambda zero") {
  testutil::TempDir dir;
  std::mt19937_64 rng(15);
  FeatureSet features;
  features.data = testutil::blobs(
      rng, {{0.0, 0.0}, {5.0, 0.0}, {0.0, 5.0}}, {12, 12, 12}, 0.4);
  for (int i = 0; i < 36; ++i) features.ids.push_back("p" + std::to_string(i));
  write_features_csv(dir.path() / "features.csv", features);
  CHECK(run("cluster --features " + (dir.path() / "features.csv").string() +
            " --out " + (dir.path() / "out").string() +
            " --lambda 0 --n 3 --kmeans-oracle --seed 2") == 0);
  const std::string agreement =
      testutil::slurp(dir.path() / "out" / "kmeans_agreement.json");
  CHECK(agreement.find("\"agreement\": 1.0") != std::string::npos);
}

TEST_CASE("auto clustering discovers three blobs and exits 4 when lambda "
          "is hopeless") {
  testutil::TempDir dir;
  std::mt19937_64 rng(19);
  FeatureSet features;
  features.data = testutil::blobs(
      rng, {{0.0, 0.0}, {1.0, 2.0}, {2.0, -1.0}}, {10, 20, 30}, 0.5);
  for (int i = 0; i < 60; ++i) features.ids.push_back("p" + std::to_string(i));
  write_features_csv(dir.path() / "features.csv", features);
  const std::string base = "cluster --features " +
                           (dir.path() / "features.csv").string() + " --out " +
                           (dir.path() / "out").string();
  CHECK(run(base + " --auto --lambda 0.4 --seed 0") == 0);
  const ClusterFile result =
      read_cluster_file(dir.path() / "out" / "clusters.json");
  CHECK(result.nodes.rows() == 3);
  CHECK(result.energy_trace.size() >= 3);

  // A stretch weight beyond any cluster size cannot even fit two nodes.
  CHECK(run(base + "2 --auto --lambda 1000 --seed 0") == 4);
  CHECK(run(base + "3 --n 2 --lambda 1000 --seed 0") == 4);
  // Both --auto and --n, or neither, is a usage error.
  CHECK(run(base + "4 --auto --n 3") == 3);
  CHECK(run(base + "5") == 3);
}

TEST_CASE("the full pipeline runs end to end") {
  testutil::TempDir dir;
  write_corner_demo(dir.path() / "demo");
  const std::string lib = (dir.path() / "lib").string();
  REQUIRE(run("segment " + (dir.path() / "demo").string() + " --out " +
              (dir.path() / "segs").string() + " --seed 1") == 0);
  REQUIRE(run("library add --library " + lib + " --segments " +
              (dir.path() / "segs").string()) == 0);
  REQUIRE(run("featurize --library " + lib + " --out " +
              (dir.path() / "features.csv").string() +
              " --reps bend/seg0,bend/seg2") == 0);
  REQUIRE(run("cluster --features " + (dir.path() / "features.csv").string() +
              " --out " + (dir.path() / "clust").string() +
              " --n 2 --lambda 0 --seed 1") == 0);
  REQUIRE(run("library assign --library " + lib + " --model " +
              (dir.path() / "clust" / "clusters.json").string()) == 0);
  REQUIRE(run("library list --library " + lib) == 0);
  REQUIRE(run("library query --library " + lib + " --source-demo bend") == 0);

  // Labels can be attached and queried.
  write_text(dir.path() / "labels.json",
             R"({"bend/seg0": "reach", "bend/seg1": "press"})");
  // set via add on a fresh library is covered elsewhere; here use query of
  // an absent label on a populated library: empty but exit 0.
  REQUIRE(run("library query --library " + lib + " --label nope") == 0);

  write_text(dir.path() / "constraints.json",
             R"([{"index": 0, "target": [0, 0]},
                 {"index": -1, "target": [0.2, 0.8]}])");
  REQUIRE(run("select --library " + lib + " --cluster 0 --constraints " +
              (dir.path() / "constraints.json").string() + " --out " +
              (dir.path() / "sel").string() + " --top-k 10") == 0);
  CHECK(std::filesystem::exists(dir.path() / "sel" / "selection.json"));

  // Empty pools exit 5.
  CHECK(run("select --library " + lib + " --label nothing --constraints " +
            (dir.path() / "constraints.json").string() + " --out " +
            (dir.path() / "sel2").string()) == 5);

  // Stale model files (unknown ids) exit 2.
  ClusterFile stale;
  stale.nodes = (Eigen::MatrixXd(1, 2) << 0, 0).finished();
  stale.assignments = {{"ghost/seg0", 0}};
  write_cluster_file(dir.path() / "stale.json", stale);
  CHECK(run("library assign --library " + lib + " --model " +
            (dir.path() / "stale.json").string()) == 2);
}

TEST_CASE("identity constraints rank the matching primitive first") {
  testutil::TempDir dir;
  // Two primitives; constraints equal seg0's endpoints exactly.
  write_corner_demo(dir.path() / "demo");
  REQUIRE(run("segment " + (dir.path() / "demo").string() + " --out " +
              (dir.path() / "segs").string()) == 0);
  const std::string lib = (dir.path() / "lib").string();
  REQUIRE(run("library add --library " + lib + " --segments " +
              (dir.path() / "segs").string()) == 0);

  const Demonstration seg0 =
      read_demonstration_dir(dir.path() / "segs" / "seg0");
  const Eigen::MatrixXd& task = seg0.stream("task").samples();
  const Eigen::Index last = task.rows() - 1;
  std::ostringstream constraints;
  constraints << "[{\"index\": 0, \"target\": [" << task(0, 0) << ", "
              << task(0, 1) << "]}, {\"index\": -1, \"target\": ["
              << task(last, 0) << ", " << task(last, 1) << "]}]";
  write_text(dir.path() / "constraints.json", constraints.str());

  // Pool = whole demo via its source; use label-free cluster assignment:
  // assign everything to one cluster first.
  FeatureSet features;
  features.data = (Eigen::MatrixXd(3, 1) << 0, 1, 2).finished();
  features.ids = {"bend/seg0", "bend/seg1", "bend/seg2"};
  write_features_csv(dir.path() / "features.csv", features);
  REQUIRE(run("cluster --features " + (dir.path() / "features.csv").string() +
              " --out " + (dir.path() / "clust").string() +
              " --n 1 --lambda 0") == 0);
  REQUIRE(run("library assign --library " + lib + " --model " +
              (dir.path() / "clust" / "clusters.json").string()) == 0);
  REQUIRE(run("select --library " + lib + " --cluster 0 --constraints " +
              (dir.path() / "constraints.json").string() + " --out " +
              (dir.path() / "sel").string() + " --top-k 3") == 0);

  const std::string selection =
      testutil::slurp(dir.path() / "sel" / "selection.json");
  const auto rank1 = selection.find("\"rank\": 1");
  REQUIRE(rank1 != std::string::npos);
  const auto id_at = selection.find("\"id\": \"bend/seg0\"");
  CHECK(id_at != std::string::npos);
  CHECK(std::filesystem::exists(dir.path() / "sel" / "cand_1_bend_seg0.csv"));
}

TEST_CASE("the seed comes from PRIMLIB_SEED unless --seed overrides it") {
  testutil::TempDir dir;
  write_corner_demo(dir.path() / "demo");
  const std::string demo = (dir.path() / "demo").string();
  const auto keypoints = [&](const std::string& out) {
    return testutil::slurp(dir.path() / out / "keypoints.json");
  };
  REQUIRE(run("segment " + demo + " --out " + (dir.path() / "a").string(),
              "PRIMLIB_SEED=9") == 0);
  REQUIRE(run("segment " + demo + " --out " + (dir.path() / "b").string() +
              " --seed 9") == 0);
  REQUIRE(run("segment " + demo + " --out " + (dir.path() / "c").string() +
              " --seed 9", "PRIMLIB_SEED=5") == 0);
  CHECK(keypoints("a") == keypoints("b"));
  CHECK(keypoints("b") == keypoints("c"));
  CHECK(keypoints("a").find("\"seed\": 9") != std::string::npos);
}
