#include "primlib/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "primlib/errors.hpp"

namespace primlib {

namespace {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw parse_error("cannot open " + path.string() + ": " +
                      std::strerror(errno));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof())
    throw parse_error("failed reading " + path.string());
  return std::move(buffer).str();
}

json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& failure) {
    throw parse_error(path.string() + ": " + failure.what());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_csv_double(const std::string& cell, const std::filesystem::path& path,
                        std::size_t line_number) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(value))
    throw parse_error(path.string() + ":" + std::to_string(line_number) +
                      ": bad numeric value '" + cell + "'");
  return value;
}

/// CSV name fields may not contain separators or newlines.
void check_csv_name(const std::string& name) {
  if (name.empty() || name.find_first_of(",\n\r\"") != std::string::npos)
    throw std::invalid_argument("name not representable in CSV: '" + name + "'");
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::istringstream stream(read_text_file(path));
  std::string line;
  std::size_t line_number = 0;

  if (!std::getline(stream, line))
    throw parse_error(path.string() + ": empty file");
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.front() != "t")
    throw parse_error(path.string() +
                      ": header must be 't,<dim>,...' with at least one "
                      "dimension column");
  const std::vector<std::string> dim_names(header.begin() + 1, header.end());

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(stream, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw parse_error(path.string() + ":" + std::to_string(line_number) +
                        ": expected " + std::to_string(header.size()) +
                        " columns, got " + std::to_string(cells.size()));
    times.push_back(parse_csv_double(cells[0], path, line_number));
    for (std::size_t c = 1; c < cells.size(); ++c)
      values.push_back(parse_csv_double(cells[c], path, line_number));
  }
  const std::size_t rows = times.size();
  const std::size_t dims = dim_names.size();
  if (rows < 2)
    throw parse_error(path.string() + ": needs at least 2 sample rows");

  const double span = times.back() - times.front();
  const double dt = span / static_cast<double>(rows - 1);
  if (!(dt > 0.0))
    throw parse_error(path.string() + ": times must be strictly increasing");
  for (std::size_t i = 1; i < rows; ++i) {
    const double step = times[i] - times[i - 1];
    if (!(step > 0.0))
      throw parse_error(path.string() + ": times must be strictly increasing");
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw parse_error(path.string() +
                        ": times must be uniformly spaced (row " +
                        std::to_string(i + 2) + " deviates)");
  }

  Eigen::MatrixXd samples(rows, dims);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t d = 0; d < dims; ++d)
      samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          values[i * dims + d];
  try {
    return Trajectory(std::move(samples), dt, dim_names);
  } catch (const std::invalid_argument& failure) {
    throw parse_error(path.string() + ": " + failure.what());
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& trajectory) {
  std::string text = "t";
  for (const std::string& name : trajectory.dim_names()) {
    check_csv_name(name);
    text += "," + name;
  }
  text += "\n";
  for (Eigen::Index i = 0; i < trajectory.length(); ++i) {
    text += format_double(static_cast<double>(i) * trajectory.dt());
    for (Eigen::Index d = 0; d < trajectory.dim(); ++d)
      text += "," + format_double(trajectory.samples()(i, d));
    text += "\n";
  }
  atomic_write_file(path, text);
}

Demonstration read_demonstration_dir(const std::filesystem::path& directory) {
  const json meta = parse_json_file(directory / "demo.json");
  if (!meta.contains("id") || !meta["id"].is_string())
    throw parse_error((directory / "demo.json").string() +
                      ": missing string field 'id'");
  if (!meta.contains("streams") || !meta["streams"].is_array())
    throw parse_error((directory / "demo.json").string() +
                      ": missing array field 'streams'");

  std::vector<std::pair<std::string, Trajectory>> streams;
  for (const json& entry : meta["streams"]) {
    if (!entry.is_string())
      throw parse_error((directory / "demo.json").string() +
                        ": stream names must be strings");
    const std::string name = entry.get<std::string>();
    streams.emplace_back(name, read_trajectory_csv(directory / (name + ".csv")));
  }
  try {
    return Demonstration(meta["id"].get<std::string>(), std::move(streams));
  } catch (const std::invalid_argument& failure) {
    throw parse_error(directory.string() + ": " + failure.what());
  }
}

void write_demonstration_dir(const std::filesystem::path& directory,
                             const Demonstration& demo) {
  std::filesystem::create_directories(directory);
  json meta;
  meta["id"] = demo.id();
  meta["samples"] = demo.length();
  json names = json::array();
  for (const auto& [name, trajectory] : demo.streams()) {
    if (name.find_first_of("/\\\n") != std::string::npos || name == "." ||
        name == "..")
      throw std::invalid_argument("stream name not usable as a file name: '" +
                                  name + "'");
    names.push_back(name);
  }
  meta["streams"] = names;
  atomic_write_file(directory / "demo.json", meta.dump(2) + "\n");
  for (const auto& [name, trajectory] : demo.streams())
    write_trajectory_csv(directory / (name + ".csv"), trajectory);
}

FeatureSet read_features_csv(const std::filesystem::path& path) {
  std::istringstream stream(read_text_file(path));
  std::string line;
  std::size_t line_number = 0;

  if (!std::getline(stream, line))
    throw parse_error(path.string() + ": empty file");
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header.front() != "id")
    throw parse_error(path.string() +
                      ": header must be 'id,f0,...' with at least one feature");
  const std::size_t dims = header.size() - 1;

  std::vector<std::string> ids;
  std::vector<double> values;
  while (std::getline(stream, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw parse_error(path.string() + ":" + std::to_string(line_number) +
                        ": expected " + std::to_string(header.size()) +
                        " columns, got " + std::to_string(cells.size()));
    ids.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c)
      values.push_back(parse_csv_double(cells[c], path, line_number));
  }
  if (ids.empty()) throw parse_error(path.string() + ": no feature rows");

  FeatureSet features;
  features.ids = std::move(ids);
  features.data.resize(static_cast<Eigen::Index>(features.ids.size()),
                       static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < features.ids.size(); ++i)
    for (std::size_t d = 0; d < dims; ++d)
      features.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          values[i * dims + d];
  try {
    features.validate();
  } catch (const std::invalid_argument& failure) {
    throw parse_error(path.string() + ": " + failure.what());
  }
  return features;
}

void write_features_csv(const std::filesystem::path& path,
                        const FeatureSet& features) {
  features.validate();
  if (features.ids.empty())
    throw std::invalid_argument("feature rows need ids to be written");
  std::string text = "id";
  for (Eigen::Index d = 0; d < features.dim(); ++d)
    text += ",f" + std::to_string(d);
  text += "\n";
  for (Eigen::Index i = 0; i < features.count(); ++i) {
    check_csv_name(features.ids[static_cast<std::size_t>(i)]);
    text += features.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index d = 0; d < features.dim(); ++d)
      text += "," + format_double(features.data(i, d));
    text += "\n";
  }
  atomic_write_file(path, text);
}

std::vector<EditConstraint> read_constraints_json(
    const std::filesystem::path& path) {
  const json root = parse_json_file(path);
  if (!root.is_array())
    throw parse_error(path.string() + ": expected a JSON array of constraints");
  std::vector<EditConstraint> constraints;
  for (const json& entry : root) {
    if (!entry.is_object() || !entry.contains("index") ||
        !entry.contains("target"))
      throw parse_error(path.string() +
                        ": each constraint needs 'index' and 'target'");
    if (!entry["index"].is_number_integer())
      throw parse_error(path.string() + ": constraint 'index' must be an integer");
    if (!entry["target"].is_array() || entry["target"].empty())
      throw parse_error(path.string() +
                        ": constraint 'target' must be a non-empty array");
    EditConstraint constraint;
    constraint.sample_index = entry["index"].get<long long>();
    constraint.target.resize(static_cast<Eigen::Index>(entry["target"].size()));
    Eigen::Index d = 0;
    for (const json& coordinate : entry["target"]) {
      if (!coordinate.is_number())
        throw parse_error(path.string() + ": target coordinates must be numbers");
      constraint.target(d++) = coordinate.get<double>();
    }
    if (entry.contains("weight")) {
      if (!entry["weight"].is_number())
        throw parse_error(path.string() + ": constraint 'weight' must be a number");
      constraint.weight = entry["weight"].get<double>();
    }
    constraints.push_back(std::move(constraint));
  }
  if (constraints.empty())
    throw parse_error(path.string() + ": constraint list is empty");
  return constraints;
}

std::map<std::string, std::string> read_labels_json(
    const std::filesystem::path& path) {
  const json root = parse_json_file(path);
  if (!root.is_object())
    throw parse_error(path.string() + ": expected a JSON object of id -> label");
  std::map<std::string, std::string> labels;
  for (const auto& [id, label] : root.items()) {
    if (!label.is_string())
      throw parse_error(path.string() + ": label for '" + id +
                        "' must be a string");
    labels[id] = label.get<std::string>();
  }
  return labels;
}

ClusterFile read_cluster_file(const std::filesystem::path& path) {
  const json root = parse_json_file(path);
  const auto require = [&](const char* key) -> const json& {
    if (!root.contains(key))
      throw parse_error(path.string() + ": missing field '" + key + "'");
    return root[key];
  };
  ClusterFile file;
  file.seed = require("seed").get<std::uint64_t>();
  file.lambda = require("lambda").get<double>();
  const json& energies = require("energies");
  file.u_x = energies.at("approximation").get<double>();
  file.u_e = energies.at("stretching").get<double>();

  const json& nodes = require("nodes");
  if (!nodes.is_array() || nodes.empty())
    throw parse_error(path.string() + ": 'nodes' must be a non-empty array");
  const std::size_t dim = nodes.front().size();
  file.nodes.resize(static_cast<Eigen::Index>(nodes.size()),
                    static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].is_array() || nodes[i].size() != dim)
      throw parse_error(path.string() + ": ragged 'nodes' rows");
    for (std::size_t d = 0; d < dim; ++d)
      file.nodes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          nodes[i][d].get<double>();
  }

  for (const json& entry : require("assignments")) {
    if (!entry.contains("id") || !entry.contains("cluster"))
      throw parse_error(path.string() +
                        ": each assignment needs 'id' and 'cluster'");
    file.assignments.emplace_back(entry["id"].get<std::string>(),
                                  entry["cluster"].get<int>());
  }
  if (root.contains("per_n_energy_trace"))
    for (const json& entry : root["per_n_energy_trace"])
      file.energy_trace.emplace_back(entry.at("n").get<int>(),
                                     entry.at("best_energy").get<double>());
  return file;
}

void write_cluster_file(const std::filesystem::path& path, const ClusterFile& file) {
  json root;
  root["seed"] = file.seed;
  root["lambda"] = file.lambda;
  root["n_clusters"] = file.nodes.rows();
  root["energies"] = {{"approximation", file.u_x},
                      {"stretching", file.u_e},
                      {"total", file.u_x + file.u_e}};
  json nodes = json::array();
  for (Eigen::Index i = 0; i < file.nodes.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index d = 0; d < file.nodes.cols(); ++d)
      row.push_back(file.nodes(i, d));
    nodes.push_back(std::move(row));
  }
  root["nodes"] = std::move(nodes);
  json assignments = json::array();
  for (const auto& [id, cluster] : file.assignments)
    assignments.push_back({{"id", id}, {"cluster", cluster}});
  root["assignments"] = std::move(assignments);
  json trace = json::array();
  for (const auto& [n, energy] : file.energy_trace)
    trace.push_back({{"n", n}, {"best_energy", energy}});
  root["per_n_energy_trace"] = std::move(trace);
  atomic_write_file(path, root.dump(2) + "\n");
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open " + temp.string() + " for writing");
    out << content;
    if (!out.good())
      throw std::runtime_error("failed writing " + temp.string());
  }
  std::filesystem::rename(temp, path);
}

}  // namespace primlib
