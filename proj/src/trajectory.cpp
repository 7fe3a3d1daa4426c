#include "primlib/trajectory.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "primlib/trajcore.hpp"

namespace primlib {

Trajectory::Trajectory(Eigen::MatrixXd samples, double dt,
                       std::vector<std::string> dim_names)
    : samples_(std::move(samples)), dt_(dt), dim_names_(std::move(dim_names)) {
  if (samples_.rows() < 2)
    throw std::invalid_argument("trajectory needs at least 2 samples, got " +
                                std::to_string(samples_.rows()));
  if (samples_.cols() < 1)
    throw std::invalid_argument("trajectory needs at least 1 dimension");
  if (!samples_.allFinite())
    throw std::invalid_argument("trajectory samples must all be finite");
  if (!(dt_ > 0.0) || !std::isfinite(dt_))
    throw std::invalid_argument("trajectory sample period must be positive");

  if (dim_names_.empty()) {
    dim_names_.reserve(static_cast<std::size_t>(samples_.cols()));
    for (Eigen::Index d = 0; d < samples_.cols(); ++d)
      dim_names_.push_back("d" + std::to_string(d));
  }
  if (std::ssize(dim_names_) != samples_.cols())
    throw std::invalid_argument("dimension name count does not match data columns");
  std::unordered_set<std::string> seen;
  for (const auto& name : dim_names_)
    if (!seen.insert(name).second)
      throw std::invalid_argument("duplicate dimension name: " + name);
}

Demonstration::Demonstration(std::string id,
                             std::vector<std::pair<std::string, Trajectory>> streams)
    : id_(std::move(id)), streams_(std::move(streams)) {
  if (id_.empty()) throw std::invalid_argument("demonstration id must be non-empty");
  if (streams_.empty())
    throw std::invalid_argument("demonstration needs at least one stream");
  std::unordered_set<std::string> seen;
  Eigen::Index longest = 0;
  for (const auto& [name, trajectory] : streams_) {
    if (name.empty()) throw std::invalid_argument("stream name must be non-empty");
    if (!seen.insert(name).second)
      throw std::invalid_argument("duplicate stream name: " + name);
    longest = std::max(longest, trajectory.length());
  }
  for (auto& [name, trajectory] : streams_)
    if (trajectory.length() != longest) trajectory = resample(trajectory, longest);
}

bool Demonstration::has_stream(const std::string& name) const noexcept {
  return std::any_of(streams_.begin(), streams_.end(),
                     [&](const auto& entry) { return entry.first == name; });
}

const Trajectory& Demonstration::stream(const std::string& name) const {
  for (const auto& [stream_name, trajectory] : streams_)
    if (stream_name == name) return trajectory;
  throw std::invalid_argument("no stream named '" + name + "' in demonstration '" +
                              id_ + "'");
}

}  // namespace primlib
