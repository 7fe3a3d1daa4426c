#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace primlib {

/// A uniformly sampled multi-dimensional trajectory.
///
/// Samples are stored row-major in time: row i is the configuration at
/// time i * dt. Invariants (enforced at construction):
///   - at least 2 samples and 1 dimension,
///   - every sample finite,
///   - dt > 0,
///   - dimension names unique and of matching count.
class Trajectory {
 public:
  Trajectory(Eigen::MatrixXd samples, double dt,
             std::vector<std::string> dim_names = {});

  const Eigen::MatrixXd& samples() const noexcept { return samples_; }
  double dt() const noexcept { return dt_; }
  const std::vector<std::string>& dim_names() const noexcept { return dim_names_; }

  Eigen::Index length() const noexcept { return samples_.rows(); }
  Eigen::Index dim() const noexcept { return samples_.cols(); }
  double duration() const noexcept {
    return dt_ * static_cast<double>(samples_.rows() - 1);
  }

 private:
  Eigen::MatrixXd samples_;
  double dt_;
  std::vector<std::string> dim_names_;
};

/// A set of named trajectory streams recorded over the same time span.
///
/// Streams arriving with different lengths are resampled on ingest to the
/// longest stream's sample count, so length() is well defined afterwards.
/// Invariants: non-empty id, at least one stream, unique stream names.
class Demonstration {
 public:
  Demonstration(std::string id,
                std::vector<std::pair<std::string, Trajectory>> streams);

  const std::string& id() const noexcept { return id_; }
  const std::vector<std::pair<std::string, Trajectory>>& streams() const noexcept {
    return streams_;
  }

  /// Common sample count of every stream.
  Eigen::Index length() const noexcept { return streams_.front().second.length(); }
  std::size_t stream_count() const noexcept { return streams_.size(); }

  bool has_stream(const std::string& name) const noexcept;
  /// Throws std::invalid_argument if no stream has that name.
  const Trajectory& stream(const std::string& name) const;

 private:
  std::string id_;
  std::vector<std::pair<std::string, Trajectory>> streams_;
};

}  // namespace primlib
