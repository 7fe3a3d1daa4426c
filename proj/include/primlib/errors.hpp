#pragma once

#include <stdexcept>
#include <string>

namespace primlib {

/// Malformed or semantically invalid input data (files, ids, labels).
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

/// The node-coupling system of an elastic fit is not positive definite:
/// the stretch weight is too large for the current cluster occupancies.
class infeasible_stretching : public std::runtime_error {
 public:
  infeasible_stretching(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}

  /// Estimated smallest eigenvalue of the offending system matrix.
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Fewer distinct data rows than requested cluster nodes.
class degenerate_init : public std::runtime_error {
 public:
  explicit degenerate_init(const std::string& what) : std::runtime_error(what) {}
};

/// Two edit constraints pin the same sample to different targets.
class constraint_conflict : public std::runtime_error {
 public:
  explicit constraint_conflict(const std::string& what) : std::runtime_error(what) {}
};

/// A primitive id being added already exists in the library.
class id_collision : public std::runtime_error {
 public:
  explicit id_collision(const std::string& what) : std::runtime_error(what) {}
};

/// Another writer currently holds the library lock.
class library_locked : public std::runtime_error {
 public:
  explicit library_locked(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace primlib
