#pragma once

#include <stdexcept>
#include <string>

namespace cmjlab {

/// Bad user-supplied parameter or configuration value. Message names the field.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A numerical routine failed to meet its tolerance contract.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An estimator refused to produce a result it cannot stand behind
/// (e.g. too many truncated replicas, horizon too short).
class ReliabilityError : public std::runtime_error {
 public:
  explicit ReliabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Internal cross-check failed; indicates inconsistent inputs (e.g. a
/// discount factor >= 1 computed from a rate that is not a valid root).
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cmjlab
