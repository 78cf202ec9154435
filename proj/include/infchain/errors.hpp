#pragma once

#include <stdexcept>
#include <string>

namespace infchain {

/// Raised when a requested contraction condition fails at model construction
/// (the summed Lipschitz coefficients reach or exceed 1).
class ContractionViolation : public std::domain_error {
 public:
  explicit ContractionViolation(const std::string& what) : std::domain_error(what) {}
};

/// Raised when a computation produces a non-finite value or fails to converge.
/// Carries the best value obtained so far when one exists.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double best_value = 0.0)
      : std::runtime_error(what), best_value(best_value) {}
  double best_value;
};

/// Raised when a request exceeds the configured resource limits.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the experiment layer for malformed or inconsistent configs.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace infchain
