#pragma once

#include <stdexcept>
#include <string>

namespace sbfa {

// Contract violations: caller passed inputs that break a documented precondition.
struct ContractViolation : std::invalid_argument {
  explicit ContractViolation(const std::string& msg) : std::invalid_argument(msg) {}
};

// Dataset could not be ingested or fails validity checks.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Run configuration is malformed (unknown keys, bad values).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every particle has log-weight -inf: the data is impossible under the whole population.
struct DegeneratePopulation : std::runtime_error {
  explicit DegeneratePopulation(const std::string& msg) : std::runtime_error(msg) {}
};

// HMC pilot chain failed to tune (divergence rate too high).
struct TuningFailure : std::runtime_error {
  explicit TuningFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative approximation (Fisher scoring, VB) failed to produce a usable result.
struct ApproximationFailure : std::runtime_error {
  explicit ApproximationFailure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sbfa
