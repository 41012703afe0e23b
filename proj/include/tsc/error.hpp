#pragma once

#include <stdexcept>
#include <string>

namespace tsc {

/// Malformed network, route, config or dataset input.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical precondition violated (e.g. non-positive IDM gap).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Shape or wiring mismatch inside the autodiff engine or networks.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values surfaced during training or inference. `snapshot` names
/// the checkpoint written before halting, when there is one.
class TrainingFault : public std::runtime_error {
 public:
  TrainingFault(const std::string& what, std::string snapshot = {})
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const std::string& snapshot() const noexcept { return snapshot_; }

 private:
  std::string snapshot_;
};

/// Rollout data that cannot have been produced by the recorded policy.
class DataCorruption : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsc
