#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twophase {

/// A state, argument, or derived quantity left the set where the operation is defined.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A caller-side precondition (CFL bound, resolution, ordering) does not hold.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// F/F Riemann data carry no nontrivial middle state.
class NoMiddleStateError : public DomainError {
public:
  using DomainError::DomainError;
};

/// A fixed-step integration step could not keep the headway invariant, even after halving.
class StepTooLargeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Macroscopic datum cannot be tiled by the car-placement construction.
class DatumInconsistentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Collected scenario parse failures, each prefixed with "<source>:<line>: ".
class ScenarioError : public std::runtime_error {
public:
  explicit ScenarioError(std::vector<std::string> messages);

  const std::vector<std::string>& messages() const noexcept { return messages_; }

private:
  std::vector<std::string> messages_;
};

}  // namespace twophase
