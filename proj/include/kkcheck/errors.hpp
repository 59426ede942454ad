#pragma once

#include <stdexcept>
#include <string>

namespace kkcheck {

/// Malformed or inconsistent input (shape mismatch, invalid parameters).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A frame, vierbein or Jacobian that must be invertible is singular.
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evaluation point outside the chart or group-coordinate domain.
struct DomainError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// An operation precondition does not hold (non-closed fiber, non-closed psi, ...).
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Adaptive integrator step size underflow.
struct StiffnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two independent evaluations of the same identity disagree beyond tolerance.
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kkcheck
