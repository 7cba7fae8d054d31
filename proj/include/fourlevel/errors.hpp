#pragma once

#include <stdexcept>
#include <string>

namespace fourlevel {

// Precondition violations on library inputs (non-unit quaternions, bad steps, ...).
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A closed-form parameterization divides by zero for the chosen free parameter.
struct SingularParameterization : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No sign/quadrant branch of a closed-form solution reproduces the target.
struct BranchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The coupling-cancellation constraint itself is ill-defined (e.g. sin(theta1) = 0).
struct ConstraintSingularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoSolutionFound : std::runtime_error {
  NoSolutionFound(const std::string& what, double best)
      : std::runtime_error(what), best_residual(best) {}
  double best_residual;
};

struct InvalidHamiltonian : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integration drifted beyond the accepted norm tolerance; more steps are needed.
struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResonanceViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedConfiguration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Cancelled : std::runtime_error {
  Cancelled() : std::runtime_error("propagation cancelled") {}
};

}  // namespace fourlevel
