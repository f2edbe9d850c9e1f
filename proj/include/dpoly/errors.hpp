#pragma once

#include <stdexcept>
#include <string>

namespace dpoly {

/// Raised when a height sequence or increment string is not a closed
/// nearest-neighbour path.
class InvalidPathError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a state space or matrix would exceed the configured budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solvers (heat kernel truncation, Lanczos, optimizer restarts).
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (odd L, n out
/// of support, negative density).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Two independent computations of the same quantity disagree.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dpoly
