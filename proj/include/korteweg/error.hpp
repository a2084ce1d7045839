#pragma once

#include <stdexcept>
#include <string>

namespace korteweg {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (e.g. negative density).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Density or argument outside the constitutive working range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Iterative solve failed, time step collapsed, or a CFL bound was violated
/// (CLI exit code 3).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A measured contract (monotone convergence table, uniform bound) does not
/// hold (CLI exit code 4).
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation is not defined for the given input (e.g. the energy/pressure
/// ratio for a quadratic tail).
class NotApplicable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace korteweg
