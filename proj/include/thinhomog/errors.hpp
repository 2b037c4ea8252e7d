// Exception types shared by all thinhomog modules.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace thinhomog {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user-supplied value (profile tables, parameters out of range, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Geometry that cannot be meshed (degenerate columns, inverted elements).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// The strip does not fit inside the domain: eps * h1 >= g0.
class StripOverflowError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Iterative solver ran out of iterations; carries the last residual.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), final_residual(residual) {}
  double final_residual;
};

/// Non-finite value produced inside an iteration.
class BreakdownError : public Error {
 public:
  using Error::Error;
};

/// CG met a direction of non-positive curvature (operator not SPD).
class IndefiniteOperatorError : public Error {
 public:
  using Error::Error;
};

/// Cholesky of a supposedly SPD matrix failed.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Newton line search could not reduce the residual.
class StagnationError : public Error {
 public:
  StagnationError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Neumann-type right-hand side fails the zero-sum compatibility test.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace thinhomog
