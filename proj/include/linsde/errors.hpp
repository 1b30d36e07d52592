#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace linsde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not conform (non-square where square is required,
/// mismatched lengths, empty operands).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or initial state. `field()` names the offending entry
/// using a JSON-like path such as `B[1][0][2]` or `P0`.
class ModelError : public Error {
 public:
  ModelError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Numerical failure while evaluating moments (non-finite values,
/// overflow in the matrix exponential, RK4 blow-up).
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// The exponential-action iteration did not reach the requested tolerance.
class ConvergenceError : public ComputationError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : ComputationError(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace linsde
