#pragma once

#include <stdexcept>
#include <string>

namespace crsobolev {

/// Invalid argument to an operation (bad exponent, non-positive radius, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two points or functions that must share the complex dimension n do not.
class DimensionMismatch : public ArgumentError {
 public:
  DimensionMismatch(int expected, int got)
      : ArgumentError("dimension mismatch: expected n=" + std::to_string(expected) +
                      ", got n=" + std::to_string(got)) {}
};

/// Cayley transform evaluated too close to the south pole.
class PoleProximityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Kernel evaluated on the diagonal.
class SingularEvaluation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature or iteration did not reach the requested tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Estimator configuration is inconsistent with the input (e.g. cutoff without a Lipschitz bound).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact integer result does not fit the integer width.
class RangeError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Input for which the requested quantity is 0/0 (e.g. Poincare ratio of a constant).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace crsobolev
