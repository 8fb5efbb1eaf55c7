#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "crsobolev/errors.hpp"

namespace crsobolev::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 61-point Gauss-Kronrod on [a, b] (infinite endpoints allowed).
/// Throws NumericError when the error estimate exceeds `abs_tol` plus a
/// relative allowance of `rel_tol * |value|`.
template <class F>
Result gauss_kronrod(F&& f, double a, double b, double abs_tol, double rel_tol = 1e-12,
                     unsigned max_depth = 30) {
  Result r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, max_depth, rel_tol, &r.error, &l1);
  if (!(r.error <= abs_tol + rel_tol * std::abs(r.value)) || !std::isfinite(r.value))
    throw NumericError("Gauss-Kronrod quadrature did not converge", r.error);
  return r;
}

/// Double-exponential rule for integrands with endpoint singularities.
template <class F>
Result tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-10) {
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  Result r;
  double l1 = 0.0;
  r.value = rule.integrate(f, a, b, rel_tol, &r.error, &l1);
  if (!std::isfinite(r.value) || r.error > 1e3 * rel_tol * std::max(1.0, l1))
    throw NumericError("tanh-sinh quadrature did not converge", r.error);
  return r;
}

}  // namespace crsobolev::quadrature
