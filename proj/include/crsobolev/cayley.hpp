#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/functions.hpp"
#include "crsobolev/heisenberg.hpp"
#include "crsobolev/random.hpp"
#include "crsobolev/sphere.hpp"

namespace crsobolev::cayley {

using heisenberg::HeisenbergPoint;
using sphere::cplx;
using sphere::SpherePoint;

struct CayleyContext {
  int n = 1;
  SpherePoint south_pole;
  /// Minimum |1 + zeta_{n+1}| accepted by the forward map.
  double pole_guard = 1e-9;

  explicit CayleyContext(int n_, double guard = 1e-9) : n(n_), south_pole(SpherePoint::south(n_)), pole_guard(guard) {
    if (!(pole_guard > 0.0)) throw ArgumentError("CayleyContext: pole_guard must be positive");
  }
};

/// Psi_c(zeta) = (zeta_j / (1 + zeta_{n+1}), Re(i (1 - zeta_{n+1}) / (1 + zeta_{n+1}))).
inline HeisenbergPoint forward(const CayleyContext& ctx, const SpherePoint& zeta) {
  if (zeta.n() != ctx.n) throw DimensionMismatch(ctx.n, zeta.n());
  const int n = ctx.n;
  const cplx last = zeta.w(n);
  const cplx den = 1.0 + last;
  if (std::abs(den) < ctx.pole_guard) throw PoleProximityError("Cayley forward: point within pole_guard of the south pole");
  HeisenbergPoint out(n);
  for (int j = 0; j < n; ++j) {
    const cplx z = zeta.w(j) / den;
    out.x(j) = z.real();
    out.y(j) = z.imag();
  }
  out.t() = (cplx(0.0, 1.0) * (1.0 - last) / den).real();
  return out;
}

/// Psi_c^{-1}(z, t) = (2iz / (t + i(1+|z|^2)), (-t + i(1-|z|^2)) / (t + i(1+|z|^2))).
inline SpherePoint inverse(const HeisenbergPoint& a) {
  const int n = a.n();
  const double r2 = a.z_norm_sq();
  const cplx den(a.t(), 1.0 + r2);
  std::vector<cplx> w(static_cast<std::size_t>(n + 1));
  for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = cplx(0.0, 2.0) * cplx(a.x(j), a.y(j)) / den;
  w[static_cast<std::size_t>(n)] = cplx(-a.t(), 1.0 - r2) / den;
  return SpherePoint::from_complex(w);
}

/// Delta(z, t) = (1 + |z|^2)^2 + t^2.
inline double delta(const HeisenbergPoint& a) {
  const double s = 1.0 + a.z_norm_sq();
  return s * s + a.t() * a.t();
}

/// J_c(z, t) = 2^{2n+1} / Delta^{n+1}.
inline double jacobian(const HeisenbergPoint& a) {
  return std::ldexp(1.0, 2 * a.n() + 1) / std::pow(delta(a), a.n() + 1);
}

/// CR distance between Psi_c^{-1}(a) and Psi_c^{-1}(b), via the closed form
/// 2 rho(a, b) / (Delta(a) Delta(b))^{1/4}. Equivalent to composing inverse()
/// with sphere::cr_distance but free of cancellation near the diagonal.
inline double transported_distance(const HeisenbergPoint& a, const HeisenbergPoint& b) {
  return 2.0 * heisenberg::distance(a, b) / std::pow(delta(a) * delta(b), 0.25);
}

/// K_c(a, b) = J_c(a) J_c(b) / d(Psi^{-1} a, Psi^{-1} b)^{Q + sp}.
inline double kernel(const HeisenbergPoint& a, const HeisenbergPoint& b, double s, double p) {
  heisenberg::require_same_dim(a, b);
  const double d = transported_distance(a, b);
  if (!(d > 0.0)) throw SingularEvaluation("kernel: evaluated on the diagonal");
  const int q = 2 * a.n() + 2;
  return jacobian(a) * jacobian(b) / std::pow(d, q + s * p);
}

/// U = u o Psi_c^{-1}.
inline functions::HeisenbergFunction pushforward(const functions::TestFunction& u) {
  auto ev = u.evaluator;
  return {[ev](const HeisenbergPoint& a) { return ev(inverse(a)); }, "pushforward(" + u.label + ")"};
}

struct PulledValue {
  double value = 0.0;
  bool pole_adjacent = false;
};

/// U o Psi_c at zeta; within pole_guard of S the guarded value 0 is returned
/// and the sample is flagged.
inline PulledValue pullback_eval(const CayleyContext& ctx, const functions::HeisenbergFunction& big_u,
                                 const SpherePoint& zeta) {
  if (std::abs(1.0 + zeta.w(ctx.n)) < ctx.pole_guard) return {0.0, true};
  return {big_u(forward(ctx, zeta)), false};
}

inline functions::TestFunction pullback(const CayleyContext& ctx, const functions::HeisenbergFunction& big_u) {
  functions::TestFunction f;
  f.evaluator = [ctx, big_u](const SpherePoint& zeta) { return pullback_eval(ctx, big_u, zeta).value; };
  f.label = "pullback(" + big_u.label + ")";
  return f;
}

/// Draw from the normalized density J_c / omega on H^n. |z|^2 / (1 + |z|^2)
/// is Beta(n, n+1), the direction of z is uniform, and given z,
/// t = (1 + |z|^2) X / sqrt(2n+1) with X Student-t with 2n+1 degrees of freedom.
inline HeisenbergPoint sample_weighted(int n, Stream& rng) {
  std::gamma_distribution<double> ga(static_cast<double>(n), 1.0);
  std::gamma_distribution<double> gb(static_cast<double>(n + 1), 1.0);
  std::student_t_distribution<double> st(static_cast<double>(2 * n + 1));
  const double g1 = ga(rng);
  const double g2 = gb(rng);
  const double r2 = g1 / g2;  // beta-prime(n, n+1)
  HeisenbergPoint a(n);
  double s = 0.0;
  std::vector<double> dir(static_cast<std::size_t>(2 * n));
  for (double& v : dir) {
    v = rng.normal();
    s += v * v;
  }
  const double scale = std::sqrt(r2 / s);
  for (int j = 0; j < n; ++j) {
    a.x(j) = dir[static_cast<std::size_t>(2 * j)] * scale;
    a.y(j) = dir[static_cast<std::size_t>(2 * j + 1)] * scale;
  }
  a.t() = (1.0 + r2) * st(rng) / std::sqrt(2.0 * n + 1.0);
  return a;
}

}  // namespace crsobolev::cayley
