#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/random.hpp"
#include "crsobolev/report.hpp"

namespace crsobolev::lab {

/// Phi(t) = (sum_i w |1 + t v_i|^q)^{2/q} for a discrete measure with equal
/// weights w = omega / N.
class DiscretePhi {
 public:
  DiscretePhi(double q, std::vector<double> v, double omega) : q_(q), v_(std::move(v)), omega_(omega) {
    if (!(q >= 2.0)) throw ArgumentError("scalar_phi_check: q must be >= 2");
    if (v_.empty()) throw ArgumentError("scalar_phi_check: empty sample vector");
    w_ = omega_ / static_cast<double>(v_.size());
  }

  /// Centres v to mean zero and scales it to unit L^q norm (unless v = 0).
  void normalize() {
    double mean = 0.0;
    for (double x : v_) mean += x;
    mean /= static_cast<double>(v_.size());
    for (double& x : v_) x -= mean;
    double s = 0.0;
    for (double x : v_) s += w_ * std::pow(std::abs(x), q_);
    if (s > 0.0) {
      const double inv = 1.0 / std::pow(s, 1.0 / q_);
      for (double& x : v_) x *= inv;
    }
  }

  double integral(double t) const {
    double s = 0.0;
    for (double x : v_) s += w_ * std::pow(std::abs(1.0 + t * x), q_);
    return s;
  }
  double operator()(double t) const { return std::pow(integral(t), 2.0 / q_); }

  /// Closed-form Phi''(t).
  double second_derivative(double t) const {
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    for (double x : v_) {
      const double a = 1.0 + t * x;
      const double aa = std::abs(a);
      i0 += w_ * std::pow(aa, q_);
      i1 += w_ * std::pow(aa, q_ - 2.0) * a * x;
      i2 += w_ * std::pow(aa, q_ - 2.0) * x * x;
    }
    return 2.0 * q_ * (2.0 / q_ - 1.0) * std::pow(i0, 2.0 / q_ - 2.0) * i1 * i1 +
           2.0 * (q_ - 1.0) * std::pow(i0, 2.0 / q_ - 1.0) * i2;
  }

  const std::vector<double>& v() const { return v_; }
  double q() const { return q_; }

 private:
  double q_;
  std::vector<double> v_;
  double omega_;
  double w_ = 0.0;
};

/// Step for the second difference; the difference quotient is a local average
/// of Phi'' so it obeys the same bound, and rounding stays near 1e-11.
inline constexpr double phi_fd_step = 1e-2;

struct PhiCheck {
  double phi0_error = 0.0;
  double dphi0 = 0.0;
  double max_fd_excess = -std::numeric_limits<double>::infinity();
  double max_exact_excess = -std::numeric_limits<double>::infinity();
};

inline PhiCheck check_phi(const DiscretePhi& phi, double omega, const std::vector<double>& t_grid) {
  PhiCheck c;
  const double q = phi.q();
  c.phi0_error = std::abs(phi(0.0) - std::pow(omega, 2.0 / q)) / std::pow(omega, 2.0 / q);
  constexpr double h1 = 1e-5;
  c.dphi0 = (phi(h1) - phi(-h1)) / (2.0 * h1);
  const double bound = 2.0 * (q - 1.0);
  const double h = phi_fd_step;
  for (double t : t_grid) {
    const double fd = (phi(t + h) - 2.0 * phi(t) + phi(t - h)) / (h * h);
    c.max_fd_excess = std::max(c.max_fd_excess, fd - bound);
    c.max_exact_excess = std::max(c.max_exact_excess, phi.second_derivative(t) - bound);
  }
  return c;
}

/// Checks Phi(0) = omega^{2/q}, Phi'(0) = 0 and Phi'' <= 2(q-1) on t_grid for
/// the sample vector v (normalized to mean zero and unit q-norm first).
inline ExperimentReport scalar_phi_check(double q, std::vector<double> v, const std::vector<double>& t_grid,
                                         double omega) {
  DiscretePhi phi(q, std::move(v), omega);
  phi.normalize();
  const PhiCheck c = check_phi(phi, omega, t_grid);
  ExperimentReport rep("scalar-phi-check");
  rep.params = {{"q", q}, {"points", phi.v().size()}, {"t_grid", t_grid}};
  rep.analytic("phi0_rel_error", c.phi0_error);
  rep.analytic("dphi0", c.dphi0);
  rep.analytic("max_fd_excess", c.max_fd_excess);
  rep.analytic("max_exact_excess", c.max_exact_excess);
  rep.check("phi0", c.phi0_error <= 1e-12);
  rep.check("dphi0_zero", std::abs(c.dphi0) <= 1e-6);
  rep.check("phi_second_derivative_bound", c.max_fd_excess <= 1e-9 && c.max_exact_excess <= 1e-9);
  return rep;
}

/// ||u||_q^2 - omega^{2/q} ubar^2 - (q-1) ||u - ubar||_q^2 for a discrete u
/// with equal weights omega/N. Non-positive when the inequality holds.
inline double q_ge_2_excess(double q, const std::vector<double>& u, double omega) {
  const double w = omega / static_cast<double>(u.size());
  double mean = 0.0;
  for (double x : u) mean += x;
  mean /= static_cast<double>(u.size());
  double a = 0.0, b = 0.0;
  for (double x : u) {
    a += w * std::pow(std::abs(x), q);
    b += w * std::pow(std::abs(x - mean), q);
  }
  return std::pow(a, 2.0 / q) - std::pow(omega, 2.0 / q) * mean * mean - (q - 1.0) * std::pow(b, 2.0 / q);
}

/// F(t) = (|1+t|^q - 1 - qt) / |t|^q.
inline double scalar_F(double q, double t) {
  return (std::pow(std::abs(1.0 + t), q) - 1.0 - q * t) / std::pow(std::abs(t), q);
}

/// C_q = sup F over a log grid with 1e4 points per sign on |t| in [1e-8, 1e8],
/// refined by golden-section search around the best grid point, together with
/// the limits F -> 0 (t -> 0) and F -> 1 (|t| -> inf).
inline double scalar_F_sup(double q) {
  if (!(q > 1.0 && q < 2.0)) throw ArgumentError("scalar_F_sup: q must lie in (1, 2)");
  constexpr int per_sign = 10000;
  const double lo = std::log(1e-8);
  const double hi = std::log(1e8);
  double best = 1.0;  // the limit at infinity
  double best_lt = 0.0;
  int best_sign = 0;
  const double dl = (hi - lo) / (per_sign - 1);
  for (int sgn : {-1, 1}) {
    for (int i = 0; i < per_sign; ++i) {
      const double lt = lo + i * dl;
      const double t = sgn * std::exp(lt);
      const double f = scalar_F(q, t);
      if (f > best) {
        best = f;
        best_lt = lt;
        best_sign = sgn;
      }
    }
  }
  if (best_sign != 0) {
    // Golden section on log|t| within one grid cell either side.
    double a = best_lt - dl;
    double b = best_lt + dl;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double lt) { return scalar_F(q, best_sign * std::exp(lt)); };
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = f(d);
      }
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

/// |a+b|^q - |a|^q - q|a|^{q-1} sgn(a) b - C |b|^q.
inline double q_lt_2_excess(double q, double c_q, double a, double b) {
  const double sgn = a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  return std::pow(std::abs(a + b), q) - std::pow(std::abs(a), q) - q * std::pow(std::abs(a), q - 1.0) * sgn * b -
         c_q * std::pow(std::abs(b), q);
}

/// (x+y)^p - (1+tau)^{p-1} x^p - (1+1/tau)^{p-1} y^p.
inline double young_excess(double p, double tau, double x, double y) {
  return std::pow(x + y, p) - std::pow(1.0 + tau, p - 1.0) * std::pow(x, p) -
         std::pow(1.0 + 1.0 / tau, p - 1.0) * std::pow(y, p);
}

struct SuiteCount {
  std::int64_t instances = 0;
  std::int64_t violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();

  void add(double excess, double tol) {
    ++instances;
    max_excess = std::max(max_excess, excess);
    if (excess > tol) ++violations;
  }
};

struct ScalarSuiteResult {
  SuiteCount q_ge_2;
  SuiteCount phi_fd;
  SuiteCount q_lt_2;
  SuiteCount young;
  std::vector<std::pair<double, double>> c_q;  // (q, C_q)
};

/// Randomized property suites for the scalar inequalities. Each suite draws
/// `instances` cases from streams derived from `seed`.
inline ScalarSuiteResult scalar_suites(std::int64_t instances, std::uint64_t seed, double omega,
                                       double tol = 1e-9) {
  ScalarSuiteResult res;
  // q >= 2: random discrete u and random Phi second differences.
  for (std::int64_t i = 0; i < instances; ++i) {
    Stream rng(seed ^ 0xA1ULL, static_cast<std::uint64_t>(i));
    const double q = 2.0 + 6.0 * rng.uniform();
    const int m = 2 + static_cast<int>(rng.uniform() * 23);
    std::vector<double> u(static_cast<std::size_t>(m));
    const double offset = 2.0 * rng.normal();
    for (double& x : u) x = offset + rng.normal();
    res.q_ge_2.add(q_ge_2_excess(q, u, omega), tol);

    DiscretePhi phi(q, u, omega);
    phi.normalize();
    const double t = 6.0 * rng.uniform() - 3.0;
    const double h = phi_fd_step;
    const double fd = (phi(t + h) - 2.0 * phi(t) + phi(t - h)) / (h * h);
    res.phi_fd.add(fd - 2.0 * (q - 1.0), tol);
  }
  // 1 < q < 2 with computed C_q on a fixed set of exponents.
  const std::vector<double> qs = {1.1, 1.25, 1.5, 1.75, 1.9};
  for (double q : qs) res.c_q.emplace_back(q, scalar_F_sup(q));
  for (std::int64_t i = 0; i < instances; ++i) {
    Stream rng(seed ^ 0xB2ULL, static_cast<std::uint64_t>(i));
    const auto& [q, c] = res.c_q[static_cast<std::size_t>(i) % res.c_q.size()];
    const double a = rng.normal();
    const double b = (rng.uniform() < 0.5 ? 1.0 : 3.0) * rng.normal();
    res.q_lt_2.add(q_lt_2_excess(q, c, a, b), tol);
  }
  // Weighted Young.
  for (std::int64_t i = 0; i < instances; ++i) {
    Stream rng(seed ^ 0xC3ULL, static_cast<std::uint64_t>(i));
    const double p = 1.0 + 5.0 * rng.uniform();
    const double x = 3.0 * rng.uniform();
    const double y = 3.0 * rng.uniform();
    // Half the draws sit at the equality point tau = y/x.
    double tau = std::exp(14.0 * rng.uniform() - 7.0);
    if (rng.uniform() < 0.5 && x > 0.0 && y > 0.0) tau = y / x;
    res.young.add(young_excess(p, tau, x, y), tol);
  }
  return res;
}

inline ExperimentReport scalar_lemmas_report(std::int64_t instances, std::uint64_t seed, double omega,
                                             double tol = 1e-9) {
  const auto r = scalar_suites(instances, seed, omega, tol);
  ExperimentReport rep("scalar-lemmas");
  rep.params = {{"instances", instances}, {"seed", seed}, {"tolerance", tol}};
  auto add = [&](const std::string& name, const SuiteCount& c) {
    rep.analytic(name + "_max_excess", c.max_excess);
    rep.analytic(name + "_violations", static_cast<double>(c.violations));
    rep.check(name, c.violations == 0 && c.instances >= instances,
              std::to_string(c.violations) + " violations in " + std::to_string(c.instances));
  };
  for (const auto& [q, c] : r.c_q) rep.analytic("C_q(" + std::to_string(q).substr(0, 4) + ")", c);
  add("q_ge_2_inequality", r.q_ge_2);
  add("phi_second_difference_bound", r.phi_fd);
  add("q_lt_2_inequality", r.q_lt_2);
  add("weighted_young", r.young);
  return rep;
}

}  // namespace crsobolev::lab
