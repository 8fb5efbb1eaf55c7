#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/heisenberg.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/sphere.hpp"

namespace crsobolev::functions {

using sphere::SpherePoint;
using heisenberg::HeisenbergPoint;

/// A real function on the sphere with the metadata the estimators rely on.
struct TestFunction {
  std::function<double(const SpherePoint&)> evaluator;
  bool is_constant = false;
  bool is_mean_zero = false;
  std::string label;
  /// Lipschitz constant with respect to cr_distance, when known.
  std::optional<double> lipschitz_bound;
  /// Bound on sup |u|, when known.
  std::optional<double> sup_bound;

  double operator()(const SpherePoint& p) const { return evaluator(p); }
};

/// A real function on H^n (typically the Cayley pushforward of a TestFunction).
struct HeisenbergFunction {
  std::function<double(const HeisenbergPoint&)> evaluator;
  std::string label;

  double operator()(const HeisenbergPoint& p) const { return evaluator(p); }
};

/// Bidegree (j, k) of a CR spherical harmonic space H_{j,k}.
struct HarmonicIndex {
  int j = 0;
  int k = 0;
};

inline TestFunction constant(double c) {
  TestFunction f;
  f.evaluator = [c](const SpherePoint&) { return c; };
  f.is_constant = true;
  f.is_mean_zero = (c == 0.0);
  f.label = "constant(" + std::to_string(c) + ")";
  f.lipschitz_bound = 0.0;
  f.sup_bound = std::abs(c);
  return f;
}

/// Real coordinate function xi_i, 1 <= i <= 2n+2.
inline TestFunction coordinate(int n, int i) {
  if (n < 1) throw ArgumentError("coordinate: n must be >= 1");
  if (i < 1 || i > 2 * n + 2) throw ArgumentError("coordinate: index out of range 1..2n+2");
  TestFunction f;
  f.evaluator = [n, i](const SpherePoint& p) {
    if (p.n() != n) throw DimensionMismatch(n, p.n());
    return p.xi(i);
  };
  f.is_mean_zero = true;
  f.label = "xi_" + std::to_string(i);
  // |xi_i - eta_i| <= |xi - eta| <= d(xi, eta)
  f.lipschitz_bound = 1.0;
  f.sup_bound = 1.0;
  return f;
}

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw RangeError("dim_harmonic: integer overflow");
  return r;
}

/// Exact binomial coefficient with overflow detection.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t rr = r / g;
    const std::uint64_t ii = i / g;
    r = checked_mul(rr, num / ii);
  }
  return r;
}

}  // namespace detail

/// dim H_{j,k} = (j+n-1)! (k+n-1)! (j+k+n) / (n! (n-1)! j! k!), computed as
/// C(j+n-1, j) C(k+n-1, k) (j+k+n) / n in exact integer arithmetic.
inline std::uint64_t dim_harmonic(HarmonicIndex idx, int n) {
  if (n < 1) throw ArgumentError("dim_harmonic: n must be >= 1");
  if (idx.j < 0 || idx.k < 0) throw ArgumentError("dim_harmonic: j, k must be >= 0");
  const auto un = static_cast<std::uint64_t>(n);
  const auto uj = static_cast<std::uint64_t>(idx.j);
  const auto uk = static_cast<std::uint64_t>(idx.k);
  const std::uint64_t cj = detail::binomial(uj + un - 1, uj);
  const std::uint64_t ck = detail::binomial(uk + un - 1, uk);
  const std::uint64_t total = uj + uk + un;
  // (j+k+n)/n need not be integral; divide out the common factor first.
  const std::uint64_t g = std::gcd(total, un);
  std::uint64_t rest = un / g;
  std::uint64_t a = cj;
  std::uint64_t b = ck;
  std::uint64_t ga = std::gcd(a, rest);
  a /= ga;
  rest /= ga;
  std::uint64_t gb = std::gcd(b, rest);
  b /= gb;
  rest /= gb;
  if (rest != 1) throw RangeError("dim_harmonic: non-integral intermediate");
  return detail::checked_mul(detail::checked_mul(a, b), total / g);
}

/// Smooth bump exp(-sharpness / (1 - (d/radius)^2)) supported in the CR cap of
/// the given radius.
inline TestFunction cap_bump(const SpherePoint& center, double radius, double sharpness) {
  if (!(radius > 0.0) || !(radius < 2.0)) throw ArgumentError("cap_bump: radius must lie in (0, 2)");
  if (!(sharpness > 0.0)) throw ArgumentError("cap_bump: sharpness must be positive");
  TestFunction f;
  f.evaluator = [center, radius, sharpness](const SpherePoint& p) {
    const double x = sphere::cr_distance(p, center) / radius;
    if (x >= 1.0) return 0.0;
    return std::exp(-sharpness / (1.0 - x * x));
  };
  f.label = "cap_bump(r=" + std::to_string(radius) + ",k=" + std::to_string(sharpness) + ")";
  f.sup_bound = std::exp(-sharpness);
  // Lipschitz in d: max over x in [0,1) of |df/dx| / radius, where
  // df/dx = f(x) * 2 sharpness x / (1 - x^2)^2. Dense scan plus margin for the
  // grid spacing (the profile is smooth and unimodal in x).
  double best = 0.0;
  constexpr int grid = 20000;
  for (int i = 1; i < grid; ++i) {
    const double x = static_cast<double>(i) / grid;
    const double den = 1.0 - x * x;
    const double v = std::exp(-sharpness / den) * 2.0 * sharpness * x / (den * den);
    best = std::max(best, v);
  }
  f.lipschitz_bound = best * 1.01 / radius;
  return f;
}

/// 1 + eps * phi for mean-zero phi with |eps| sup|phi| < 1.
inline TestFunction perturbed_constant(double eps, const TestFunction& phi) {
  if (!phi.is_mean_zero) throw ArgumentError("perturbed_constant: phi must be mean-zero");
  if (!phi.sup_bound) throw ArgumentError("perturbed_constant: phi needs a sup bound to check positivity");
  if (!(std::abs(eps) * *phi.sup_bound < 1.0)) throw ArgumentError("perturbed_constant: 1 + eps*phi must stay positive");
  if (eps == 0.0) return constant(1.0);
  TestFunction f;
  auto ev = phi.evaluator;
  f.evaluator = [ev, eps](const SpherePoint& p) { return 1.0 + eps * ev(p); };
  f.label = "1+" + std::to_string(eps) + "*" + phi.label;
  if (phi.lipschitz_bound) f.lipschitz_bound = std::abs(eps) * *phi.lipschitz_bound;
  f.sup_bound = 1.0 + std::abs(eps) * *phi.sup_bound;
  return f;
}

/// sum_k c_k f_k. Metadata propagates conservatively.
inline TestFunction linear_combination(std::vector<std::pair<double, TestFunction>> terms, std::string label = {}) {
  TestFunction f;
  bool all_const = true;
  bool all_mean_zero = true;
  std::optional<double> lip = 0.0;
  std::optional<double> sup = 0.0;
  std::string auto_label;
  for (const auto& [c, g] : terms) {
    all_const = all_const && (g.is_constant || c == 0.0);
    all_mean_zero = all_mean_zero && (g.is_mean_zero || c == 0.0);
    if (lip && g.lipschitz_bound) *lip += std::abs(c) * *g.lipschitz_bound;
    else if (c != 0.0) lip.reset();
    if (sup && g.sup_bound) *sup += std::abs(c) * *g.sup_bound;
    else if (c != 0.0) sup.reset();
    if (!auto_label.empty()) auto_label += "+";
    auto_label += std::to_string(c) + "*" + g.label;
  }
  f.evaluator = [terms = std::move(terms)](const SpherePoint& p) {
    double s = 0.0;
    for (const auto& [c, g] : terms)
      if (c != 0.0) s += c * g.evaluator(p);
    return s;
  };
  f.is_constant = all_const;
  f.is_mean_zero = all_mean_zero;
  f.lipschitz_bound = lip;
  f.sup_bound = sup;
  f.label = label.empty() ? auto_label : std::move(label);
  return f;
}

inline TestFunction scaled(const TestFunction& u, double lambda) {
  TestFunction f = u;
  auto ev = u.evaluator;
  f.evaluator = [ev, lambda](const SpherePoint& p) { return lambda * ev(p); };
  if (u.lipschitz_bound) f.lipschitz_bound = std::abs(lambda) * *u.lipschitz_bound;
  if (u.sup_bound) f.sup_bound = std::abs(lambda) * *u.sup_bound;
  f.label = std::to_string(lambda) + "*" + u.label;
  return f;
}

inline TestFunction shifted(const TestFunction& u, double c) {
  TestFunction f = u;
  auto ev = u.evaluator;
  f.evaluator = [ev, c](const SpherePoint& p) { return ev(p) + c; };
  f.is_mean_zero = u.is_mean_zero && c == 0.0;
  if (u.sup_bound) f.sup_bound = *u.sup_bound + std::abs(c);
  f.label = u.label + "+" + std::to_string(c);
  return f;
}

/// Monte Carlo estimate of m_2 = int phi^2 dV.
inline Estimate second_moment(const TestFunction& phi, int n, const McConfig& cfg) {
  const double omega = sphere::volume(n).omega;
  const auto avg = sphere::mean([&](const SpherePoint& p) { const double v = phi(p); return v * v; }, n, cfg);
  return {omega * avg.value, omega * avg.std_error, avg.samples, 0.0};
}

/// Product of two functions (used by the cutoff estimate).
inline TestFunction product(const TestFunction& a, const TestFunction& b) {
  TestFunction f;
  auto ea = a.evaluator;
  auto eb = b.evaluator;
  f.evaluator = [ea, eb](const SpherePoint& p) { return ea(p) * eb(p); };
  f.is_constant = a.is_constant && b.is_constant;
  if (a.sup_bound && b.sup_bound) f.sup_bound = *a.sup_bound * *b.sup_bound;
  if (a.sup_bound && b.sup_bound && a.lipschitz_bound && b.lipschitz_bound)
    f.lipschitz_bound = *a.sup_bound * *b.lipschitz_bound + *b.sup_bound * *a.lipschitz_bound;
  f.label = a.label + "*" + b.label;
  return f;
}

/// Fixed cap centers used by the bump families: unit vectors spread over
/// S^{2n+1}, deterministic in n.
inline std::vector<SpherePoint> bump_centers(int n) {
  std::vector<SpherePoint> centers;
  const int dim = 2 * n + 2;
  std::vector<double> a(static_cast<std::size_t>(dim), 0.0);
  a[0] = 1.0;
  centers.emplace_back(a);
  std::vector<double> b(static_cast<std::size_t>(dim), 0.0);
  b[static_cast<std::size_t>(dim - 2)] = 0.6;
  b[1] = 0.8;
  centers.emplace_back(b);
  std::vector<double> c(static_cast<std::size_t>(dim), 0.0);
  for (int i = 0; i < dim; ++i) c[static_cast<std::size_t>(i)] = (i % 2 == 0) ? 1.0 : -0.5;
  centers.emplace_back(c);
  return centers;
}

/// The fixed standard suite: constants, four coordinates, three cap bumps,
/// two perturbed constants and two seeded random degree-one combinations.
inline std::vector<TestFunction> standard_suite(int n, std::uint64_t seed = 2024) {
  std::vector<TestFunction> suite;
  suite.push_back(constant(1.0));
  suite.push_back(constant(-2.5));
  const int dim = 2 * n + 2;
  for (int i = 1; i <= std::min(4, dim); ++i) suite.push_back(coordinate(n, i));
  const auto centers = bump_centers(n);
  suite.push_back(cap_bump(centers[0], 1.2, 1.0));
  suite.push_back(cap_bump(centers[1], 1.0, 0.5));
  suite.push_back(cap_bump(centers[2], 1.5, 1.0));
  suite.push_back(perturbed_constant(0.3, coordinate(n, 1)));
  suite.push_back(perturbed_constant(-0.5, coordinate(n, dim)));
  Stream rng(salted(seed, StreamSalt::suite), 0);
  for (int r = 0; r < 2; ++r) {
    std::vector<std::pair<double, TestFunction>> terms;
    terms.emplace_back(rng.normal(), constant(1.0));
    for (int i = 1; i <= dim; ++i) terms.emplace_back(rng.normal(), coordinate(n, i));
    suite.push_back(linear_combination(std::move(terms), "harmonic_combo_" + std::to_string(r)));
  }
  return suite;
}

/// Smooth (non-constant) members of the standard suite.
inline std::vector<TestFunction> smooth_suite(int n, std::uint64_t seed = 2024) {
  auto all = standard_suite(n, seed);
  std::vector<TestFunction> out;
  for (auto& f : all)
    if (!f.is_constant) out.push_back(std::move(f));
  return out;
}

}  // namespace crsobolev::functions
