#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/functions.hpp"
#include "crsobolev/heisenberg.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/report.hpp"

namespace crsobolev::heisenberg {

/// Explicit local Poincare constant 2^{Q+sp} / |B_1(0)|.
inline double local_poincare_constant(int n, double s, double p) {
  const int q = 2 * n + 2;
  return std::pow(2.0, q + s * p) / unit_ball_volume(n);
}

/// Monte Carlo check of
///   int_B |U - (U)_B|^p  <=  C r^{sp} int_B int_B |U(xi) - U(eta)|^p / rho^{Q+sp}
/// on B = B_r(center). The mean (U)_B comes from an independent run.
inline ExperimentReport local_poincare_check(const functions::HeisenbergFunction& big_u, double r,
                                             const HeisenbergPoint& center, double s, double p,
                                             const McConfig& cfg) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ArgumentError("local_poincare_check: r must be positive");
  if (!(p >= 1.0)) throw ArgumentError("local_poincare_check: p must be >= 1");
  if (!(s > 0.0 && s < 1.0)) throw ArgumentError("local_poincare_check: s must lie in (0, 1)");
  const int n = center.n();
  const int q = 2 * n + 2;
  cfg.validate(q);

  const double ball = unit_ball_volume(n) * std::pow(r, q);
  const double constant = local_poincare_constant(n, s, p);
  const double exponent = q + s * p;
  const LocalGaugeProposal local(n, cfg.beta(q));
  const double r_max = 2.0 * r;
  const std::uint64_t seed = salted(cfg.seed, StreamSalt::heisenberg);

  auto uniform_in_ball = [&](Stream& rng) { return group_law(center, dilate(r, sample_unit_ball(n, rng))); };

  // (U)_B
  const auto mean_table = run_batches(cfg, seed ^ 0x1ULL, 1, [&](Stream& rng, std::span<double> out) {
    out[0] = big_u(uniform_in_ball(rng));
  });
  const Estimate mean = mean_table.component(0);

  // [0] |B| |U - mean|^p, [1] pair integrand / proposal density
  const auto table = run_batches(cfg, seed, 2, [&](Stream& rng, std::span<double> out) {
    const HeisenbergPoint xi = uniform_in_ball(rng);
    const double u_xi = big_u(xi);
    out[0] = ball * std::pow(std::abs(u_xi - mean.value), p);
    HeisenbergPoint eta;
    double g = 0.0;
    if (rng.uniform() < 0.5) {
      eta = uniform_in_ball(rng);
      g = koranyi_gauge(group_law(group_inverse(xi), eta));
    } else {
      const HeisenbergPoint h = local.sample(rng, r_max);
      g = koranyi_gauge(h);
      eta = group_law(xi, h);
    }
    if (!(distance(eta, center) < r) || !(g > 0.0)) return;
    const double mix = 0.5 / ball + 0.5 * local.density_at_gauge(g, r_max);
    out[1] = ball / mix * std::pow(std::abs(u_xi - big_u(eta)), p) * std::pow(g, -exponent);
  });

  const Estimate lhs = table.component(0);
  const Estimate rhs = table.component(1);
  const double factor = constant * std::pow(r, s * p);
  const double bound = factor * rhs.value;
  const double slack = bound - lhs.value;
  const double slack_se = std::hypot(lhs.std_error, factor * rhs.std_error);

  ExperimentReport rep("local-poincare");
  rep.params = {{"n", n}, {"s", s}, {"p", p}, {"r", r}, {"center", std::vector<double>(center.flat().begin(), center.flat().end())},
                {"function", big_u.label}, {"samples", cfg.samples}, {"seed", cfg.seed}};
  rep.quadrature("ball_volume", ball, 0.0);
  rep.analytic("constant", constant);
  rep.monte_carlo("ball_mean", mean);
  rep.monte_carlo("lhs", lhs);
  rep.monte_carlo("rhs_double_integral", rhs);
  rep.monte_carlo("slack", {slack, slack_se, cfg.samples, 0.0});
  // A constant U gives 0 <= 0.
  const bool pass = slack >= -3.0 * slack_se;
  rep.check("local_poincare", pass,
            "C r^{sp} RHS - LHS = " + std::to_string(slack) + " (se " + std::to_string(slack_se) + ")");
  return rep;
}

/// Ten fixed smooth functions on H^n used for the local Poincare suite.
inline std::vector<functions::HeisenbergFunction> smooth_heisenberg_suite(int n) {
  using functions::HeisenbergFunction;
  std::vector<HeisenbergFunction> out;
  out.push_back({[](const HeisenbergPoint& a) { return a.t(); }, "t"});
  out.push_back({[](const HeisenbergPoint& a) { return a.x(0); }, "x1"});
  out.push_back({[](const HeisenbergPoint& a) { return a.y(0); }, "y1"});
  out.push_back({[](const HeisenbergPoint& a) { return a.z_norm_sq(); }, "|z|^2"});
  out.push_back({[](const HeisenbergPoint& a) { return a.x(0) * a.t(); }, "x1*t"});
  out.push_back({[](const HeisenbergPoint& a) {
                   const double g = koranyi_gauge(a);
                   return std::exp(-g * g * g * g);
                 },
                 "exp(-gauge^4)"});
  out.push_back({[](const HeisenbergPoint& a) { return std::sin(a.x(0)) + std::cos(a.t()); }, "sin(x1)+cos(t)"});
  out.push_back({[](const HeisenbergPoint& a) { return a.x(0) * a.y(0); }, "x1*y1"});
  out.push_back({[n](const HeisenbergPoint& a) {
                   double s = 0.0;
                   for (int j = 0; j < n; ++j) s += (a.x(j) - 0.3) * (a.x(j) - 0.3) + a.y(j) * a.y(j);
                   return std::exp(-s - 0.5 * a.t() * a.t());
                 },
                 "gaussian_bump"});
  out.push_back({[](const HeisenbergPoint& a) { return std::atan(a.t() + a.x(0)); }, "atan(t+x1)"});
  return out;
}

}  // namespace crsobolev::heisenberg
