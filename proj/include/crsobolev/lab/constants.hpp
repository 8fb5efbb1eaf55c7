#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/estimators.hpp"
#include "crsobolev/functions.hpp"
#include "crsobolev/lab/params.hpp"
#include "crsobolev/lab/scalar.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/report.hpp"

namespace crsobolev::lab {

struct YoungSplit {
  /// Exact boundary tau* with (1 + 1/tau*)^{p-1} T = B.
  double tau_boundary = 0.0;
  /// Smallest grid value 2^{k/16} strictly above the boundary.
  double tau = 0.0;
  double a_b = 0.0;
  /// (1 + 1/tau)^{p-1} T, strictly below B.
  double effective_b = 0.0;
};

/// tau and A_B = (1 + tau)^{p-1} A0^p for the power form with B above the
/// power threshold T.
inline YoungSplit young_split_constants(double b_coef, double a0, const CriticalParams& cp) {
  const double thr = thresholds(cp).power_threshold;
  if (!(b_coef > thr)) throw ArgumentError("young_split_constants: B must exceed the power threshold");
  if (!(a0 > 0.0)) throw ArgumentError("young_split_constants: A0 must be positive");
  const double p = cp.p;
  auto below = [&](double tau) { return std::pow(1.0 + 1.0 / tau, p - 1.0) * thr < b_coef; };
  YoungSplit y;
  y.tau_boundary = 1.0 / (std::pow(b_coef / thr, 1.0 / (p - 1.0)) - 1.0);
  auto grid = [](int k) { return std::exp2(k / 16.0); };
  int k = static_cast<int>(std::floor(16.0 * std::log2(y.tau_boundary)));
  while (!below(grid(k))) ++k;
  while (below(grid(k - 1))) --k;
  y.tau = grid(k);
  y.a_b = std::pow(1.0 + y.tau, p - 1.0) * std::pow(a0, p);
  y.effective_b = std::pow(1.0 + 1.0 / y.tau, p - 1.0) * thr;
  return y;
}

inline ExperimentReport young_split_report(double b_coef, double a0, const CriticalParams& cp,
                                           std::int64_t instances, std::uint64_t seed) {
  const auto y = young_split_constants(b_coef, a0, cp);
  ExperimentReport rep("young-split");
  rep.params = cp.to_json();
  rep.params["B"] = b_coef;
  rep.params["A0"] = a0;
  rep.analytic("power_threshold", thresholds(cp).power_threshold);
  rep.analytic("tau_boundary", y.tau_boundary);
  rep.analytic("tau", y.tau);
  rep.analytic("A_B", y.a_b);
  rep.analytic("effective_B", y.effective_b);
  rep.check("tau_above_boundary", y.tau >= y.tau_boundary && y.effective_b < b_coef);
  SuiteCount c;
  for (std::int64_t i = 0; i < instances; ++i) {
    Stream rng(seed ^ 0xD4ULL, static_cast<std::uint64_t>(i));
    const double x = 3.0 * rng.uniform();
    const double yv = 3.0 * rng.uniform();
    c.add(young_excess(cp.p, i % 2 == 0 ? y.tau : std::exp(14.0 * rng.uniform() - 7.0), x, yv), 1e-9);
  }
  rep.analytic("young_max_excess", c.max_excess);
  rep.check("weighted_young", c.violations == 0, std::to_string(c.violations) + " violations");
  return rep;
}

struct Subcritical {
  double theta = 0.0;
  double delta = 0.0;
  double c_eps_r = 0.0;
};

/// theta from 1/r = theta/p* + (1-theta)/p and
/// C = (1-theta) delta^{-theta/(1-theta)} + omega^{-theta s/Q}, delta = eps/(theta A0).
inline Subcritical subcritical_constants(double r, double eps, double a0, const CriticalParams& cp) {
  if (!(r >= cp.p && r < cp.p_star)) throw ArgumentError("subcritical_constants: r must lie in [p, p*)");
  if (!(eps > 0.0)) throw ArgumentError("subcritical_constants: eps must be positive");
  if (!(a0 > 0.0)) throw ArgumentError("subcritical_constants: A0 must be positive");
  const double omega = sphere::volume(cp.n).omega;
  Subcritical out;
  out.theta = (1.0 / cp.p - 1.0 / r) / (1.0 / cp.p - 1.0 / cp.p_star);
  if (out.theta == 0.0) {
    // Both terms of the chain reduce to ||u||_p.
    out.delta = std::numeric_limits<double>::infinity();
    out.c_eps_r = 2.0;
    return out;
  }
  out.delta = eps / (out.theta * a0);
  out.c_eps_r = (1.0 - out.theta) * std::pow(out.delta, -out.theta / (1.0 - out.theta)) +
                std::pow(omega, -out.theta * cp.s / cp.Q());
  return out;
}

/// Evaluates eps [u] + C ||u||_p - ||u||_r on every suite member.
inline ExperimentReport subcritical_report(double r, double eps, double a0, const CriticalParams& cp,
                                           const std::vector<functions::TestFunction>& suite, const McConfig& cfg) {
  const auto sc = subcritical_constants(r, eps, a0, cp);
  ExperimentReport rep("subcritical");
  rep.params = cp.to_json();
  rep.params["r"] = r;
  rep.params["eps"] = eps;
  rep.params["A0"] = a0;
  rep.params["samples"] = cfg.samples;
  rep.params["seed"] = cfg.seed;
  rep.analytic("theta", sc.theta);
  rep.analytic("C_eps_r", sc.c_eps_r);
  cfg.validate(cp.Q());
  const estimators::SpherePairSampler sampler(cp.n, cp.s, cp.p, cfg.beta(cp.Q()));
  const double omega = sampler.omega();
  for (const auto& u : suite) {
    const auto table = run_batches(cfg, salted(cfg.seed, StreamSalt::sphere), 3, [&](Stream& rng, std::span<double> out) {
      const auto d = sampler.draw(u, rng);
      out[0] = std::pow(std::abs(d.u_first - d.u_second), cp.p) * d.weight;
      out[1] = omega * std::pow(std::abs(d.u_first), cp.p);
      out[2] = omega * std::pow(std::abs(d.u_first), r);
    });
    const double p = cp.p;
    const double semi_coef = u.is_constant ? 0.0 : eps;
    const auto res = table.transform([&](std::span<const double> m) {
      return semi_coef * std::pow(m[0], 1.0 / p) + sc.c_eps_r * std::pow(m[1], 1.0 / p) - std::pow(m[2], 1.0 / r);
    });
    rep.monte_carlo("residual[" + u.label + "]", res);
    rep.check("subcritical[" + u.label + "]", res.value >= -3.0 * res.std_error);
  }
  return rep;
}

}  // namespace crsobolev::lab
