#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/estimators.hpp"
#include "crsobolev/functions.hpp"
#include "crsobolev/lab/params.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/optimizer.hpp"
#include "crsobolev/quadrature.hpp"
#include "crsobolev/report.hpp"
#include "crsobolev/sphere.hpp"

namespace crsobolev::lab {

using functions::TestFunction;

/// Zeroth and first moments of a cap bump: int b dV and the scalar lambda
/// with int b xi dV = lambda * center.
struct BumpMoments {
  double mass = 0.0;
  double lambda = 0.0;
  double error = 0.0;
};

/// Disc quadrature in mu = 1 - <xi, c> = rho e^{i phi}. The bump depends on
/// rho only, and <xi, c> integrates to its real part 1 - rho cos(phi).
inline BumpMoments cap_bump_moments(int n, double radius, double sharpness) {
  if (!(radius > 0.0 && radius < 2.0)) throw ArgumentError("cap_bump_moments: radius must lie in (0, 2)");
  const double omega = sphere::volume(n).omega;
  const double rho_max = 0.5 * radius * radius;
  auto profile = [&](double rho) {
    const double x2 = 2.0 * rho / (radius * radius);
    if (x2 >= 1.0) return 0.0;
    return std::exp(-sharpness / (1.0 - x2));
  };
  BumpMoments out;
  auto integrate = [&](bool first) {
    auto outer = [&](double phi) {
      const double c = std::cos(phi);
      const double upper = std::min(2.0 * c, rho_max);
      if (!(upper > 0.0)) return 0.0;
      // rho = upper * t keeps the interval at unit length; tiny intervals
      // near phi = pi/2 otherwise stall the adaptive rule.
      auto inner = [&](double t) {
        const double rho = upper * t;
        double w = rho * profile(rho) * std::pow(std::max(2.0 * rho * c - rho * rho, 0.0), n - 1);
        if (first) w *= 1.0 - rho * c;
        return w;
      };
      const auto r = quadrature::gauss_kronrod(inner, 0.0, 1.0, 1e-14, 1e-12);
      out.error = std::max(out.error, r.error * upper);
      return r.value * upper;
    };
    const double half_pi = 0.5 * std::numbers::pi;
    double total = 0.0;
    if (rho_max < 2.0) {
      const double kink = std::acos(0.5 * rho_max);
      total += quadrature::gauss_kronrod(outer, 0.0, kink, 1e-13, 1e-12).value;
      total += quadrature::gauss_kronrod(outer, kink, half_pi, 1e-13, 1e-12).value;
    } else {
      total += quadrature::gauss_kronrod(outer, 0.0, half_pi, 1e-13, 1e-12).value;
    }
    return omega * (n / std::numbers::pi) * 2.0 * total;
  };
  out.mass = integrate(false);
  out.lambda = integrate(true);
  return out;
}

enum class ConstraintClass { zero_average, orthogonal_to_y };

inline std::string to_string(ConstraintClass c) {
  return c == ConstraintClass::zero_average ? "zero-average" : "orthogonal-to-Y";
}

inline ConstraintClass parse_constraint_class(const std::string& s) {
  if (s == "zero-average") return ConstraintClass::zero_average;
  if (s == "orthogonal-to-Y") return ConstraintClass::orthogonal_to_y;
  throw ArgumentError("unknown constraint class '" + s + "' (expected zero-average or orthogonal-to-Y)");
}

/// The span {1, xi_1..xi_D, cap bumps} with its L^2 moments against
/// Y = span{1, xi_1..xi_D}. Coefficient order: constant, coordinates, bumps.
struct SpanBasis {
  int n = 1;
  std::vector<TestFunction> basis;
  /// int f_k dV.
  std::vector<double> mean_integral;
  /// int f_k xi_i dV, row k, column i-1.
  std::vector<std::vector<double>> first_integral;

  int dim() const { return 2 * n + 2; }
  std::size_t size() const { return basis.size(); }

  TestFunction build(std::span<const double> c, const std::string& label) const {
    std::vector<std::pair<double, TestFunction>> terms;
    for (std::size_t k = 0; k < basis.size(); ++k) terms.emplace_back(c[k], basis[k]);
    return functions::linear_combination(std::move(terms), label);
  }

  /// Coefficients of the L^2 projection onto the class. Linear in c, and the
  /// result only involves the projected pieces, so applying it twice is exact
  /// up to rounding.
  std::vector<double> project(std::span<const double> c, ConstraintClass cls) const {
    std::vector<double> out(c.begin(), c.end());
    const double omega = sphere::volume(n).omega;
    const double avg = std::inner_product(c.begin(), c.end(), mean_integral.begin(), 0.0) / omega;
    out[0] -= avg;
    if (cls == ConstraintClass::orthogonal_to_y) {
      const double norm2 = omega / dim();
      for (int i = 0; i < dim(); ++i) {
        double m = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) m += c[k] * first_integral[k][static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(1 + i)] -= m / norm2;
      }
    }
    return out;
  }
};

inline SpanBasis span_basis(int n, double radius = 1.2, double sharpness = 1.0) {
  SpanBasis sb;
  sb.n = n;
  const int d = 2 * n + 2;
  const double omega = sphere::volume(n).omega;
  const auto zero_row = std::vector<double>(static_cast<std::size_t>(d), 0.0);
  sb.basis.push_back(functions::constant(1.0));
  sb.mean_integral.push_back(omega);
  sb.first_integral.push_back(zero_row);
  for (int i = 1; i <= d; ++i) {
    sb.basis.push_back(functions::coordinate(n, i));
    sb.mean_integral.push_back(0.0);
    auto row = zero_row;
    row[static_cast<std::size_t>(i - 1)] = omega / d;
    sb.first_integral.push_back(std::move(row));
  }
  const auto bm = cap_bump_moments(n, radius, sharpness);
  for (const auto& c : functions::bump_centers(n)) {
    sb.basis.push_back(functions::cap_bump(c, radius, sharpness));
    sb.mean_integral.push_back(bm.mass);
    std::vector<double> row(c.flat().begin(), c.flat().end());
    for (double& v : row) v *= bm.lambda;
    sb.first_integral.push_back(std::move(row));
  }
  return sb;
}

/// span_basis as a box family with every member projected onto the class.
inline optimizer::ParamFamily projected_family(const SpanBasis& sb, ConstraintClass cls) {
  optimizer::ParamFamily fam;
  fam.dimension = static_cast<int>(sb.size());
  fam.bounds.assign(sb.size(), {-1.0, 1.0});
  fam.builder = [sb, cls](std::span<const double> x) {
    const auto c = sb.project(x, cls);
    auto f = sb.build(c, "projected[" + to_string(cls) + "]");
    f.is_mean_zero = true;
    f.is_constant = false;
    return f;
  };
  return fam;
}

/// 1 + delta * bump with log10(delta) in [lo, hi]: constants plus a
/// vanishing perturbation, no projection.
inline optimizer::ParamFamily near_constant_family(int n, double log10_lo = -4.0, double log10_hi = -1.0) {
  optimizer::ParamFamily fam;
  fam.dimension = 1;
  fam.bounds = {{log10_lo, log10_hi}};
  const auto bump = functions::cap_bump(functions::bump_centers(n)[0], 1.2, 1.0);
  fam.builder = [bump](std::span<const double> x) {
    const double delta = std::pow(10.0, x[0]);
    return functions::linear_combination({{1.0, functions::constant(1.0)}, {delta, bump}}, "near_constant");
  };
  return fam;
}

struct MomentClassResult {
  std::vector<Estimate> moments;
  std::vector<bool> vanishes;
  bool in_class = true;
  ExperimentReport report;
};

/// Tests int xi_i |u|^{p*} dV = 0 for each i within 4 SE. Antithetic pairs
/// (xi, -xi): xi_i is odd, so each sample is xi_i (|u(xi)|^q - |u(-xi)|^q)/2.
inline MomentClassResult moment_class_check(const TestFunction& u, const CriticalParams& cp, const McConfig& cfg) {
  cfg.validate(cp.Q());
  const int d = 2 * cp.n + 2;
  const double omega = sphere::volume(cp.n).omega;
  const double q = cp.p_star;
  const auto table = run_batches(cfg, salted(cfg.seed, StreamSalt::sphere), static_cast<std::size_t>(d + 1),
                                 [&](Stream& rng, std::span<double> out) {
                                   const auto x = sphere::sample_point(cp.n, rng);
                                   const double a = std::pow(std::abs(u(x)), q);
                                   const double b = std::pow(std::abs(u(-x)), q);
                                   for (int i = 1; i <= d; ++i) out[static_cast<std::size_t>(i - 1)] = omega * x.xi(i) * 0.5 * (a - b);
                                   out[static_cast<std::size_t>(d)] = omega * 0.5 * (a + b);
                                 });
  MomentClassResult res;
  res.report = ExperimentReport("moment-class");
  res.report.params = cp.to_json();
  res.report.params["function"] = u.label;
  res.report.params["samples"] = cfg.samples;
  res.report.params["seed"] = cfg.seed;
  const auto scale = table.component(static_cast<std::size_t>(d));
  res.report.monte_carlo("norm_p_star_power", scale);
  for (int i = 1; i <= d; ++i) {
    const auto e = table.component(static_cast<std::size_t>(i - 1));
    // Rounding floor for exactly antisymmetric samples.
    const bool zero = std::abs(e.value) <= 4.0 * e.std_error + 1e-12 * std::max(1.0, scale.value);
    res.moments.push_back(e);
    res.vanishes.push_back(zero);
    res.in_class = res.in_class && zero;
    res.report.monte_carlo("moment_" + std::to_string(i), e);
    res.report.verdict("moment_" + std::to_string(i), zero ? "ZERO" : "NONZERO", true);
  }
  res.report.verdict("moment_class", res.in_class ? "IN-M" : "OUTSIDE-M", true);
  return res;
}

namespace detail {

/// ||u||_{p*} / [u]_{s,p} from one shared pair stream.
inline Estimate sobolev_ratio(const TestFunction& u, const CriticalParams& cp, const McConfig& cfg) {
  const auto est = estimators::critical_estimates(u, cp.s, cp.p, cp.n, estimators::Side::sphere, cfg);
  const double p = cp.p;
  const double q = cp.p_star;
  return est.table.transform([p, q](std::span<const double> m) { return std::pow(m[2], 1.0 / q) / std::pow(m[0], 1.0 / p); });
}

inline void add_params(ExperimentReport& rep, const CriticalParams& cp, const McConfig& cfg, std::int64_t budget,
                       std::uint64_t seed) {
  rep.params = cp.to_json();
  rep.params["samples"] = cfg.samples;
  rep.params["mc_seed"] = cfg.seed;
  rep.params["budget"] = budget;
  rep.params["seed"] = seed;
}

inline Table trace_table(const optimizer::OptResult& r) {
  Table t{{"evaluation", "best_value"}, {}};
  for (const auto& tp : r.trace) t.rows.push_back({static_cast<double>(tp.iteration), tp.best_value});
  return t;
}

}  // namespace detail

/// Empirical C_0 = sup ||u||_{p*}/[u] over a family already projected onto
/// the class. A lower bound for the true constant, never an upper bound.
inline ExperimentReport coercive_class_probe(ConstraintClass cls, const optimizer::ParamFamily& family,
                                             std::int64_t budget, const CriticalParams& cp, const McConfig& cfg,
                                             std::uint64_t seed = 7) {
  cfg.validate(cp.Q());
  const auto res = optimizer::maximize(
      [&](std::span<const double> x) { return detail::sobolev_ratio(family.builder(x), cp, cfg); }, family, budget, seed);
  ExperimentReport rep("coercive-class-probe");
  detail::add_params(rep, cp, cfg, budget, seed);
  rep.params["class"] = to_string(cls);
  const auto best = detail::sobolev_ratio(family.builder(res.best_params), cp, cfg);
  rep.monte_carlo("C0_empirical", best);
  rep.analytic("evaluations", static_cast<double>(res.evaluations));
  rep.analytic("non_finite_evaluations", static_cast<double>(res.non_finite));
  rep.check("finite_bound", std::isfinite(best.value) && best.value > 0.0);
  rep.tables["trace"] = detail::trace_table(res);
  return rep;
}

/// Both halves of the dichotomy: the projected span family stays bounded,
/// the unprojected near-constant family exceeds ten times that bound, and
/// constants pass the first-moment test.
inline ExperimentReport coercivity_dichotomy(ConstraintClass cls, std::int64_t budget, const CriticalParams& cp,
                                             const McConfig& cfg, std::uint64_t seed = 7) {
  const auto sb = span_basis(cp.n);
  auto rep = ExperimentReport("coercivity-dichotomy");
  detail::add_params(rep, cp, cfg, budget, seed);
  rep.params["class"] = to_string(cls);
  const auto projected = coercive_class_probe(cls, projected_family(sb, cls), budget, cp, cfg, seed);
  rep.merge(projected, "projected.");
  const double bound = projected.find("C0_empirical")->value;

  const auto near = near_constant_family(cp.n);
  const auto res = optimizer::maximize(
      [&](std::span<const double> x) { return detail::sobolev_ratio(near.builder(x), cp, cfg); }, near,
      std::max<std::int64_t>(budget / 4, 2), seed);
  const auto near_best = detail::sobolev_ratio(near.builder(res.best_params), cp, cfg);
  rep.monte_carlo("near_constant.ratio", near_best);
  rep.analytic("near_constant.log10_delta", res.best_params[0]);
  rep.check("near_constant_exceeds_10x", near_best.value - 3.0 * near_best.std_error > 10.0 * bound,
            "ratio " + std::to_string(near_best.value) + " vs bound " + std::to_string(bound));

  // Idempotence: a projected coefficient vector projects to itself.
  Stream rng(salted(seed, StreamSalt::optimizer), 0xC0FFEEULL);
  std::vector<double> c(sb.size());
  for (double& v : c) v = 2.0 * rng.uniform() - 1.0;
  const auto once = sb.project(c, cls);
  const auto twice = sb.project(once, cls);
  double drift = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) drift = std::max(drift, std::abs(once[k] - twice[k]));
  rep.analytic("projection_drift", drift);
  rep.check("projection_idempotent", drift <= 1e-12);

  const auto mc = moment_class_check(functions::constant(1.0), cp, cfg);
  rep.merge(mc.report, "constant.");
  rep.check("constants_in_M", mc.in_class);
  return rep;
}

struct AdmissibilityRow {
  double b = 0.0;
  double a_min = 0.0;
  double a_min_se = 0.0;
  bool unbounded = false;
};

/// Empirical A_min(B) over a family for every B on the grid. Each B is
/// optimized separately, then every B is re-scored on the union of all best
/// points; with shared pair streams this makes A_min non-increasing in B.
inline ExperimentReport admissibility_probe(const std::vector<double>& b_grid, Form form,
                                            const optimizer::ParamFamily& family, std::int64_t budget,
                                            const CriticalParams& cp, const McConfig& cfg, std::uint64_t seed = 7) {
  if (b_grid.empty()) throw ArgumentError("admissibility_probe: empty B grid");
  cfg.validate(cp.Q());
  const double thr = threshold_for(thresholds(cp), form);
  const double p = cp.p;
  const double q = cp.p_star;
  auto ratio_fn = [&](double b) {
    return [=](std::span<const double> m) {
      if (form == Form::linear)
        return (std::pow(m[2], 1.0 / q) - b * std::pow(m[1], 1.0 / p)) / std::pow(m[0], 1.0 / p);
      return (std::pow(m[2], p / q) - b * m[1]) / m[0];
    };
  };
  auto table_at = [&](std::span<const double> x) {
    return estimators::critical_estimates(family.builder(x), cp.s, cp.p, cp.n, estimators::Side::sphere, cfg).table;
  };
  auto finite_or_ninf = [](Estimate e) {
    if (!std::isfinite(e.value)) e.value = -std::numeric_limits<double>::infinity();
    return e;
  };

  ExperimentReport rep("admissibility");
  detail::add_params(rep, cp, cfg, budget, seed);
  rep.params["form"] = to_string(form);
  rep.params["B"] = b_grid;
  rep.analytic("threshold", thr);

  std::vector<std::vector<double>> candidates;
  for (double b : b_grid) {
    if (b < thr) continue;
    const auto f = ratio_fn(b);
    const auto res = optimizer::maximize([&](std::span<const double> x) { return table_at(x).transform(f); }, family,
                                         budget, seed);
    candidates.push_back(res.best_params);
  }
  std::vector<BatchTable> tables;
  for (const auto& c : candidates) tables.push_back(table_at(c));

  Table out{{"B", "A_min", "A_min_se", "unbounded"}, {}};
  std::vector<AdmissibilityRow> rows;
  for (double b : b_grid) {
    AdmissibilityRow row;
    row.b = b;
    if (b < thr) {
      row.unbounded = true;
      row.a_min = std::numeric_limits<double>::infinity();
    } else {
      Estimate best{-std::numeric_limits<double>::infinity(), 0.0, 0, 0.0};
      for (const auto& t : tables) {
        const auto e = finite_or_ninf(t.transform(ratio_fn(b)));
        if (e.value > best.value) best = e;
      }
      row.a_min = best.value;
      row.a_min_se = best.std_error;
    }
    rows.push_back(row);
    out.rows.push_back({row.b, row.a_min, row.a_min_se, row.unbounded ? 1.0 : 0.0});
    const std::string tag = "[B=" + std::to_string(b) + "]";
    if (row.unbounded) {
      rep.verdict("admissibility" + tag, "UNBOUNDED", true, "witness constant(1): B below threshold");
    } else {
      rep.quantities.push_back({"A_min" + tag, row.a_min, row.a_min_se, Provenance::monte_carlo, cfg.samples});
      rep.verdict("admissibility" + tag, std::isfinite(row.a_min) ? "FINITE" : "NO-FINITE-MEMBER", true);
    }
  }
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (rows[i].b < rows[j].b && !(rows[i].a_min >= rows[j].a_min)) monotone = false;
  rep.check("monotone_in_B", monotone);
  rep.tables["a_min"] = std::move(out);
  return rep;
}

/// [phi u]^p <= C1 [u]^p + C2 ||u||_p^p with C1 = 2^{p-1} sup|phi|^p and
/// C2 = 2^{p-1} Lip(phi)^p M, M = int d^{-(Q-(1-s)p)} dV (any base point).
inline ExperimentReport cutoff_estimate_check(const TestFunction& phi, const TestFunction& u, const CriticalParams& cp,
                                              const McConfig& cfg) {
  if (!phi.sup_bound || !phi.lipschitz_bound) throw ConfigError("cutoff_estimate_check: phi needs sup and Lipschitz bounds");
  cfg.validate(cp.Q());
  const double p = cp.p;
  const double kappa = cp.Q() - (1.0 - cp.s) * p;
  const double m_const = estimators::near_diagonal_mass(cp.n, kappa, 2.0);
  const double c1 = std::pow(2.0, p - 1.0) * std::pow(*phi.sup_bound, p);
  const double c2 = std::pow(2.0, p - 1.0) * std::pow(*phi.lipschitz_bound, p) * m_const;
  const auto phi_u = functions::product(phi, u);
  // Same seed, same draws: the two tables share pairs batch by batch.
  const auto t_u = estimators::critical_estimates(u, cp.s, p, cp.n, estimators::Side::sphere, cfg).table;
  const auto t_pu = estimators::critical_estimates(phi_u, cp.s, p, cp.n, estimators::Side::sphere, cfg).table;
  const auto joint = concat(t_u, t_pu);
  const auto residual = joint.transform([=](std::span<const double> m) { return c1 * m[0] + c2 * m[1] - m[4]; });

  ExperimentReport rep("cutoff-estimate");
  rep.params = cp.to_json();
  rep.params["phi"] = phi.label;
  rep.params["u"] = u.label;
  rep.params["samples"] = cfg.samples;
  rep.params["seed"] = cfg.seed;
  rep.quadrature("M", m_const, 1e-10 * m_const);
  rep.analytic("C1", c1);
  rep.analytic("C2", c2);
  rep.monte_carlo("seminorm_p[phi*u]", joint.component(4));
  rep.monte_carlo("seminorm_p[u]", joint.component(0));
  rep.monte_carlo("norm_p_power[u]", joint.component(1));
  rep.monte_carlo("residual", residual);
  rep.check("cutoff_estimate", residual.value >= -3.0 * residual.std_error);
  return rep;
}

}  // namespace crsobolev::lab
