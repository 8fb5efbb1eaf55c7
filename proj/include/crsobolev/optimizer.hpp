#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/functions.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/random.hpp"

namespace crsobolev::optimizer {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Box-constrained parametrization of test functions.
struct ParamFamily {
  int dimension = 0;
  std::vector<Interval> bounds;
  std::function<functions::TestFunction(std::span<const double>)> builder;

  void validate() const {
    if (dimension < 0) throw ArgumentError("ParamFamily: negative dimension");
    if (static_cast<int>(bounds.size()) != dimension) throw ArgumentError("ParamFamily: bounds size != dimension");
    for (const auto& b : bounds)
      if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
        throw ArgumentError("ParamFamily: degenerate or infinite bound");
  }
};

struct TracePoint {
  std::int64_t iteration = 0;
  double best_value = 0.0;
};

struct OptResult {
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> best_params;
  std::int64_t evaluations = 0;
  std::vector<TracePoint> trace;
  int restarts = 0;
  std::int64_t non_finite = 0;
  std::vector<std::string> log;
};

using Objective = std::function<Estimate(std::span<const double>)>;

struct NelderMeadOptions {
  /// Extra seeded restarts after the first run.
  int restarts = 5;
  /// Per-run evaluation cap, independent of the budget so that a larger
  /// budget only ever extends the evaluation sequence.
  std::int64_t run_cap_per_dim = 200;
  double x_tol = 1e-10;
  double f_tol = 1e-14;
  double initial_step = 0.25;
};

namespace detail {

/// Evaluation bookkeeping shared by all runs.
class Counter {
 public:
  Counter(const Objective& f, std::int64_t budget, OptResult& res) : f_(f), budget_(budget), res_(res) {}

  bool exhausted() const { return res_.evaluations >= budget_; }

  double operator()(const std::vector<double>& x) {
    double v = f_(x).value;
    ++res_.evaluations;
    if (!std::isfinite(v)) {
      ++res_.non_finite;
      if (res_.log.size() < 100)
        res_.log.push_back("evaluation " + std::to_string(res_.evaluations) + ": non-finite objective treated as -inf");
      v = -std::numeric_limits<double>::infinity();
    }
    if (v > res_.best_value || res_.best_params.empty()) {
      if (v > res_.best_value) res_.best_value = v;
      res_.best_params = x;
    }
    res_.trace.push_back({res_.evaluations, res_.best_value});
    return v;
  }

 private:
  const Objective& f_;
  std::int64_t budget_;
  OptResult& res_;
};

inline void project(std::vector<double>& x, const std::vector<Interval>& b) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], b[i].lo, b[i].hi);
}

/// One Nelder-Mead run maximizing f from x0; returns when converged, when
/// the run cap is reached, or when the global budget is exhausted.
inline void nelder_mead_run(Counter& eval, std::vector<double> x0, const std::vector<Interval>& b,
                            const NelderMeadOptions& opt) {
  const std::size_t d = x0.size();
  const std::int64_t cap = opt.run_cap_per_dim * static_cast<std::int64_t>(d + 1);
  std::int64_t used = 0;
  auto f = [&](const std::vector<double>& x) {
    ++used;
    return eval(x);
  };
  auto stop = [&] { return eval.exhausted() || used >= cap; };

  std::vector<std::vector<double>> simplex(d + 1, x0);
  std::vector<double> vals(d + 1);
  project(simplex[0], b);
  if (stop()) return;
  vals[0] = f(simplex[0]);
  for (std::size_t i = 0; i < d; ++i) {
    if (stop()) return;
    auto& v = simplex[i + 1];
    const double step = opt.initial_step * (b[i].hi - b[i].lo);
    v[i] = (v[i] + step <= b[i].hi) ? v[i] + step : v[i] - step;
    project(v, b);
    vals[i + 1] = f(v);
  }

  std::vector<std::size_t> order(d + 1);
  while (!stop()) {
    std::iota(order.begin(), order.end(), 0);
    // Descending: order[0] is best.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return vals[a] > vals[c]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[d];
    const std::size_t second_worst = order[d >= 1 ? d - 1 : 0];

    double spread_x = 0.0;
    for (std::size_t i = 0; i <= d; ++i)
      for (std::size_t k = 0; k < d; ++k)
        spread_x = std::max(spread_x, std::abs(simplex[i][k] - simplex[best][k]) / (b[k].hi - b[k].lo));
    const double spread_f = std::isfinite(vals[worst]) ? std::abs(vals[best] - vals[worst]) : std::numeric_limits<double>::infinity();
    if (spread_x < opt.x_tol || spread_f <= opt.f_tol * (1.0 + std::abs(vals[best]))) return;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / static_cast<double>(d);

    auto along = [&](double coef) {
      std::vector<double> x(d);
      for (std::size_t k = 0; k < d; ++k) x[k] = centroid[k] + coef * (simplex[worst][k] - centroid[k]);
      project(x, b);
      return x;
    };

    auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr > vals[best]) {
      if (stop()) {
        simplex[worst] = xr;
        vals[worst] = fr;
        return;
      }
      auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe > fr) {
        simplex[worst] = std::move(xe);
        vals[worst] = fe;
      } else {
        simplex[worst] = std::move(xr);
        vals[worst] = fr;
      }
      continue;
    }
    if (fr > vals[second_worst]) {
      simplex[worst] = std::move(xr);
      vals[worst] = fr;
      continue;
    }
    if (stop()) return;
    // Contraction, outside if the reflection beat the worst point.
    const bool outside = fr > vals[worst];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (outside ? fc >= fr : fc > vals[worst]) {
      simplex[worst] = std::move(xc);
      vals[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      if (stop()) return;
      for (std::size_t k = 0; k < d; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      project(simplex[i], b);
      vals[i] = f(simplex[i]);
    }
  }
}

}  // namespace detail

/// Maximizes `objective` over the box of `family` with Nelder-Mead plus
/// seeded restarts. The evaluation sequence depends only on (seed, family,
/// objective); the budget truncates it, so a larger budget never does worse.
inline OptResult maximize(const Objective& objective, const ParamFamily& family, std::int64_t budget,
                          std::uint64_t seed, const NelderMeadOptions& opt = {}) {
  family.validate();
  OptResult res;
  if (family.dimension == 0) {
    detail::Counter eval(objective, std::max<std::int64_t>(budget, 1), res);
    eval({});
    return res;
  }
  if (budget < family.dimension + 1) throw ArgumentError("maximize: budget must be >= dimension + 1");
  detail::Counter eval(objective, budget, res);
  const auto d = static_cast<std::size_t>(family.dimension);

  std::vector<double> start(d);
  for (std::size_t k = 0; k < d; ++k) start[k] = 0.5 * (family.bounds[k].lo + family.bounds[k].hi);
  for (int run = 0; run <= opt.restarts && !eval.exhausted(); ++run) {
    if (run > 0) {
      Stream rng(salted(seed, StreamSalt::optimizer), static_cast<std::uint64_t>(run));
      for (std::size_t k = 0; k < d; ++k)
        start[k] = family.bounds[k].lo + rng.uniform() * (family.bounds[k].hi - family.bounds[k].lo);
      res.restarts = run;
    }
    detail::nelder_mead_run(eval, start, family.bounds, opt);
  }
  return res;
}

/// Linear span of {1, xi_1..xi_{2n+2}, cap bumps at bump_centers(n)} with
/// coefficients in [-1, 1]. Parameter order: constant, coordinates, bumps.
inline ParamFamily span_family(int n) {
  ParamFamily fam;
  const int dim = 2 * n + 2;
  const auto centers = functions::bump_centers(n);
  fam.dimension = 1 + dim + static_cast<int>(centers.size());
  fam.bounds.assign(static_cast<std::size_t>(fam.dimension), {-1.0, 1.0});
  std::vector<functions::TestFunction> basis;
  basis.push_back(functions::constant(1.0));
  for (int i = 1; i <= dim; ++i) basis.push_back(functions::coordinate(n, i));
  for (const auto& c : centers) basis.push_back(functions::cap_bump(c, 1.2, 1.0));
  fam.builder = [basis](std::span<const double> x) {
    std::vector<std::pair<double, functions::TestFunction>> terms;
    for (std::size_t k = 0; k < basis.size(); ++k) terms.emplace_back(x[k], basis[k]);
    return functions::linear_combination(std::move(terms), "span_member");
  };
  return fam;
}

}  // namespace crsobolev::optimizer
