#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "crsobolev/cayley.hpp"
#include "crsobolev/errors.hpp"
#include "crsobolev/functions.hpp"
#include "crsobolev/heisenberg.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/quadrature.hpp"
#include "crsobolev/sphere.hpp"

namespace crsobolev::estimators {

using functions::HeisenbergFunction;
using functions::TestFunction;
using heisenberg::HeisenbergPoint;
using sphere::cplx;
using sphere::SpherePoint;

/// Which side of the Cayley transform an integral is evaluated on.
enum class Side { sphere, heisenberg };

inline std::string to_string(Side s) { return s == Side::sphere ? "sphere" : "heisenberg"; }

inline void check_exponents(double s, double p) {
  if (!(s > 0.0 && s < 1.0)) throw ArgumentError("seminorm: s must lie in (0, 1)");
  if (!(p > 1.0)) throw ArgumentError("seminorm: p must exceed 1");
}

/// int_{d(xi, eta) < delta} d(xi, eta)^{-kappa} dV(eta), independent of xi.
/// Uses the reduction of dV to the disc variable mu = 1 - <eta, xi>:
/// dV = omega (n/pi) (2 Re mu - |mu|^2)^{n-1} dA(mu) x (uniform fiber).
inline double near_diagonal_mass(int n, double kappa, double delta) {
  const int q = 2 * n + 2;
  if (!(kappa < q)) throw ArgumentError("near_diagonal_mass: kernel exponent must be < Q");
  if (!(delta > 0.0)) return 0.0;
  const double omega = sphere::volume(n).omega;
  const double rho_cut = 0.5 * delta * delta;
  // Inner rho integral of (2c - rho)^{n-1} rho^{n - kappa/2} in closed form
  // by expanding the binomial.
  const double e0 = n - 0.5 * kappa;
  const double pre = std::pow(2.0, -0.5 * kappa);
  auto inner = [&](double phi) {
    const double c = std::cos(phi);
    const double upper = std::min(2.0 * c, rho_cut);
    if (!(upper > 0.0)) return 0.0;
    double sum = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= n - 1; ++k) {
      const double e = e0 + k + 1.0;
      sum += binom * std::pow(2.0 * c, n - 1 - k) * ((k % 2) ? -1.0 : 1.0) * std::pow(upper, e) / e;
      binom = binom * (n - 1 - k) / (k + 1);
    }
    return pre * sum;
  };
  const double half_pi = 0.5 * std::numbers::pi;
  double total = 0.0;
  // The upper limit has a kink where 2 cos(phi) = rho_cut.
  if (rho_cut < 2.0) {
    const double kink = std::acos(0.5 * rho_cut);
    total += quadrature::tanh_sinh(inner, 0.0, kink, 1e-11).value;
    total += quadrature::tanh_sinh(inner, kink, half_pi, 1e-11).value;
  } else {
    total += quadrature::tanh_sinh(inner, 0.0, half_pi, 1e-11).value;
  }
  return omega * (n / std::numbers::pi) * 2.0 * total;
}

/// Near-diagonal pair proposal on the sphere. Given xi, draws
/// mu = 1 - <eta, xi> = rho e^{i phi} with phi uniform on (-pi/2, pi/2) and
/// rho = 2 cos(phi) U^{1/(a+1)}, a = n - beta/2, then places eta uniformly on
/// the fiber {<eta, xi> = 1 - mu}. Its density with respect to dV behaves like
/// d(xi, eta)^{-beta} near the diagonal.
class SphereProposal {
 public:
  SphereProposal(int n, double beta, double omega) : n_(n), a_(n - 0.5 * beta), omega_(omega) {
    if (!(a_ > -1.0)) throw ArgumentError("SphereProposal: beta must be < Q");
  }

  struct Draw {
    SpherePoint eta;
    double abs_mu = 0.0;
    double density = 0.0;
  };

  Draw sample(const SpherePoint& xi, Stream& rng) const {
    const double phi = std::numbers::pi * (rng.uniform_open() - 0.5);
    const double c = 2.0 * std::cos(phi);
    const double rho = c * std::pow(rng.uniform_open(), 1.0 / (a_ + 1.0));
    const cplx mu = std::polar(rho, phi);
    const cplx lambda = 1.0 - mu;
    const double perp_sq = std::max(0.0, rho * c - rho * rho);

    // Uniform direction in the complex orthogonal complement of xi.
    const int m = n_ + 1;
    std::vector<cplx> g(static_cast<std::size_t>(m));
    cplx proj{};
    for (int j = 0; j < m; ++j) {
      g[static_cast<std::size_t>(j)] = {rng.normal(), rng.normal()};
      proj += g[static_cast<std::size_t>(j)] * std::conj(xi.w(j));
    }
    double nrm = 0.0;
    for (int j = 0; j < m; ++j) {
      g[static_cast<std::size_t>(j)] -= proj * xi.w(j);
      nrm += std::norm(g[static_cast<std::size_t>(j)]);
    }
    const double scale = nrm > 0.0 ? std::sqrt(perp_sq / nrm) : 0.0;
    std::vector<cplx> eta(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) eta[static_cast<std::size_t>(j)] = lambda * xi.w(j) + scale * g[static_cast<std::size_t>(j)];
    return {SpherePoint::from_complex(eta), rho, density(mu)};
  }

  /// Density with respect to dV at the point with 1 - <eta, xi> = mu.
  double density(cplx mu) const {
    const double rho = std::abs(mu);
    const double c = 2.0 * mu.real() / std::max(rho, std::numeric_limits<double>::min());
    const double perp_sq = 2.0 * mu.real() - rho * rho;
    if (!(c > 0.0) || !(rho > 0.0) || !(rho < c)) return std::numeric_limits<double>::infinity();
    const double fiber = n_ == 1 ? 1.0 : std::pow(std::max(perp_sq, 0.0), n_ - 1);
    if (!(fiber > 0.0)) return std::numeric_limits<double>::infinity();
    return (a_ + 1.0) * std::pow(rho, a_ - 1.0) / (std::pow(c, a_ + 1.0) * omega_ * n_ * fiber);
  }

 private:
  int n_;
  double a_;
  double omega_;
};

/// One weighted pair (first, second) with weight such that
/// E[|u(first) - u(second)|^p * weight] = seminorm^p.
struct PairDraw {
  double u_first = 0.0;
  double u_second = 0.0;
  double weight = 0.0;
  double distance = 0.0;
};

/// Pair sampler on the sphere: xi uniform, eta from the equal mixture of
/// uniform and SphereProposal.
class SpherePairSampler {
 public:
  SpherePairSampler(int n, double s, double p, double beta)
      : n_(n), q_(2 * n + 2), exponent_(q_ + s * p), omega_(sphere::volume(n).omega), proposal_(n, beta, omega_) {}

  template <class Fn>
  PairDraw draw(const Fn& u, Stream& rng) const {
    const SpherePoint xi = sphere::sample_point(n_, rng);
    double abs_mu = 0.0;
    double q_density = 0.0;
    SpherePoint eta;
    if (rng.uniform() < 0.5) {
      eta = sphere::sample_point(n_, rng);
      const cplx mu = 1.0 - sphere::inner(eta, xi);
      abs_mu = std::abs(mu);
      q_density = proposal_.density(mu);
    } else {
      auto d = proposal_.sample(xi, rng);
      eta = std::move(d.eta);
      abs_mu = d.abs_mu;
      q_density = d.density;
    }
    PairDraw out;
    out.u_first = u(xi);
    out.u_second = u(eta);
    out.distance = sphere::distance_from_mu(abs_mu);
    const double mix = 0.5 / omega_ + 0.5 * q_density;
    if (!(out.distance > 0.0) || !std::isfinite(mix)) return out;
    out.weight = omega_ / mix * std::pow(out.distance, -exponent_);
    return out;
  }

  double omega() const { return omega_; }

 private:
  int n_;
  int q_;
  double exponent_;
  double omega_;
  SphereProposal proposal_;
};

/// Pair sampler on H^n for the transported kernel K_c: a ~ J_c/omega, b from
/// the equal mixture of J_c/omega and a o h with h from LocalGaugeProposal on
/// a gauge ball whose radius follows the local Cayley scale Delta(a)^{1/2}.
class HeisenbergPairSampler {
 public:
  HeisenbergPairSampler(int n, double s, double p, double beta)
      : n_(n), q_(2 * n + 2), exponent_(q_ + s * p), omega_(sphere::volume(n).omega), local_(n, beta) {}

  template <class Fn>
  PairDraw draw(const Fn& big_u, Stream& rng) const {
    const HeisenbergPoint a = cayley::sample_weighted(n_, rng);
    const double r_max = std::sqrt(cayley::delta(a));
    HeisenbergPoint b;
    double gauge = 0.0;
    if (rng.uniform() < 0.5) {
      b = cayley::sample_weighted(n_, rng);
      gauge = heisenberg::koranyi_gauge(heisenberg::group_law(heisenberg::group_inverse(a), b));
    } else {
      const HeisenbergPoint h = local_.sample(rng, r_max);
      gauge = heisenberg::koranyi_gauge(h);
      b = heisenberg::group_law(a, h);
    }
    PairDraw out;
    out.u_first = big_u(a);
    out.u_second = big_u(b);
    const double jb = cayley::jacobian(b);
    out.distance = 2.0 * gauge / std::pow(cayley::delta(a) * cayley::delta(b), 0.25);
    const double mix = 0.5 * jb / omega_ + 0.5 * local_.density_at_gauge(gauge, r_max);
    if (!(out.distance > 0.0) || !(mix > 0.0) || !std::isfinite(mix)) return out;
    // K_c(a,b) / ((J(a)/omega) * mix); J(a) cancels.
    out.weight = jb * omega_ / mix * std::pow(out.distance, -exponent_);
    return out;
  }

  double omega() const { return omega_; }

 private:
  int n_;
  int q_;
  double exponent_;
  double omega_;
  heisenberg::LocalGaugeProposal local_;
};

namespace detail {

inline double tail_for(std::optional<double> lipschitz, int n, double s, double p, double delta) {
  if (!(delta > 0.0)) return 0.0;
  if (!lipschitz) throw ConfigError("diagonal cutoff requires a declared Lipschitz bound");
  const double omega = sphere::volume(n).omega;
  const double kappa = (2 * n + 2) - p * (1.0 - s);
  return std::pow(*lipschitz, p) * omega * near_diagonal_mass(n, kappa, delta);
}

/// Seminorm sample and single-point moments from one pair:
/// [0] |du|^p w, [1] omega |u|^p, [2] omega |u|^{p*}, [3] omega u.
template <class Sampler, class Fn>
BatchTable critical_table(const Sampler& sampler, const Fn& u, double p, double p_star, double cutoff,
                          const McConfig& cfg, std::uint64_t seed) {
  const double omega = sampler.omega();
  return run_batches(cfg, seed, 4, [&](Stream& rng, std::span<double> out) {
    const PairDraw d = sampler.draw(u, rng);
    if (d.distance >= cutoff) out[0] = std::pow(std::abs(d.u_first - d.u_second), p) * d.weight;
    const double a = std::abs(d.u_first);
    out[1] = omega * std::pow(a, p);
    out[2] = omega * std::pow(a, p_star);
    out[3] = omega * d.u_first;
  });
}

inline std::uint64_t side_seed(const McConfig& cfg, Side side) {
  return salted(cfg.seed, side == Side::sphere ? StreamSalt::sphere : StreamSalt::heisenberg);
}

}  // namespace detail

/// ||U||_{L^r(J_c)} for a function on H^n, sampling a ~ J_c / omega.
inline Estimate lp_norm_weighted(const HeisenbergFunction& big_u, double r, int n, const McConfig& cfg) {
  if (!(r >= 1.0)) throw ArgumentError("lp_norm: r must be >= 1");
  cfg.validate(2 * n + 2);
  const double omega = sphere::volume(n).omega;
  const auto table = run_batches(cfg, detail::side_seed(cfg, Side::heisenberg), 1, [&](Stream& rng, std::span<double> out) {
    out[0] = omega * std::pow(std::abs(big_u(cayley::sample_weighted(n, rng))), r);
  });
  return table.transform([r](std::span<const double> m) { return std::pow(m[0], 1.0 / r); });
}

/// ||u||_{L^r} on the sphere, or ||u o Psi_c^{-1}||_{L^r(J_c)} on H^n.
inline Estimate lp_norm(const TestFunction& u, double r, int n, Side side, const McConfig& cfg) {
  if (!(r >= 1.0)) throw ArgumentError("lp_norm: r must be >= 1");
  cfg.validate(2 * n + 2);
  if (side == Side::heisenberg) return lp_norm_weighted(cayley::pushforward(u), r, n, cfg);
  const double omega = sphere::volume(n).omega;
  const auto table = run_batches(cfg, detail::side_seed(cfg, Side::sphere), 1, [&](Stream& rng, std::span<double> out) {
    out[0] = omega * std::pow(std::abs(u(sphere::sample_point(n, rng))), r);
  });
  return table.transform([r](std::span<const double> m) { return std::pow(m[0], 1.0 / r); });
}

/// [U]_{K_c,p}^p for a function on H^n.
inline Estimate gagliardo_weighted(const HeisenbergFunction& big_u, double s, double p, int n, const McConfig& cfg,
                                   std::optional<double> lipschitz = std::nullopt) {
  check_exponents(s, p);
  cfg.validate(2 * n + 2);
  const double tail = detail::tail_for(lipschitz, n, s, p, cfg.diagonal_cutoff);
  const HeisenbergPairSampler sampler(n, s, p, cfg.beta(2 * n + 2));
  const auto table = run_batches(cfg, detail::side_seed(cfg, Side::heisenberg), 1, [&](Stream& rng, std::span<double> out) {
    const PairDraw d = sampler.draw(big_u, rng);
    if (d.distance >= cfg.diagonal_cutoff) out[0] = std::pow(std::abs(d.u_first - d.u_second), p) * d.weight;
  });
  Estimate e = table.component(0);
  e.tail_bound = tail;
  return e;
}

/// Gagliardo seminorm [u]_{s,p}^p on the sphere, or its transported form
/// [u o Psi_c^{-1}]_{K_c,p}^p on H^n.
inline Estimate gagliardo(const TestFunction& u, double s, double p, int n, Side side, const McConfig& cfg) {
  check_exponents(s, p);
  cfg.validate(2 * n + 2);
  if (u.is_constant) return {0.0, 0.0, cfg.samples, 0.0};
  if (side == Side::heisenberg) return gagliardo_weighted(cayley::pushforward(u), s, p, n, cfg, u.lipschitz_bound);
  const double tail = detail::tail_for(u.lipschitz_bound, n, s, p, cfg.diagonal_cutoff);
  const SpherePairSampler sampler(n, s, p, cfg.beta(2 * n + 2));
  const auto table = run_batches(cfg, detail::side_seed(cfg, Side::sphere), 1, [&](Stream& rng, std::span<double> out) {
    const PairDraw d = sampler.draw(u, rng);
    if (d.distance >= cfg.diagonal_cutoff) out[0] = std::pow(std::abs(d.u_first - d.u_second), p) * d.weight;
  });
  Estimate e = table.component(0);
  e.tail_bound = tail;
  return e;
}

/// Seminorm and both Lebesgue norms from one shared pair stream, so that
/// residuals get a consistent batch-means error.
struct CriticalEstimates {
  BatchTable table;
  double p = 2.0;
  double p_star = 4.0;

  Estimate seminorm_p() const { return table.component(0); }
  Estimate seminorm() const {
    const double pp = p;
    return table.transform([pp](std::span<const double> m) { return std::pow(m[0], 1.0 / pp); });
  }
  Estimate norm_p() const {
    const double pp = p;
    return table.transform([pp](std::span<const double> m) { return std::pow(m[1], 1.0 / pp); });
  }
  Estimate norm_p_star() const {
    const double q = p_star;
    return table.transform([q](std::span<const double> m) { return std::pow(m[2], 1.0 / q); });
  }
};

inline double critical_exponent(int n, double s, double p) {
  const double q = 2.0 * n + 2.0;
  return q * p / (q - s * p);
}

inline CriticalEstimates critical_estimates(const TestFunction& u, double s, double p, int n, Side side,
                                            const McConfig& cfg) {
  check_exponents(s, p);
  cfg.validate(2 * n + 2);
  const double p_star = critical_exponent(n, s, p);
  const double beta = cfg.beta(2 * n + 2);
  if (side == Side::sphere) {
    const SpherePairSampler sampler(n, s, p, beta);
    return {detail::critical_table(sampler, u, p, p_star, cfg.diagonal_cutoff, cfg, detail::side_seed(cfg, side)), p,
            p_star};
  }
  const HeisenbergPairSampler sampler(n, s, p, beta);
  const auto big_u = cayley::pushforward(u);
  return {detail::critical_table(sampler, big_u, p, p_star, cfg.diagonal_cutoff, cfg, detail::side_seed(cfg, side)), p,
          p_star};
}

/// A [u] + B ||u||_p - ||u||_{p*}; nonnegative means the linear inequality holds on u.
inline Estimate residual_linear(const TestFunction& u, double a_coef, double b_coef, double s, double p, int n,
                                const McConfig& cfg, Side side = Side::sphere) {
  const auto est = critical_estimates(u, s, p, n, side, cfg);
  const double q = est.p_star;
  return est.table.transform([=](std::span<const double> m) {
    return a_coef * std::pow(m[0], 1.0 / p) + b_coef * std::pow(m[1], 1.0 / p) - std::pow(m[2], 1.0 / q);
  });
}

/// A [u]^p + B ||u||_p^p - ||u||_{p*}^p.
inline Estimate residual_power(const TestFunction& u, double a_coef, double b_coef, double s, double p, int n,
                               const McConfig& cfg, Side side = Side::sphere) {
  const auto est = critical_estimates(u, s, p, n, side, cfg);
  const double q = est.p_star;
  return est.table.transform([=](std::span<const double> m) {
    return a_coef * m[0] + b_coef * m[1] - std::pow(m[2], p / q);
  });
}

/// ||u - mean(u)||_p / [u]_{s,p}.
inline Estimate poincare_ratio(const TestFunction& u, double s, double p, int n, const McConfig& cfg) {
  check_exponents(s, p);
  if (u.is_constant) throw DegenerateInput("poincare_ratio: constant function gives 0/0");
  const auto avg = sphere::mean(u, n, cfg);
  const auto centered = functions::shifted(u, -avg.value);
  const auto num = lp_norm(centered, p, n, Side::sphere, cfg);
  const auto semi_p = gagliardo(u, s, p, n, Side::sphere, cfg);
  if (!(semi_p.value > 0.0)) throw DegenerateInput("poincare_ratio: vanishing seminorm estimate");
  const double den = std::pow(semi_p.value, 1.0 / p);
  const double den_se = semi_p.std_error * den / (p * semi_p.value);
  Estimate e;
  e.value = num.value / den;
  e.std_error = e.value * std::hypot(num.std_error / num.value, den_se / den);
  e.samples = cfg.samples;
  return e;
}

}  // namespace crsobolev::estimators
