#pragma once

// Independent reference computations used only by the tests. None of these
// share code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "crsobolev/functions.hpp"
#include "crsobolev/random.hpp"

namespace oracles {

using cplx = std::complex<double>;

/// 2 pi^{n+1} / n!, the round volume of S^{2n+1}.
inline double sphere_volume_closed_form(int n) {
  return 2.0 * std::pow(std::numbers::pi, n + 1) / std::tgamma(n + 1.0);
}

namespace detail {

/// Exponent vectors (a_1..a_m) with sum = deg.
inline void compositions(int m, int deg, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == m - 1) {
    cur.push_back(deg);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int a = 0; a <= deg; ++a) {
    cur.push_back(a);
    compositions(m, deg - a, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<int>> monomials(int m, int deg) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  if (deg < 0) return out;
  compositions(m, deg, cur, out);
  return out;
}

inline std::uint64_t rank_mod(std::vector<std::vector<std::uint64_t>> a, std::uint64_t prime) {
  auto mulmod = [prime](std::uint64_t x, std::uint64_t y) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * y) % prime);
  };
  auto inv = [&](std::uint64_t x) {
    std::uint64_t r = 1, e = prime - 2;
    while (e) {
      if (e & 1) r = mulmod(r, x);
      x = mulmod(x, x);
      e >>= 1;
    }
    return r;
  };
  std::uint64_t rank = 0;
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    const auto iv = inv(a[rank][c]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || a[r][c] == 0) continue;
      const auto f = mulmod(a[r][c], iv);
      for (std::size_t k = c; k < cols; ++k) a[r][k] = (a[r][k] + prime - mulmod(f, a[rank][k])) % prime;
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// dim of bidegree (j, k) harmonic polynomials on C^{n+1}, computed as
/// dim P_{j,k} - rank of the Laplacian sum_i d^2/dz_i dzbar_i : P_{j,k} -> P_{j-1,k-1}.
/// The rank is computed by elimination modulo two large primes.
inline std::uint64_t dim_harmonic_bruteforce(int j, int k, int n) {
  const int m = n + 1;
  const auto zs = detail::monomials(m, j);
  const auto ws = detail::monomials(m, k);
  const std::uint64_t dom = zs.size() * ws.size();
  if (j == 0 || k == 0) return dom;
  const auto zt = detail::monomials(m, j - 1);
  const auto wt = detail::monomials(m, k - 1);
  auto index_of = [](const std::vector<std::vector<int>>& list, const std::vector<int>& v) {
    return static_cast<std::size_t>(std::find(list.begin(), list.end(), v) - list.begin());
  };
  auto build = [&](std::uint64_t prime) {
    // Rows: target monomials; columns: domain monomials.
    std::vector<std::vector<std::uint64_t>> mat(zt.size() * wt.size(), std::vector<std::uint64_t>(dom, 0));
    for (std::size_t a = 0; a < zs.size(); ++a)
      for (std::size_t b = 0; b < ws.size(); ++b)
        for (int i = 0; i < m; ++i) {
          if (zs[a][static_cast<std::size_t>(i)] == 0 || ws[b][static_cast<std::size_t>(i)] == 0) continue;
          auto za = zs[a];
          auto wb = ws[b];
          const std::uint64_t coef = static_cast<std::uint64_t>(za[static_cast<std::size_t>(i)]) *
                                     static_cast<std::uint64_t>(wb[static_cast<std::size_t>(i)]);
          --za[static_cast<std::size_t>(i)];
          --wb[static_cast<std::size_t>(i)];
          const std::size_t row = index_of(zt, za) * wt.size() + index_of(wt, wb);
          auto& cell = mat[row][a * ws.size() + b];
          cell = (cell + coef) % prime;
        }
    return mat;
  };
  const std::uint64_t r1 = detail::rank_mod(build(1000000007ULL), 1000000007ULL);
  const std::uint64_t r2 = detail::rank_mod(build(998244353ULL), 998244353ULL);
  return dom - std::max(r1, r2);
}

/// Volume of the n = 1 Koranyi unit ball {(x, y, t): (x^2+y^2)^2 + t^2 <= 1}
/// by midpoint cell counting on a cubic grid of `cells` per axis.
inline double koranyi_ball_volume_grid(int cells) {
  const double h = 2.0 / cells;
  std::int64_t inside = 0;
  for (int i = 0; i < cells; ++i) {
    const double x = -1.0 + (i + 0.5) * h;
    for (int j = 0; j < cells; ++j) {
      const double y = -1.0 + (j + 0.5) * h;
      const double r2 = x * x + y * y;
      if (r2 > 1.0) continue;
      for (int k = 0; k < cells; ++k) {
        const double t = -1.0 + (k + 0.5) * h;
        if (r2 * r2 + t * t <= 1.0) ++inside;
      }
    }
  }
  return static_cast<double>(inside) * h * h * h;
}

struct McValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// int_{H^n} J dV with J = 2^{2n+1} / ((1 + |z|^2)^2 + t^2)^{n+1}, sampled from
/// a standard multivariate Cauchy proposal on R^{2n+1}.
inline McValue cayley_jacobian_integral_cauchy(int n, std::int64_t samples, std::uint64_t seed) {
  const int d = 2 * n + 1;
  const double norm_const =
      std::tgamma(0.5 * (d + 1)) / std::pow(std::numbers::pi, 0.5 * (d + 1));
  crsobolev::Stream rng(seed, 0);
  double sum = 0.0;
  double sum2 = 0.0;
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < samples; ++i) {
    const double w = std::abs(rng.normal());
    double r2 = 0.0;
    for (double& v : x) {
      v = rng.normal() / w;
      r2 += v * v;
    }
    const double density = norm_const * std::pow(1.0 + r2, -0.5 * (d + 1));
    double z2 = 0.0;
    for (int k = 0; k < 2 * n; ++k) z2 += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    const double t = x[static_cast<std::size_t>(2 * n)];
    const double a = 1.0 + z2;
    const double jac = std::pow(2.0, 2 * n + 1) / std::pow(a * a + t * t, n + 1);
    const double f = jac / density;
    sum += f;
    sum2 += f * f;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var = sum2 / static_cast<double>(samples) - mean * mean;
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(samples))};
}

/// int_{H^n} (u o Psi^{-1}) J dz dt with the same Cauchy proposal. The inverse
/// Cayley map is written out here rather than taken from the library.
inline McValue cayley_pullback_integral_cauchy(const crsobolev::functions::TestFunction& u, int n,
                                               std::int64_t samples, std::uint64_t seed) {
  const int d = 2 * n + 1;
  const double norm_const = std::tgamma(0.5 * (d + 1)) / std::pow(std::numbers::pi, 0.5 * (d + 1));
  crsobolev::Stream rng(seed, 1);
  double sum = 0.0;
  double sum2 = 0.0;
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> sp(static_cast<std::size_t>(2 * n + 2));
  for (std::int64_t i = 0; i < samples; ++i) {
    const double w = std::abs(rng.normal());
    double r2 = 0.0;
    for (double& v : x) {
      v = rng.normal() / w;
      r2 += v * v;
    }
    const double density = norm_const * std::pow(1.0 + r2, -0.5 * (d + 1));
    double z2 = 0.0;
    for (int k = 0; k < 2 * n; ++k) z2 += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    const double t = x[static_cast<std::size_t>(2 * n)];
    const double a = 1.0 + z2;
    // zeta_j = 2i z_j / (t + i a), zeta_{n+1} = (-t + i(1 - |z|^2)) / (t + i a).
    const std::complex<double> den(t, a);
    for (int j = 0; j < n; ++j) {
      const std::complex<double> z(x[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(n + j)]);
      const auto zeta = std::complex<double>(0.0, 2.0) * z / den;
      sp[static_cast<std::size_t>(2 * j)] = zeta.real();
      sp[static_cast<std::size_t>(2 * j + 1)] = zeta.imag();
    }
    const auto last = std::complex<double>(-t, 1.0 - z2) / den;
    sp[static_cast<std::size_t>(2 * n)] = last.real();
    sp[static_cast<std::size_t>(2 * n + 1)] = last.imag();
    const double jac = std::pow(2.0, 2 * n + 1) / std::pow(a * a + t * t, n + 1);
    const double f = u(crsobolev::sphere::SpherePoint(sp)) * jac / density;
    sum += f;
    sum2 += f * f;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var = sum2 / static_cast<double>(samples) - mean * mean;
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(samples))};
}

struct ProductRule {
  int theta = 10;
  int angle = 12;
  int radial = 16;
  int polar = 16;
  int fiber = 12;
};

namespace detail {

template <int N>
inline void gauss_nodes(double a, double b, std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  x.clear();
  w.clear();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (ab[i] == 0.0) {
      x.push_back(mid);
      w.push_back(half * wt[i]);
    } else {
      x.push_back(mid - half * ab[i]);
      w.push_back(half * wt[i]);
      x.push_back(mid + half * ab[i]);
      w.push_back(half * wt[i]);
    }
  }
}

inline void gauss_rule(int count, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  switch (count) {
    case 8: gauss_nodes<8>(a, b, x, w); break;
    case 10: gauss_nodes<10>(a, b, x, w); break;
    case 12: gauss_nodes<12>(a, b, x, w); break;
    case 16: gauss_nodes<16>(a, b, x, w); break;
    case 20: gauss_nodes<20>(a, b, x, w); break;
    case 24: gauss_nodes<24>(a, b, x, w); break;
    case 30: gauss_nodes<30>(a, b, x, w); break;
    default: gauss_nodes<16>(a, b, x, w); break;
  }
}

}  // namespace detail

/// [u]_{s,p}^p on S^3 (n = 1) by a deterministic product rule.
/// Outer point xi = (cos th e^{ia}, sin th e^{ib}), dV = sin th cos th.
/// Inner point eta = (1 - mu) xi + r e^{i psi} xi_perp, r = sqrt(1 - |1 - mu|^2),
/// for which dV(eta) = dA(mu) dpsi and d(xi, eta) = sqrt(2 |mu|).
/// mu = rho e^{i phi} with rho = 2 cos(phi) t^2 and phi = (pi/2) sin(pi v / 2)
/// to smooth the endpoint behaviour in both variables.
inline double seminorm_product_quadrature_n1(const crsobolev::functions::TestFunction& u, double s, double p,
                                             const ProductRule& rule = {}) {
  using crsobolev::sphere::SpherePoint;
  constexpr double pi = std::numbers::pi;
  std::vector<double> th_x, th_w, t_x, t_w, v_x, v_w;
  detail::gauss_rule(rule.theta, 0.0, 0.5 * pi, th_x, th_w);
  detail::gauss_rule(rule.radial, 0.0, 1.0, t_x, t_w);
  detail::gauss_rule(rule.polar, -1.0, 1.0, v_x, v_w);
  const double kexp = -0.5 * (4.0 + s * p);
  const double da = 2.0 * pi / rule.angle;
  const double dpsi = 2.0 * pi / rule.fiber;
  double total = 0.0;
  for (std::size_t it = 0; it < th_x.size(); ++it) {
    const double th = th_x[it];
    const double w_th = th_w[it] * std::sin(th) * std::cos(th);
    for (int ia = 0; ia < rule.angle; ++ia)
      for (int ib = 0; ib < rule.angle; ++ib) {
        const cplx x1 = std::polar(std::cos(th), (ia + 0.5) * da);
        const cplx x2 = std::polar(std::sin(th), (ib + 0.5) * da);
        const cplx xi_arr[2] = {x1, x2};
        const SpherePoint xi = SpherePoint::from_complex(xi_arr);
        const double u0 = u(xi);
        const cplx p1 = -std::conj(x2);
        const cplx p2 = std::conj(x1);
        double inner = 0.0;
        for (std::size_t iv = 0; iv < v_x.size(); ++iv) {
          const double v = v_x[iv];
          const double phi = 0.5 * pi * std::sin(0.5 * pi * v);
          const double dphi = 0.25 * pi * pi * std::cos(0.5 * pi * v);
          const double c = std::cos(phi);
          for (std::size_t itt = 0; itt < t_x.size(); ++itt) {
            const double t = t_x[itt];
            const double rho = 2.0 * c * t * t;
            const double jac = 8.0 * c * c * t * t * t * dphi;
            const cplx mu = std::polar(rho, phi);
            const cplx a = 1.0 - mu;
            const double r = std::sqrt(std::max(0.0, 1.0 - std::norm(a)));
            const double ker = std::pow(2.0 * rho, kexp);
            double ring = 0.0;
            for (int ip = 0; ip < rule.fiber; ++ip) {
              const cplx e = std::polar(r, (ip + 0.5) * dpsi);
              const cplx eta_arr[2] = {a * x1 + e * p1, a * x2 + e * p2};
              ring += std::pow(std::abs(u(SpherePoint::from_complex(eta_arr)) - u0), p);
            }
            inner += v_w[iv] * t_w[itt] * jac * ker * ring * dpsi;
          }
        }
        total += w_th * da * da * inner;
      }
  }
  return total;
}

}  // namespace oracles
