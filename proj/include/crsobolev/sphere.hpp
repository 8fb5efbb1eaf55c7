#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/monte_carlo.hpp"
#include "crsobolev/quadrature.hpp"
#include "crsobolev/random.hpp"

namespace crsobolev::sphere {

using cplx = std::complex<double>;

/// Unit vector w in C^{n+1}, stored as (Re w_1, Im w_1, ..., Re w_{n+1}, Im w_{n+1}).
/// Real coordinate xi_i (1-based) is entry i-1.
class SpherePoint {
 public:
  SpherePoint() = default;

  /// Normalizes the input onto the sphere.
  explicit SpherePoint(std::vector<double> coords) : data_(std::move(coords)) {
    if (data_.size() < 4 || data_.size() % 2 != 0) throw ArgumentError("SpherePoint: size must be 2n+2 with n >= 1");
    double s = 0.0;
    for (double v : data_) {
      if (!std::isfinite(v)) throw ArgumentError("SpherePoint: non-finite coordinate");
      s += v * v;
    }
    if (!(s > 0.0)) throw ArgumentError("SpherePoint: zero vector");
    const double inv = 1.0 / std::sqrt(s);
    for (double& v : data_) v *= inv;
  }

  static SpherePoint from_complex(std::span<const cplx> w) {
    std::vector<double> c;
    c.reserve(2 * w.size());
    for (const auto& z : w) {
      c.push_back(z.real());
      c.push_back(z.imag());
    }
    return SpherePoint(std::move(c));
  }

  /// North pole (0, ..., 0, 1).
  static SpherePoint north(int n) {
    std::vector<double> c(static_cast<std::size_t>(2 * n + 2), 0.0);
    c[static_cast<std::size_t>(2 * n)] = 1.0;
    return SpherePoint(std::move(c));
  }

  /// South pole (0, ..., 0, -1).
  static SpherePoint south(int n) {
    std::vector<double> c(static_cast<std::size_t>(2 * n + 2), 0.0);
    c[static_cast<std::size_t>(2 * n)] = -1.0;
    return SpherePoint(std::move(c));
  }

  int n() const { return static_cast<int>(data_.size() / 2) - 1; }
  /// Complex coordinate w_j, 0-based.
  cplx w(int j) const { return {data_[static_cast<std::size_t>(2 * j)], data_[static_cast<std::size_t>(2 * j + 1)]}; }
  /// Real coordinate xi_i, 1-based as in R^{2n+2}.
  double xi(int i) const { return data_[static_cast<std::size_t>(i - 1)]; }
  std::span<const double> flat() const { return data_; }

  SpherePoint operator-() const {
    SpherePoint p = *this;
    for (double& v : p.data_) v = -v;
    return p;
  }

  double norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

 private:
  std::vector<double> data_;
};

inline void require_same_dim(const SpherePoint& a, const SpherePoint& b) {
  if (a.n() != b.n()) throw DimensionMismatch(a.n(), b.n());
}

/// <a, b> = sum_j a_j conj(b_j).
inline cplx inner(const SpherePoint& a, const SpherePoint& b) {
  require_same_dim(a, b);
  const auto fa = a.flat();
  const auto fb = b.flat();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < fa.size(); k += 2) {
    re += fa[k] * fb[k] + fa[k + 1] * fb[k + 1];
    im += fa[k + 1] * fb[k] - fa[k] * fb[k + 1];
  }
  return {re, im};
}

/// CR distance d(a, b) = sqrt(2) |1 - <a, b>|^{1/2}.
inline double cr_distance(const SpherePoint& a, const SpherePoint& b) {
  return std::sqrt(2.0 * std::abs(cplx(1.0, 0.0) - inner(a, b)));
}

/// d as a function of mu = 1 - <a, b>.
inline double distance_from_mu(double abs_mu) { return std::sqrt(2.0 * abs_mu); }

/// Uniform point on S^{2n+1} by normalizing a standard Gaussian vector.
inline SpherePoint sample_point(int n, Stream& rng) {
  std::vector<double> c(static_cast<std::size_t>(2 * n + 2));
  for (;;) {
    double s = 0.0;
    for (double& v : c) {
      v = rng.normal();
      s += v * v;
    }
    if (s > 1e-200) break;
  }
  return SpherePoint(std::move(c));
}

/// `count` uniform points; point i depends only on (seed, i).
inline std::vector<SpherePoint> sample_uniform(int n, std::int64_t count, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample_uniform: n must be >= 1");
  if (count < 1) throw ArgumentError("sample_uniform: count must be >= 1");
  std::vector<SpherePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    out.push_back(sample_point(n, rng));
  }
  return out;
}

/// Round surface area 2 pi^{n+1} / n! of S^{2n+1}.
inline double round_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, n + 1) / std::tgamma(n + 1.0);
}

/// Total pseudohermitian volume omega_{2n+1} and its ratio to round measure.
struct SphereMeasure {
  int n = 1;
  double omega = 0.0;
  double density_ratio = 0.0;
  double quadrature_error = 0.0;
};

/// omega_{2n+1} = int_{H^n} J_c dz dt by nested adaptive Gauss-Kronrod on the
/// reduced (|z|, t) integral. Cached per n; bit-identical across calls.
inline SphereMeasure volume(int n) {
  if (n < 1) throw ArgumentError("volume: n must be >= 1");
  static std::mutex mutex;
  static std::map<int, SphereMeasure> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  constexpr double tol = 1e-10;
  const double scale = std::ldexp(1.0, 2 * n + 1);
  const double s_area = 2.0 * std::pow(std::numbers::pi, n) / std::tgamma(static_cast<double>(n));
  const double half_pi = 0.5 * std::numbers::pi;
  // Both half-lines are mapped to (0, pi/2): t = a tan(theta), r = tan(phi).
  double inner_err = 0.0;
  auto radial = [&](double phi) {
    const double r = std::tan(phi);
    const double sec2 = 1.0 + r * r;
    const double a = sec2;  // 1 + r^2
    auto jac_t = [&](double theta) {
      const double tt = a * std::tan(theta);
      const double c = std::cos(theta);
      return scale / std::pow(a * a + tt * tt, n + 1) * a / (c * c);
    };
    const auto in = quadrature::gauss_kronrod(jac_t, 0.0, half_pi, tol * 1e-2, 1e-13);
    inner_err = std::max(inner_err, in.error);
    return 2.0 * in.value * std::pow(r, 2 * n - 1) * sec2;
  };
  const auto out = quadrature::gauss_kronrod(radial, 0.0, half_pi, tol, 1e-13);
  SphereMeasure m;
  m.n = n;
  m.omega = s_area * out.value;
  m.quadrature_error = s_area * (out.error + inner_err);
  if (!(m.quadrature_error <= tol * std::max(1.0, m.omega)))
    throw NumericError("volume: quadrature tolerance not met", m.quadrature_error);
  m.density_ratio = m.omega / round_area(n);
  cache.emplace(n, m);
  return m;
}

/// Monte Carlo estimate of the average (1/omega) int u dV.
template <class Fn>
Estimate mean(const Fn& u, int n, const McConfig& cfg) {
  cfg.validate(2 * n + 2);
  const auto table = run_batches(cfg, salted(cfg.seed, StreamSalt::sphere), 1,
                                 [&](Stream& rng, std::span<double> out) { out[0] = u(sample_point(n, rng)); });
  return table.component(0);
}

/// Largest observed d(a,c) / (d(a,b) + d(b,c)) over random triples. Half the
/// triples are uniform, half are clustered around a random point where the
/// ratio is most sensitive. An empirical lower bound for the quasi-triangle
/// constant, never a proof of it.
inline double quasi_triangle_constant(int n, std::int64_t triples, std::uint64_t seed) {
  if (triples < 1) throw ArgumentError("quasi_triangle_constant: triples must be >= 1");
  double worst = 0.0;
  const auto dim = static_cast<std::size_t>(2 * n + 2);
  for (std::int64_t i = 0; i < triples; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    SpherePoint a = sample_point(n, rng), b = sample_point(n, rng), c = sample_point(n, rng);
    if (i % 2 == 1) {
      const double scale = std::pow(10.0, -4.0 * rng.uniform());
      auto near = [&](const SpherePoint& base) {
        std::vector<double> v(base.flat().begin(), base.flat().end());
        for (std::size_t k = 0; k < dim; ++k) v[k] += scale * rng.normal();
        return SpherePoint(std::move(v));
      };
      b = near(a);
      c = near(a);
    }
    const double den = cr_distance(a, b) + cr_distance(b, c);
    if (den > 0.0) worst = std::max(worst, cr_distance(a, c) / den);
  }
  return worst;
}

/// Unitary image V a where V is given column-major as (n+1)x(n+1) complex entries.
inline SpherePoint apply_unitary(std::span<const cplx> v, const SpherePoint& a) {
  const int m = a.n() + 1;
  std::vector<cplx> w(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    cplx s{};
    for (int j = 0; j < m; ++j) s += v[static_cast<std::size_t>(j * m + i)] * a.w(j);
    w[static_cast<std::size_t>(i)] = s;
  }
  return SpherePoint::from_complex(w);
}

/// Haar-random unitary (Gram-Schmidt on a complex Gaussian matrix), column-major.
inline std::vector<cplx> random_unitary(int n, Stream& rng) {
  const int m = n + 1;
  std::vector<cplx> v(static_cast<std::size_t>(m * m));
  for (auto& z : v) z = {rng.normal(), rng.normal()};
  for (int c = 0; c < m; ++c) {
    auto col = [&](int k, int i) -> cplx& { return v[static_cast<std::size_t>(k * m + i)]; };
    for (int k = 0; k < c; ++k) {
      cplx proj{};
      for (int i = 0; i < m; ++i) proj += std::conj(col(k, i)) * col(c, i);
      for (int i = 0; i < m; ++i) col(c, i) -= proj * col(k, i);
    }
    double nrm = 0.0;
    for (int i = 0; i < m; ++i) nrm += std::norm(col(c, i));
    nrm = std::sqrt(nrm);
    for (int i = 0; i < m; ++i) col(c, i) /= nrm;
  }
  return v;
}

}  // namespace crsobolev::sphere
