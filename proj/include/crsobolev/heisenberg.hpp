#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "crsobolev/errors.hpp"
#include "crsobolev/quadrature.hpp"
#include "crsobolev/random.hpp"

namespace crsobolev::heisenberg {

/// Complex dimension n and homogeneous dimension Q = 2n + 2.
struct GroupParams {
  int n = 1;

  explicit GroupParams(int n_) : n(n_) {
    if (n < 1) throw ArgumentError("GroupParams: n must be >= 1");
  }
  int Q() const { return 2 * n + 2; }
};

/// A point (z, t) of H^n stored flat as x_1..x_n, y_1..y_n, t with z = x + iy.
class HeisenbergPoint {
 public:
  HeisenbergPoint() = default;

  /// Identity element of H^n.
  explicit HeisenbergPoint(int n) : data_(static_cast<std::size_t>(2 * n + 1), 0.0) {
    if (n < 1) throw ArgumentError("HeisenbergPoint: n must be >= 1");
  }

  HeisenbergPoint(std::span<const double> x, std::span<const double> y, double t) {
    if (x.size() != y.size() || x.empty()) throw ArgumentError("HeisenbergPoint: x and y must have equal nonzero length");
    data_.reserve(2 * x.size() + 1);
    data_.insert(data_.end(), x.begin(), x.end());
    data_.insert(data_.end(), y.begin(), y.end());
    data_.push_back(t);
    check_finite();
  }

  static HeisenbergPoint from_flat(std::vector<double> flat) {
    if (flat.size() < 3 || flat.size() % 2 == 0) throw ArgumentError("HeisenbergPoint: flat size must be 2n+1");
    HeisenbergPoint p;
    p.data_ = std::move(flat);
    p.check_finite();
    return p;
  }

  int n() const { return static_cast<int>(data_.size() / 2); }
  double x(int j) const { return data_[static_cast<std::size_t>(j)]; }
  double y(int j) const { return data_[static_cast<std::size_t>(n() + j)]; }
  double t() const { return data_.back(); }
  double& x(int j) { return data_[static_cast<std::size_t>(j)]; }
  double& y(int j) { return data_[static_cast<std::size_t>(n() + j)]; }
  double& t() { return data_.back(); }

  std::span<const double> flat() const { return data_; }

  /// |z|^2
  double z_norm_sq() const {
    double s = 0.0;
    for (int j = 0; j < n(); ++j) s += x(j) * x(j) + y(j) * y(j);
    return s;
  }

  bool operator==(const HeisenbergPoint&) const = default;

 private:
  void check_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) throw ArgumentError("HeisenbergPoint: non-finite component");
  }

  std::vector<double> data_;
};

inline void require_same_dim(const HeisenbergPoint& a, const HeisenbergPoint& b) {
  if (a.n() != b.n()) throw DimensionMismatch(a.n(), b.n());
}

/// (z, t) o (z', t') = (z + z', t + t' + 2 Im(z . conj z')).
inline HeisenbergPoint group_law(const HeisenbergPoint& a, const HeisenbergPoint& b) {
  require_same_dim(a, b);
  HeisenbergPoint out(a.n());
  double im = 0.0;
  for (int j = 0; j < a.n(); ++j) {
    out.x(j) = a.x(j) + b.x(j);
    out.y(j) = a.y(j) + b.y(j);
    // Im((xa + i ya)(xb - i yb))
    im += a.y(j) * b.x(j) - a.x(j) * b.y(j);
  }
  out.t() = a.t() + b.t() + 2.0 * im;
  return out;
}

inline HeisenbergPoint group_inverse(const HeisenbergPoint& a) {
  HeisenbergPoint out(a.n());
  for (int j = 0; j < a.n(); ++j) {
    out.x(j) = -a.x(j);
    out.y(j) = -a.y(j);
  }
  out.t() = -a.t();
  return out;
}

/// Parabolic dilation (z, t) -> (lambda z, lambda^2 t).
inline HeisenbergPoint dilate(double lambda, const HeisenbergPoint& a) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("dilate: lambda must be positive");
  HeisenbergPoint out(a.n());
  for (int j = 0; j < a.n(); ++j) {
    out.x(j) = lambda * a.x(j);
    out.y(j) = lambda * a.y(j);
  }
  out.t() = lambda * lambda * a.t();
  return out;
}

/// Koranyi gauge (|z|^4 + t^2)^{1/4}.
inline double koranyi_gauge(const HeisenbergPoint& a) {
  const double r2 = a.z_norm_sq();
  return std::pow(r2 * r2 + a.t() * a.t(), 0.25);
}

/// rho(a, b) = gauge(b^{-1} o a). Left invariant.
inline double distance(const HeisenbergPoint& a, const HeisenbergPoint& b) {
  require_same_dim(a, b);
  return koranyi_gauge(group_law(group_inverse(b), a));
}

/// |B_1(0)| for the Koranyi gauge, integrated numerically once per n.
/// The ball is {|z|^4 + t^2 < 1}, so |B_1| = area(S^{2n-1}) * int_0^1 r^{2n-1} 2 sqrt(1 - r^4) dr.
inline double unit_ball_volume(int n) {
  if (n < 1) throw ArgumentError("unit_ball_volume: n must be >= 1");
  static std::mutex mutex;
  static std::map<int, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  const double sphere_area = 2.0 * std::pow(std::numbers::pi, n) / std::tgamma(static_cast<double>(n));
  const auto radial = quadrature::tanh_sinh(
      [n](double r) { return std::pow(r, 2 * n - 1) * 2.0 * std::sqrt(std::max(0.0, 1.0 - r * r * r * r)); },
      0.0, 1.0, 1e-13);
  const double vol = sphere_area * radial.value;
  cache.emplace(n, vol);
  return vol;
}

/// Uniform point of B_1(0) by rejection from the box [-1,1]^{2n} x [-1,1].
inline HeisenbergPoint sample_unit_ball(int n, Stream& rng) {
  HeisenbergPoint p(n);
  for (;;) {
    for (int j = 0; j < n; ++j) {
      p.x(j) = 2.0 * rng.uniform() - 1.0;
      p.y(j) = 2.0 * rng.uniform() - 1.0;
    }
    p.t() = 2.0 * rng.uniform() - 1.0;
    const double r2 = p.z_norm_sq();
    if (r2 * r2 + p.t() * p.t() < 1.0) return p;
  }
}

/// `count` uniform points of the gauge ball B_r(center). Point i depends only
/// on (seed, i).
inline std::vector<HeisenbergPoint> sample_ball(double r, const HeisenbergPoint& center, std::int64_t count,
                                                std::uint64_t seed) {
  if (!(r > 0.0)) throw ArgumentError("sample_ball: r must be positive");
  if (count < 1) throw ArgumentError("sample_ball: count must be >= 1");
  std::vector<HeisenbergPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    Stream rng(seed, static_cast<std::uint64_t>(i));
    out.push_back(group_law(center, dilate(r, sample_unit_ball(center.n(), rng))));
  }
  return out;
}

/// Proposal h = delta_R(g) with g uniform in B_1(0) and R on (0, r_max) with
/// density proportional to R^{Q-1-beta}. The induced density of h with
/// respect to Haar measure behaves like gauge(h)^{-beta} near the identity.
class LocalGaugeProposal {
 public:
  LocalGaugeProposal(int n, double beta) : n_(n), q_(2 * n + 2), beta_(beta), ball_(unit_ball_volume(n)) {
    if (!(beta >= 0.0 && beta < q_)) throw ArgumentError("LocalGaugeProposal: beta must lie in [0, Q)");
  }

  HeisenbergPoint sample(Stream& rng, double r_max) const {
    const double gamma = q_ - 1.0 - beta_;
    const double radius = r_max * std::pow(rng.uniform_open(), 1.0 / (gamma + 1.0));
    return dilate(radius, sample_unit_ball(n_, rng));
  }

  /// Density of h with respect to Lebesgue (Haar) measure on H^n, as a
  /// function of gauge(h).
  double density_at_gauge(double g, double r_max) const {
    if (g >= r_max) return 0.0;
    const double gamma = q_ - 1.0 - beta_;
    const double norm = (gamma + 1.0) / (std::pow(r_max, gamma + 1.0) * ball_);
    if (beta_ == 0.0) return norm * std::log(r_max / g);
    return norm * (std::pow(g, -beta_) - std::pow(r_max, -beta_)) / beta_;
  }

  double density(const HeisenbergPoint& h, double r_max) const { return density_at_gauge(koranyi_gauge(h), r_max); }

 private:
  int n_;
  int q_;
  double beta_;
  double ball_;
};

}  // namespace crsobolev::heisenberg
