#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crsobolev/cayley.hpp"
#include "crsobolev/sphere.hpp"
#include "oracles/oracles.hpp"

using namespace crsobolev;
using sphere::SpherePoint;

TEST(Volume, MatchesClosedForm) {
  for (int n : {1, 2, 3, 4}) {
    const auto m = sphere::volume(n);
    const double want = oracles::sphere_volume_closed_form(n);
    EXPECT_NEAR(m.omega, want, 1e-9 * want) << "n=" << n;
    EXPECT_NEAR(m.density_ratio, 1.0, 1e-9);
  }
  EXPECT_NEAR(sphere::volume(1).omega, 2.0 * std::numbers::pi * std::numbers::pi, 1e-9);
}

TEST(Volume, CachedBitIdentical) {
  EXPECT_EQ(sphere::volume(2).omega, sphere::volume(2).omega);
}

TEST(Volume, InvalidDimensionThrows) { EXPECT_THROW(sphere::volume(0), ArgumentError); }

TEST(Volume, CauchyMonteCarloAgrees) {
  for (int n : {1, 2}) {
    const auto mc = oracles::cayley_jacobian_integral_cauchy(n, 400000, 17 + n);
    EXPECT_LT(std::abs(mc.value - sphere::volume(n).omega), 3.0 * mc.std_error) << "n=" << n;
  }
}

TEST(Distance, Examples) {
  Stream rng(3, 0);
  for (int k = 0; k < 100; ++k) {
    const auto a = sphere::sample_point(2, rng);
    const auto b = sphere::sample_point(2, rng);
    // 1 - <a,a> is a rounding residue near 1e-16, so d(a,a) sits near its square root.
    EXPECT_LT(sphere::cr_distance(a, a), 1e-7);
    EXPECT_NEAR(sphere::cr_distance(a, -a), 2.0, 1e-14);
    EXPECT_NEAR(sphere::cr_distance(a, b), sphere::cr_distance(b, a), 1e-15);
  }
  EXPECT_THROW(sphere::cr_distance(SpherePoint::north(1), SpherePoint::north(2)), DimensionMismatch);
}

TEST(Distance, TriangleInequalityOnSamples) {
  Stream rng(4, 0);
  for (int k = 0; k < 20000; ++k) {
    const auto a = sphere::sample_point(1, rng), b = sphere::sample_point(1, rng), c = sphere::sample_point(1, rng);
    EXPECT_LE(sphere::cr_distance(a, c), sphere::cr_distance(a, b) + sphere::cr_distance(b, c) + 1e-12);
  }
}

TEST(Distance, QuasiTriangleConstantReported) {
  const double k = sphere::quasi_triangle_constant(1, 20000, 6);
  EXPECT_GT(k, 0.5);
  EXPECT_LE(k, 1.0 + 1e-9);
  EXPECT_EQ(k, sphere::quasi_triangle_constant(1, 20000, 6));
  EXPECT_THROW(sphere::quasi_triangle_constant(1, 0, 6), ArgumentError);
}

TEST(Distance, UnitaryInvariance) {
  Stream rng(5, 0);
  for (int k = 0; k < 50; ++k) {
    const auto v = sphere::random_unitary(2, rng);
    const auto a = sphere::sample_point(2, rng), b = sphere::sample_point(2, rng);
    EXPECT_NEAR(sphere::cr_distance(sphere::apply_unitary(v, a), sphere::apply_unitary(v, b)),
                sphere::cr_distance(a, b), 1e-12);
  }
}

TEST(Sampling, UnitNormAndReproducible) {
  const auto pts = sphere::sample_uniform(2, 1000, 42);
  for (const auto& p : pts) EXPECT_NEAR(p.norm(), 1.0, 1e-14);
  const auto again = sphere::sample_uniform(2, 1000, 42);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(pts[i].flat()[k], again[i].flat()[k]);
}

TEST(Mean, MomentsOfCoordinates) {
  McConfig cfg;
  cfg.samples = 1000000;
  const auto m1 = sphere::mean([](const SpherePoint& p) { return p.xi(1); }, 1, cfg);
  EXPECT_LT(std::abs(m1.value), 4.0 * m1.std_error);
  const auto w1 = sphere::mean([](const SpherePoint& p) { return std::norm(p.w(0)); }, 1, cfg);
  EXPECT_LT(std::abs(w1.value - 0.5), 4.0 * w1.std_error);
  const auto re2 = sphere::mean([](const SpherePoint& p) { return p.xi(1) * p.xi(1); }, 1, cfg);
  EXPECT_LT(std::abs(re2.value - 0.25), 4.0 * re2.std_error);
  const auto c = sphere::mean([](const SpherePoint&) { return 3.5; }, 1, cfg);
  EXPECT_NEAR(c.value, 3.5, 1e-12);
}

TEST(Mean, QuadratureVersusWeightedMonteCarlo) {
  // Sphere-side frequency of the Cayley slab |t| <= 1 vs quadrature of J over it.
  McConfig cfg;
  cfg.samples = 400000;
  const cayley::CayleyContext ctx(1);
  const auto frac = sphere::mean(
      [&](const SpherePoint& z) { return std::abs(cayley::forward(ctx, z).t()) <= 1.0 ? 1.0 : 0.0; }, 1, cfg);
  // Independent: int_{|t|<=1} J / omega by quadrature in (r, t).
  const double omega = sphere::volume(1).omega;
  const auto inner = [](double r) {
    const double a = 1 + r * r;
    return quadrature::gauss_kronrod([a](double t) { return 8.0 / std::pow(a * a + t * t, 2); }, -1.0, 1.0, 1e-13)
               .value *
           2.0 * std::numbers::pi * r;
  };
  const double want = quadrature::gauss_kronrod(inner, 0.0, std::numeric_limits<double>::infinity(), 1e-11).value / omega;
  EXPECT_LT(std::abs(frac.value - want), 4.0 * frac.std_error);
}
