#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crsobolev/estimators.hpp"
#include "crsobolev/functions.hpp"
#include "oracles/oracles.hpp"

using namespace crsobolev;
using estimators::Side;

namespace {

McConfig config(std::int64_t samples, std::uint64_t seed = 1) {
  McConfig c;
  c.samples = samples;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(LpNorm, ConstantIsExact) {
  const double omega = sphere::volume(1).omega;
  for (double r : {1.0, 2.0, 3.5}) {
    const auto e = estimators::lp_norm(functions::constant(-2.0), r, 1, Side::sphere, config(1000));
    EXPECT_NEAR(e.value, 2.0 * std::pow(omega, 1.0 / r), 1e-12);
  }
  EXPECT_THROW(estimators::lp_norm(functions::constant(1.0), 0.5, 1, Side::sphere, config(1000)), ArgumentError);
}

TEST(LpNorm, SidesAgree) {
  for (const auto& u : functions::smooth_suite(1)) {
    const auto s = estimators::lp_norm(u, 3.0, 1, Side::sphere, config(200000));
    const auto h = estimators::lp_norm(u, 3.0, 1, Side::heisenberg, config(200000));
    EXPECT_TRUE(agree_within(s, h, 3.0)) << u.label << ": " << s.value << " vs " << h.value;
  }
}

TEST(Gagliardo, Homogeneity) {
  const auto u = functions::smooth_suite(1)[5];
  for (double p : {1.5, 2.0, 3.0}) {
    const auto a = estimators::gagliardo(u, 0.5, p, 1, Side::sphere, config(50000));
    const auto b = estimators::gagliardo(functions::scaled(u, -2.5), 0.5, p, 1, Side::sphere, config(50000));
    EXPECT_NEAR(b.value, std::pow(2.5, p) * a.value, 1e-12 * b.value);
  }
}

TEST(Gagliardo, TranslationKill) {
  for (const auto& u : functions::smooth_suite(1)) {
    const auto a = estimators::gagliardo(u, 0.5, 2.0, 1, Side::sphere, config(20000));
    const auto b = estimators::gagliardo(functions::shifted(u, 7.25), 0.5, 2.0, 1, Side::sphere, config(20000));
    EXPECT_NEAR(b.value, a.value, 1e-10 * a.value) << u.label;
  }
}

TEST(Gagliardo, DeterministicAcrossThreads) {
  const auto u = functions::coordinate(1, 2);
  auto c1 = config(64000, 9);
  auto c3 = c1;
  c3.threads = 3;
  const auto a = estimators::gagliardo(u, 0.3, 2.5, 1, Side::sphere, c1);
  const auto b = estimators::gagliardo(u, 0.3, 2.5, 1, Side::sphere, c3);
  const auto c = estimators::gagliardo(u, 0.3, 2.5, 1, Side::sphere, c1);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.value, c.value);
  const auto d = estimators::gagliardo(u, 0.3, 2.5, 1, Side::sphere, config(64000, 10));
  EXPECT_NE(a.value, d.value);
}

TEST(Gagliardo, ImportanceExponentDoesNotBias) {
  const auto u = functions::smooth_suite(1)[4];
  const auto base = estimators::gagliardo(u, 0.5, 2.0, 1, Side::sphere, config(400000));
  for (double beta : {0.0, 1.0, 2.0}) {
    auto c = config(400000, 3);
    c.importance_exponent = beta;
    const auto e = estimators::gagliardo(u, 0.5, 2.0, 1, Side::sphere, c);
    EXPECT_TRUE(agree_within(base, e, 3.0)) << "beta " << beta << ": " << e.value << " vs " << base.value;
  }
}

TEST(Gagliardo, MatchesProductQuadratureOracle) {
  const auto u = functions::coordinate(1, 1);
  const double oracle = oracles::seminorm_product_quadrature_n1(u, 0.5, 2.0);
  const auto e = estimators::gagliardo(u, 0.5, 2.0, 1, Side::sphere, config(400000));
  EXPECT_NEAR(e.value, oracle, 0.05 * oracle);
  const auto h = estimators::gagliardo(u, 0.5, 2.0, 1, Side::heisenberg, config(400000));
  EXPECT_TRUE(agree_within(e, h, 3.0)) << e.value << " vs " << h.value;
}

TEST(Gagliardo, DiagonalCutoffTail) {
  const auto u = functions::coordinate(1, 1);
  const auto full = estimators::gagliardo(u, 0.5, 2.0, 1, Side::sphere, config(200000));
  auto c = config(200000);
  c.diagonal_cutoff = 0.05;
  const auto cut = estimators::gagliardo(u, 0.5, 2.0, 1, Side::sphere, c);
  EXPECT_GT(cut.tail_bound, 0.0);
  EXPECT_LE(cut.value, full.value + 3.0 * combined_se(cut, full));
  EXPECT_GE(cut.value + cut.tail_bound, full.value - 3.0 * combined_se(cut, full));
  functions::TestFunction no_lip = u;
  no_lip.lipschitz_bound.reset();
  EXPECT_THROW(estimators::gagliardo(no_lip, 0.5, 2.0, 1, Side::sphere, c), ConfigError);
}

TEST(NearDiagonalMass, MatchesMonteCarlo) {
  // int_{d<delta} d^{-kappa} dV by uniform sampling around the north pole.
  const int n = 1;
  const double kappa = 2.5, delta = 1.2;
  const double want = estimators::near_diagonal_mass(n, kappa, delta);
  const double omega = sphere::volume(n).omega;
  Stream rng(8, 0);
  const auto north = sphere::SpherePoint::north(n);
  const std::int64_t m = 1000000;
  double s = 0.0, s2 = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    const double d = sphere::cr_distance(sphere::sample_point(n, rng), north);
    const double v = d < delta ? omega * std::pow(d, -kappa) : 0.0;
    s += v;
    s2 += v * v;
  }
  const double mean = s / m;
  const double se = std::sqrt((s2 / m - mean * mean) / m);
  EXPECT_LT(std::abs(mean - want), 4.0 * se);
  EXPECT_THROW(estimators::near_diagonal_mass(n, 4.0, 1.0), ArgumentError);
}

TEST(Residuals, ConstantsAtThreshold) {
  const double omega = sphere::volume(1).omega;
  const double s = 0.5, p = 2.0;
  const double lin = std::pow(omega, -s / 4.0);
  const double pow_thr = std::pow(omega, -s * p / 4.0);
  const auto one = functions::constant(1.0);
  EXPECT_NEAR(estimators::residual_linear(one, 3.0, lin, s, p, 1, config(1000)).value, 0.0, 1e-12);
  EXPECT_LT(estimators::residual_linear(one, 3.0, 0.9 * lin, s, p, 1, config(1000)).value, 0.0);
  EXPECT_NEAR(estimators::residual_power(one, 3.0, pow_thr, s, p, 1, config(1000)).value, 0.0, 1e-12);
  EXPECT_LT(estimators::residual_power(one, 3.0, 0.9 * pow_thr, s, p, 1, config(1000)).value, 0.0);
}

TEST(Residuals, MeanZeroWithLargeA) {
  const auto u = functions::coordinate(1, 3);
  const auto r = estimators::residual_linear(u, 1.0, 0.0, 0.5, 2.0, 1, config(100000));
  EXPECT_GT(r.value, 3.0 * r.std_error);
}

TEST(Poincare, FiniteAndShiftInvariant) {
  const auto u = functions::coordinate(1, 1);
  const auto a = estimators::poincare_ratio(u, 0.5, 2.0, 1, config(100000));
  EXPECT_TRUE(std::isfinite(a.value));
  EXPECT_GT(a.value, 0.0);
  const auto b = estimators::poincare_ratio(functions::shifted(u, 3.0), 0.5, 2.0, 1, config(100000));
  EXPECT_NEAR(a.value, b.value, 1e-9 * a.value);
  EXPECT_THROW(estimators::poincare_ratio(functions::constant(1.0), 0.5, 2.0, 1, config(1000)), DegenerateInput);
}

TEST(Config, Validation) {
  auto c = config(10);
  c.chunk = 1;
  EXPECT_THROW(c.validate(4), ArgumentError);
  c = config(10);
  c.importance_exponent = 4.0;
  EXPECT_THROW(c.validate(4), ArgumentError);
  EXPECT_THROW(estimators::gagliardo(functions::coordinate(1, 1), 1.2, 2.0, 1, Side::sphere, config(100)), ArgumentError);
}
