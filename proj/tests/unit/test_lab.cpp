#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crsobolev/lab/constants.hpp"
#include "crsobolev/lab/constraints.hpp"
#include "crsobolev/lab/params.hpp"
#include "crsobolev/lab/perturbation.hpp"
#include "crsobolev/lab/scalar.hpp"

using namespace crsobolev;
using namespace crsobolev::lab;

namespace {

McConfig config(std::int64_t samples, std::uint64_t seed = 1) {
  McConfig c;
  c.samples = samples;
  c.seed = seed;
  return c;
}

const Check& check_named(const ExperimentReport& r, const std::string& name) {
  const Check* c = r.find_check(name);
  if (!c) throw std::runtime_error("missing check " + name);
  return *c;
}

}  // namespace

TEST(Params, DerivedExponents) {
  const CriticalParams cp(1, 0.5, 2.0);
  EXPECT_EQ(cp.Q(), 4);
  EXPECT_DOUBLE_EQ(cp.p_star, 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(cp.alpha, 0.75);
  EXPECT_THROW(CriticalParams(0, 0.5, 2.0), ArgumentError);
  EXPECT_THROW(CriticalParams(1, 1.0, 2.0), ArgumentError);
  EXPECT_THROW(CriticalParams(1, 0.5, 4.0), ArgumentError);
  EXPECT_THROW(parse_form("cubic"), ArgumentError);
}

TEST(Thresholds, ValuesAndPowerIdentity) {
  const auto t = thresholds(CriticalParams(1, 0.5, 2.0));
  const double omega = 2.0 * std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(t.linear_threshold, std::pow(omega, -0.125), 1e-12);
  EXPECT_NEAR(t.linear_threshold, 0.6888, 1e-4);
  EXPECT_NEAR(t.power_threshold, 0.4744, 1e-4);
  for (int n : {1, 2, 3})
    for (double s : {0.2, 0.5, 0.9})
      for (double p : {1.5, 2.0, 3.0}) {
        const auto r = thresholds(CriticalParams(n, s, p));
        EXPECT_NEAR(std::pow(r.linear_threshold, p), r.power_threshold, 1e-12 * r.power_threshold);
      }
}

TEST(Certificate, FlipsExactlyAtThreshold) {
  for (double p : {1.5, 2.0, 3.0}) {
    const CriticalParams cp(1, 0.5, p);
    for (Form f : {Form::linear, Form::power}) {
      const double thr = threshold_for(thresholds(cp), f);
      auto verdict = [&](double b) { return check_named(constant_violation_certificate(b, f, cp), "constant_certificate"); };
      EXPECT_EQ(verdict(thr - 0.01).verdict, "VIOLATED");
      EXPECT_FALSE(verdict(thr - 0.01).ok);
      EXPECT_EQ(verdict(std::nextafter(thr, 0.0)).verdict, "VIOLATED");
      EXPECT_EQ(verdict(thr).verdict, "BOUNDARY");
      EXPECT_EQ(verdict(std::nextafter(thr, 1.0)).verdict, "SATISFIED");
      EXPECT_EQ(verdict(thr + 0.01).verdict, "SATISFIED");
      const auto* res = constant_violation_certificate(thr - 0.01, f, cp).find("residual_on_constant");
      ASSERT_NE(res, nullptr);
      EXPECT_LT(res->value, 0.0);
    }
  }
}

TEST(Scalar, FunctionF) {
  EXPECT_NEAR(scalar_F(1.5, -1.0), 0.5, 1e-15);
  EXPECT_NEAR(scalar_F(1.5, 1e9), 1.0, 1e-3);
  for (double q : {1.1, 1.5, 1.9}) {
    const double c = scalar_F_sup(q);
    EXPECT_GE(c, 1.0);
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_LE(q_lt_2_excess(q, c, 1.0, -2.0), 1e-12);
  }
  EXPECT_THROW(scalar_F_sup(2.0), ArgumentError);
  EXPECT_THROW(scalar_F_sup(1.0), ArgumentError);
}

TEST(Scalar, PhiOfZeroVector) {
  const double omega = sphere::volume(1).omega;
  const auto rep = scalar_phi_check(3.0, std::vector<double>(10, 0.0), {-1.0, 0.0, 1.0}, omega);
  EXPECT_TRUE(rep.ok());
  const auto rep2 = scalar_phi_check(4.0, {1.0, -2.0, 0.5, 3.0, -1.0}, {-2.0, -0.5, 0.0, 0.7, 2.5}, omega);
  EXPECT_TRUE(rep2.ok());
  EXPECT_THROW(DiscretePhi(1.5, {1.0}, omega), ArgumentError);
}

TEST(Scalar, QGe2OnConstantIsEquality) {
  const double omega = sphere::volume(1).omega;
  EXPECT_NEAR(q_ge_2_excess(3.0, {2.0, 2.0, 2.0}, omega), 0.0, 1e-12);
  EXPECT_LE(q_ge_2_excess(3.0, {2.0, -1.0, 0.5}, omega), 1e-12);
}

TEST(Young, EqualityCase) {
  EXPECT_NEAR(young_excess(2.0, 1.0, 1.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::pow(2.0, 2.0), 4.0, 0.0);
  EXPECT_LT(young_excess(2.0, 3.0, 1.0, 1.0), 0.0);
}

TEST(Young, SplitConstants) {
  const CriticalParams cp(1, 0.5, 3.0);
  const double thr = thresholds(cp).power_threshold;
  const auto y = young_split_constants(0.4, 1.0, cp);
  EXPECT_NEAR(std::pow(1.0 + 1.0 / y.tau_boundary, 2.0) * thr, 0.4, 1e-12);
  EXPECT_GE(y.tau, y.tau_boundary);
  EXPECT_LT(y.effective_b, 0.4);
  EXPECT_NEAR(y.a_b, std::pow(1.0 + y.tau, 2.0), 1e-12);
  const double k = 16.0 * std::log2(y.tau);
  EXPECT_NEAR(k, std::round(k), 1e-9);
  EXPECT_LT(y.tau / std::exp2(1.0 / 16.0), y.tau_boundary * (1.0 + 1e-12));
  EXPECT_THROW(young_split_constants(thr, 1.0, cp), ArgumentError);
  EXPECT_THROW(young_split_constants(0.1, 1.0, cp), ArgumentError);
  EXPECT_THROW(young_split_constants(0.4, 0.0, cp), ArgumentError);
  EXPECT_TRUE(young_split_report(0.4, 1.0, cp, 20000, 3).ok());
}

TEST(Subcritical, Constants) {
  const CriticalParams cp(1, 0.5, 2.0);
  const auto a = subcritical_constants(7.0 / 3.0, 0.1, 1.0, cp);
  EXPECT_NEAR(a.theta, 4.0 / 7.0, 1e-12);
  EXPECT_NEAR(a.delta, 0.1 / (4.0 / 7.0), 1e-12);
  EXPECT_GT(a.c_eps_r, 0.0);
  const auto b = subcritical_constants(2.0, 0.1, 1.0, cp);
  EXPECT_EQ(b.theta, 0.0);
  EXPECT_EQ(b.c_eps_r, 2.0);
  EXPECT_THROW(subcritical_constants(cp.p_star, 0.1, 1.0, cp), ArgumentError);
  EXPECT_THROW(subcritical_constants(1.5, 0.1, 1.0, cp), ArgumentError);
  EXPECT_THROW(subcritical_constants(2.2, 0.0, 1.0, cp), ArgumentError);
}

TEST(Subcritical, ReportOnSmoothSuite) {
  const CriticalParams cp(1, 0.5, 2.0);
  auto suite = functions::smooth_suite(1);
  suite.resize(4);
  const auto rep = subcritical_report(7.0 / 3.0, 0.5, 5.0, cp, suite, config(20000));
  EXPECT_TRUE(rep.ok());
}

TEST(Scalar, LemmasReport) {
  const auto rep = scalar_lemmas_report(2000, 5, sphere::volume(1).omega);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.checks.size(), 4u);
}

TEST(Richardson, ExactForQuadratic) {
  const std::vector<double> h = {0.04, 0.01, 0.0025};
  std::vector<double> f;
  for (double x : h) f.push_back(3.0 - 2.0 * x + 5.0 * x * x);
  EXPECT_NEAR(richardson(h, f).value, 3.0, 1e-12);
  EXPECT_THROW(richardson({1.0}, {}), ArgumentError);
}

TEST(Scan, SmallRunMatchesTargets) {
  const CriticalParams cp(1, 0.5, 3.0);
  const auto phi = functions::coordinate(1, 1);
  ScanOptions opt;
  opt.m2_exact = std::numbers::pi * std::numbers::pi / 2.0;
  const auto rep = perturbation_scan(phi, cp, {0.2, 0.1, 0.05}, config(200000), opt);
  const auto* n = rep.find("coef_N");
  const auto* tn = rep.find("target_coef_N");
  ASSERT_TRUE(n && tn);
  EXPECT_NEAR(n->value, tn->value, 0.05 * tn->value);
  EXPECT_TRUE(check_named(rep, "gap_positive_3_errors").ok);
  EXPECT_EQ(rep.tables.at("values").rows.size(), 7u);
  EXPECT_THROW(perturbation_scan(functions::constant(1.0), cp, {0.2, 0.1}, config(100)), ArgumentError);
  EXPECT_THROW(perturbation_scan(phi, cp, {0.2}, config(100)), ArgumentError);
  EXPECT_THROW(perturbation_scan(phi, cp, {2.0, 0.1}, config(100)), ArgumentError);
}

TEST(Scan, NotApplicableBelowTwo) {
  const CriticalParams cp(1, 0.5, 1.5);
  const auto rep = perturbation_scan(functions::coordinate(1, 1), cp, {0.2, 0.1, 0.05}, config(50000));
  EXPECT_EQ(check_named(rep, "endpoint").verdict, "NOT-APPLICABLE");
}

TEST(Constraints, BumpMomentsMatchMonteCarlo) {
  const auto bm = cap_bump_moments(1, 1.2, 1.0);
  const auto c = functions::bump_centers(1)[0];
  const auto bump = functions::cap_bump(c, 1.2, 1.0);
  const double omega = sphere::volume(1).omega;
  double s = 0.0, s2 = 0.0, t = 0.0, t2 = 0.0;
  const int m = 400000;
  Stream rng(4, 0);
  for (int i = 0; i < m; ++i) {
    const auto x = sphere::sample_point(1, rng);
    const double b = omega * bump(x);
    double dot = 0.0;
    for (int k = 1; k <= 4; ++k) dot += x.xi(k) * c.xi(k);
    s += b;
    s2 += b * b;
    t += b * dot;
    t2 += b * b * dot * dot;
  }
  const double ms = s / m, mt = t / m;
  EXPECT_LT(std::abs(ms - bm.mass), 4.0 * std::sqrt((s2 / m - ms * ms) / m));
  EXPECT_LT(std::abs(mt - bm.lambda), 4.0 * std::sqrt((t2 / m - mt * mt) / m));
}

TEST(Constraints, ProjectionsKillMoments) {
  const auto sb = span_basis(1);
  std::vector<double> c = {0.3, -0.2, 0.7, 0.1, -0.5, 0.9, -0.4, 0.6};
  for (ConstraintClass cls : {ConstraintClass::zero_average, ConstraintClass::orthogonal_to_y}) {
    const auto pc = sb.project(c, cls);
    double avg = 0.0;
    for (std::size_t k = 0; k < pc.size(); ++k) avg += pc[k] * sb.mean_integral[k];
    EXPECT_NEAR(avg, 0.0, 1e-12);
    if (cls == ConstraintClass::orthogonal_to_y) {
      for (int i = 0; i < sb.dim(); ++i) {
        double m = 0.0;
        for (std::size_t k = 0; k < pc.size(); ++k) m += pc[k] * sb.first_integral[k][static_cast<std::size_t>(i)];
        EXPECT_NEAR(m, 0.0, 1e-12);
      }
    }
    // MC mean of the projected function.
    const auto u = sb.build(pc, "p");
    const auto e = sphere::mean([&](const sphere::SpherePoint& x) { return u(x); }, 1, config(200000));
    EXPECT_LT(std::abs(e.value), 4.0 * e.std_error + 1e-12);
  }
  EXPECT_EQ(parse_constraint_class("orthogonal-to-Y"), ConstraintClass::orthogonal_to_y);
  EXPECT_EQ(to_string(ConstraintClass::zero_average), "zero-average");
  EXPECT_THROW(parse_constraint_class("none"), ArgumentError);
}

TEST(Constraints, MomentClass) {
  const CriticalParams cp(1, 0.5, 2.0);
  const auto cfg = config(100000);
  EXPECT_TRUE(moment_class_check(functions::constant(1.0), cp, cfg).in_class);
  const auto c = functions::bump_centers(1)[0];
  const auto pair = functions::linear_combination(
      {{1.0, functions::cap_bump(c, 1.2, 1.0)}, {1.0, functions::cap_bump(-c, 1.2, 1.0)}}, "even_pair");
  EXPECT_TRUE(moment_class_check(pair, cp, cfg).in_class);
  const auto single = moment_class_check(functions::cap_bump(c, 1.2, 1.0), cp, cfg);
  EXPECT_FALSE(single.in_class);
  EXPECT_EQ(single.moments.size(), 4u);
}

TEST(Constraints, CoerciveProbeFinite) {
  const CriticalParams cp(1, 0.5, 2.0);
  const auto sb = span_basis(1);
  const auto rep = coercive_class_probe(ConstraintClass::orthogonal_to_y,
                                        projected_family(sb, ConstraintClass::orthogonal_to_y), 20, cp, config(5000));
  EXPECT_TRUE(rep.ok());
  EXPECT_TRUE(std::isfinite(rep.find("C0_empirical")->value));
  EXPECT_FALSE(rep.tables.at("trace").rows.empty());
}

TEST(Constraints, AdmissibilityUnboundedAndMonotone) {
  const CriticalParams cp(1, 0.5, 2.0);
  const double thr = thresholds(cp).linear_threshold;
  const auto sb = span_basis(1);
  const auto fam = projected_family(sb, ConstraintClass::zero_average);
  const auto rep = admissibility_probe({0.5 * thr, thr, 1.2 * thr, 1.5 * thr}, Form::linear, fam, 12, cp, config(4000));
  EXPECT_TRUE(check_named(rep, "monotone_in_B").ok);
  const auto& rows = rep.tables.at("a_min").rows;
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0][3], 1.0);
  EXPECT_EQ(rows[1][3], 0.0);
  EXPECT_GE(rows[1][1], rows[3][1]);
  EXPECT_THROW(admissibility_probe({}, Form::linear, fam, 12, cp, config(100)), ArgumentError);
}

TEST(Constraints, CutoffEstimate) {
  const CriticalParams cp(1, 0.5, 2.0);
  const auto u = functions::coordinate(1, 1);
  const auto bump = functions::cap_bump(functions::bump_centers(1)[0], 1.2, 1.0);
  const auto rep_b = cutoff_estimate_check(bump, u, cp, config(50000));
  EXPECT_TRUE(rep_b.ok());
  // phi = 1: [u] <= 2^{p-1}[u] + 0.
  auto one = functions::constant(1.0);
  one.lipschitz_bound = 0.0;
  one.sup_bound = 1.0;
  const auto rep = cutoff_estimate_check(one, u, cp, config(50000));
  EXPECT_TRUE(rep.ok());
  EXPECT_NEAR(rep.find("C2")->value, 0.0, 0.0);
  const auto twice = cutoff_estimate_check(functions::scaled(bump, 2.0), u, cp, config(50000));
  EXPECT_NEAR(twice.find("C1")->value, 4.0 * rep_b.find("C1")->value, 1e-12);
  EXPECT_NEAR(twice.find("C2")->value, 4.0 * rep_b.find("C2")->value, 1e-9 * twice.find("C2")->value);
  auto no_bounds = bump;
  no_bounds.lipschitz_bound.reset();
  EXPECT_THROW(cutoff_estimate_check(no_bounds, u, cp, config(100)), ConfigError);
}

TEST(Constraints, DichotomySmall) {
  const CriticalParams cp(1, 0.5, 2.0);
  const auto rep = coercivity_dichotomy(ConstraintClass::zero_average, 16, cp, config(5000));
  EXPECT_TRUE(check_named(rep, "projection_idempotent").ok);
  EXPECT_TRUE(check_named(rep, "constants_in_M").ok);
  EXPECT_TRUE(check_named(rep, "near_constant_exceeds_10x").ok);
}
