#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cli/cli.hpp"

namespace crsobolev::cli {

namespace {

using lab::CriticalParams;
using nlohmann::json;

std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

std::string fmt(double v) { return format_number(v); }

/// MC value of the same reduced (|z|, t) integral the volume quadrature
/// evaluates, drawn uniformly on (0, pi/2)^2 after the tangent substitutions.
Estimate volume_monte_carlo(int n, const McConfig& cfg) {
  const double half_pi = 0.5 * std::numbers::pi;
  const double s_area = 2.0 * std::pow(std::numbers::pi, n) / std::tgamma(static_cast<double>(n));
  const double scale = std::ldexp(1.0, 2 * n + 1);
  const auto table = run_batches(cfg, salted(cfg.seed ^ 0x701ULL, StreamSalt::heisenberg), 1,
                                 [&](Stream& rng, std::span<double> out) {
                                   const double phi = half_pi * rng.uniform();
                                   const double theta = half_pi * rng.uniform();
                                   const double r = std::tan(phi);
                                   const double a = 1.0 + r * r;
                                   const double tt = a * std::tan(theta);
                                   const double c = std::cos(theta);
                                   const double jac = scale / std::pow(a * a + tt * tt, n + 1) * a / (c * c);
                                   out[0] = s_area * half_pi * half_pi * 2.0 * jac * std::pow(r, 2 * n - 1) * a;
                                 });
  return table.component(0);
}

ExperimentReport cmd_volume(const RunConfig& cfg) {
  const auto m = sphere::volume(cfg.n);
  ExperimentReport rep("volume");
  rep.params = {{"n", cfg.n}, {"samples", cfg.mc.samples}, {"seed", cfg.mc.seed}};
  rep.quadrature("omega", m.omega, m.quadrature_error);
  rep.analytic("round_area", sphere::round_area(cfg.n));
  rep.quadrature("density_ratio", m.density_ratio, m.quadrature_error / sphere::round_area(cfg.n));
  const auto mc = volume_monte_carlo(cfg.n, cfg.mc);
  rep.monte_carlo("omega_mc", mc);
  const std::int64_t triples = std::max<std::int64_t>(cfg.mc.samples / 10, 1);
  rep.quantities.push_back({"quasi_triangle_K", sphere::quasi_triangle_constant(cfg.n, triples, cfg.mc.seed), 0.0,
                            Provenance::monte_carlo, triples});
  rep.check("quadrature_tolerance", m.quadrature_error <= 1e-10 * m.omega);
  rep.check("mc_agrees_3se", std::abs(mc.value - m.omega) <= 3.0 * mc.std_error,
            "diff " + fmt(mc.value - m.omega) + ", se " + fmt(mc.std_error));
  return rep;
}

ExperimentReport cmd_verify_cayley(const RunConfig& cfg) {
  const int n = cfg.n;
  const CriticalParams cp(n, cfg.s, cfg.p);
  const auto points = cfg.options.at("round_trip_points").get<std::int64_t>();
  const double guard = cfg.options.at("pole_skip").get<double>();
  ExperimentReport rep("verify-cayley");
  rep.params = cp.to_json();
  rep.params["samples"] = cfg.mc.samples;
  rep.params["seed"] = cfg.mc.seed;
  rep.params["round_trip_points"] = points;

  const cayley::CayleyContext ctx(n);
  double err_h = 0.0;
  double err_s = 0.0;
  std::int64_t skipped = 0;
  for (std::int64_t i = 0; i < points; ++i) {
    Stream rng(salted(cfg.mc.seed ^ 0x7277ULL, StreamSalt::heisenberg), static_cast<std::uint64_t>(i));
    const auto a = cayley::sample_weighted(n, rng);
    const auto back = cayley::forward(ctx, cayley::inverse(a));
    for (std::size_t k = 0; k < a.flat().size(); ++k)
      err_h = std::max(err_h, std::abs(back.flat()[k] - a.flat()[k]) / std::max(1.0, std::abs(a.flat()[k])));
    const auto z = sphere::sample_point(n, rng);
    if (std::abs(1.0 + z.w(n)) < guard) {
      ++skipped;
      continue;
    }
    const auto zz = cayley::inverse(cayley::forward(ctx, z));
    for (std::size_t k = 0; k < z.flat().size(); ++k) err_s = std::max(err_s, std::abs(zz.flat()[k] - z.flat()[k]));
  }
  rep.analytic("round_trip_error_H", err_h);
  rep.analytic("round_trip_error_S", err_s);
  rep.analytic("round_trip_pole_skipped", static_cast<double>(skipped));
  rep.check("round_trip", err_h <= 1e-12 && err_s <= 1e-12);

  const double omega = sphere::volume(n).omega;
  Table tab{{"member", "int_S", "int_S_se", "int_H", "int_H_se", "Lp_S", "Lp_H", "Lq_S", "Lq_H", "semi_S", "semi_S_se",
             "semi_H", "semi_H_se"},
            {}};
  int idx = 0;
  for (const auto& u : functions::standard_suite(n)) {
    const std::string tag = "[" + std::to_string(idx) + ":" + u.label + "]";
    // Change of variables: int_S u dV against int_H U J_c.
    const auto big_u = cayley::pushforward(u);
    McConfig c1 = cfg.mc;
    const auto t_s = run_batches(c1, salted(cfg.mc.seed ^ 0xC0ULL, StreamSalt::sphere), 1,
                                 [&](Stream& rng, std::span<double> out) { out[0] = omega * u(sphere::sample_point(n, rng)); });
    const auto t_h = run_batches(c1, salted(cfg.mc.seed ^ 0xC0ULL, StreamSalt::heisenberg), 1,
                                 [&](Stream& rng, std::span<double> out) { out[0] = omega * big_u(cayley::sample_weighted(n, rng)); });
    const auto is = t_s.component(0);
    const auto ih = t_h.component(0);
    rep.monte_carlo("int_S" + tag, is);
    rep.monte_carlo("int_H" + tag, ih);
    rep.check("change_of_variables" + tag, agree_within(is, ih, 3.0));

    std::vector<double> row = {static_cast<double>(idx), is.value, is.std_error, ih.value, ih.std_error};
    for (double r : {cp.p, cp.p_star}) {
      const auto ls = estimators::lp_norm(u, r, n, estimators::Side::sphere, cfg.mc);
      const auto lh = estimators::lp_norm(u, r, n, estimators::Side::heisenberg, cfg.mc);
      const std::string rtag = "L" + fmt(r) + tag;
      rep.monte_carlo(rtag + "_S", ls);
      rep.monte_carlo(rtag + "_H", lh);
      rep.check("lr_isometry_" + rtag, agree_within(ls, lh, 3.0));
      row.push_back(ls.value);
      row.push_back(lh.value);
    }
    const auto gs = estimators::gagliardo(u, cp.s, cp.p, n, estimators::Side::sphere, cfg.mc);
    const auto gh = estimators::gagliardo(u, cp.s, cp.p, n, estimators::Side::heisenberg, cfg.mc);
    rep.monte_carlo("seminorm_S" + tag, gs);
    rep.monte_carlo("seminorm_H" + tag, gh);
    rep.check("seminorm_isometry" + tag, agree_within(gs, gh, 3.0),
              "diff " + fmt(gs.value - gh.value) + ", se " + fmt(combined_se(gs, gh)));
    row.insert(row.end(), {gs.value, gs.std_error, gh.value, gh.std_error});
    tab.rows.push_back(std::move(row));
    ++idx;
  }
  rep.tables["identities"] = std::move(tab);
  return rep;
}

ExperimentReport cmd_seminorm(const RunConfig& cfg) {
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  const auto u = parse_function(cfg.options.at("function").get<std::string>(), cfg.n);
  const auto side = cfg.options.at("side").get<std::string>() == "heisenberg" ? estimators::Side::heisenberg
                                                                              : estimators::Side::sphere;
  const auto ce = estimators::critical_estimates(u, cp.s, cp.p, cp.n, side, cfg.mc);
  ExperimentReport rep("seminorm");
  rep.params = cp.to_json();
  rep.params["function"] = u.label;
  rep.params["side"] = estimators::to_string(side);
  rep.params["samples"] = cfg.mc.samples;
  rep.params["seed"] = cfg.mc.seed;
  const auto semi = ce.seminorm_p();
  const auto np = ce.norm_p();
  const auto nq = ce.norm_p_star();
  rep.monte_carlo("seminorm_p", semi);
  if (cfg.mc.diagonal_cutoff > 0.0)
    rep.analytic("tail_bound", estimators::gagliardo(u, cp.s, cp.p, cp.n, side, cfg.mc).tail_bound);
  rep.monte_carlo("norm_p", np);
  rep.monte_carlo("norm_p_star", nq);
  rep.check("finite", std::isfinite(semi.value) && std::isfinite(np.value) && std::isfinite(nq.value));
  return rep;
}

ExperimentReport cmd_thresholds(const RunConfig& cfg) {
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  const auto t = lab::thresholds(cp);
  ExperimentReport rep("thresholds");
  rep.params = cp.to_json();
  rep.quadrature("omega", t.omega, sphere::volume(cp.n).quadrature_error);
  rep.analytic("linear_threshold", t.linear_threshold);
  rep.analytic("power_threshold", t.power_threshold);
  const double dev = std::abs(std::pow(t.linear_threshold, cp.p) - t.power_threshold);
  rep.analytic("power_identity_deviation", dev);
  rep.check("power_identity", dev <= 1e-12 * t.power_threshold);
  const auto bs = numbers(cfg.options.at("B"));
  rep.params["B"] = bs;
  for (double b : bs) {
    for (lab::Form f : {lab::Form::linear, lab::Form::power}) {
      const auto cert = lab::constant_violation_certificate(b, f, cp);
      const auto& c = cert.checks.front();
      rep.verdict("certificate[" + lab::to_string(f) + ",B=" + fmt(b) + "]", c.verdict, c.ok, c.detail);
    }
  }
  return rep;
}

ExperimentReport cmd_scan(const RunConfig& cfg) {
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  const auto spec = cfg.options.at("phi").get<std::string>();
  const auto phi = parse_function(spec, cfg.n);
  lab::ScanOptions opt;
  // int xi_i^2 dV = omega / (2n+2) for coordinate functions.
  if (spec.rfind("coordinate:", 0) == 0) opt.m2_exact = sphere::volume(cfg.n).omega / cp.Q();
  return lab::perturbation_scan(phi, cp, numbers(cfg.options.at("eps")), cfg.mc, opt);
}

ExperimentReport cmd_scalar(const RunConfig& cfg) {
  const auto instances = cfg.options.at("instances").get<std::int64_t>();
  const double tol = cfg.options.at("tolerance").get<double>();
  auto rep = lab::scalar_lemmas_report(instances, cfg.mc.seed, sphere::volume(cfg.n).omega, tol);
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  for (double b : numbers(cfg.options.at("young_B"))) {
    const auto y = lab::young_split_report(b, cfg.options.at("A0").get<double>(), cp, instances, cfg.mc.seed);
    rep.merge(y, "young_split[B=" + fmt(b) + "].");
  }
  return rep;
}

ExperimentReport cmd_poincare(const RunConfig& cfg) {
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  const double radius = cfg.options.at("radius").get<double>();
  ExperimentReport rep("poincare");
  rep.params = cp.to_json();
  rep.params["radius"] = radius;
  rep.params["samples"] = cfg.mc.samples;
  rep.params["seed"] = cfg.mc.seed;
  const heisenberg::HeisenbergPoint origin(cfg.n);
  int k = 0;
  for (const auto& big_u : heisenberg::smooth_heisenberg_suite(cfg.n)) {
    const auto r = heisenberg::local_poincare_check(big_u, radius, origin, cp.s, cp.p, cfg.mc);
    rep.merge(r, "local[" + std::to_string(k++) + ":" + big_u.label + "].");
  }
  for (const auto& u : functions::smooth_suite(cfg.n)) {
    const auto e = estimators::poincare_ratio(u, cp.s, cp.p, cfg.n, cfg.mc);
    rep.monte_carlo("sphere_ratio[" + u.label + "]", e);
    rep.check("sphere_ratio_finite[" + u.label + "]", std::isfinite(e.value) && e.value > 0.0);
  }
  return rep;
}

lab::ConstraintClass constraint_class(const RunConfig& cfg) {
  return lab::parse_constraint_class(cfg.options.at("class").get<std::string>());
}

ExperimentReport cmd_admissibility(const RunConfig& cfg) {
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  const auto form = lab::parse_form(cfg.options.at("form").get<std::string>());
  auto bs = numbers(cfg.options.at("B"));
  if (bs.empty()) {
    const double thr = lab::threshold_for(lab::thresholds(cp), form);
    bs = {0.9 * thr, thr, 1.1 * thr, 1.25 * thr, 1.5 * thr, 2.0 * thr};
  }
  const auto sb = lab::span_basis(cfg.n);
  const auto fam = lab::projected_family(sb, constraint_class(cfg));
  auto rep = lab::admissibility_probe(bs, form, fam, cfg.options.at("budget").get<std::int64_t>(), cp, cfg.mc);
  rep.params["class"] = cfg.options.at("class");
  return rep;
}

ExperimentReport cmd_subcritical(const RunConfig& cfg) {
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  double r = 0.5 * (cp.p + cp.p_star);
  if (!cfg.options.at("r").is_null()) r = cfg.options.at("r").get<double>();
  return lab::subcritical_report(r, cfg.options.at("eps").get<double>(), cfg.options.at("A0").get<double>(), cp,
                                 functions::smooth_suite(cfg.n), cfg.mc);
}

ExperimentReport cmd_constraints(const RunConfig& cfg) {
  const CriticalParams cp(cfg.n, cfg.s, cfg.p);
  auto rep = lab::coercivity_dichotomy(constraint_class(cfg), cfg.options.at("budget").get<std::int64_t>(), cp, cfg.mc);
  const auto phi = parse_function(cfg.options.at("cutoff_phi").get<std::string>(), cfg.n);
  const auto u = parse_function(cfg.options.at("cutoff_u").get<std::string>(), cfg.n);
  rep.merge(lab::cutoff_estimate_check(phi, u, cp, cfg.mc), "cutoff.");
  return rep;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"volume",        "verify-cayley", "seminorm",     "thresholds",
                                                 "scan-endpoint", "scalar-lemmas", "poincare",     "admissibility",
                                                 "subcritical",   "constraints",   "report"};
  return names;
}

nlohmann::json default_options(const std::string& e) {
  if (e == "volume" || e == "report") return json::object();
  if (e == "verify-cayley") return {{"round_trip_points", 10000}, {"pole_skip", 1e-3}};
  if (e == "seminorm") return {{"function", "coordinate:1"}, {"side", "sphere"}};
  if (e == "thresholds") return {{"B", json::array()}};
  if (e == "scan-endpoint") return {{"eps", {0.2, 0.1, 0.05, 0.025}}, {"phi", "coordinate:1"}};
  if (e == "scalar-lemmas") return {{"instances", 100000}, {"tolerance", 1e-9}, {"young_B", json::array()}, {"A0", 1.0}};
  if (e == "poincare") return {{"radius", 1.0}};
  if (e == "admissibility") return {{"B", json::array()}, {"form", "linear"}, {"class", "zero-average"}, {"budget", 40}};
  if (e == "subcritical") return {{"r", nullptr}, {"eps", 0.5}, {"A0", 5.0}};
  if (e == "constraints")
    return {{"class", "zero-average"}, {"budget", 40}, {"cutoff_phi", "bump:0"}, {"cutoff_u", "coordinate:1"}};
  throw ConfigError("unknown experiment '" + e + "'");
}

functions::TestFunction parse_function(const std::string& spec, int n) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  auto as_int = [&](const std::string& s) {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw ConfigError("bad integer in function spec '" + spec + "'");
    return v;
  };
  try {
    if (kind == "coordinate") return functions::coordinate(n, as_int(arg));
    if (kind == "constant") return functions::constant(std::stod(arg));
    if (kind == "bump") {
      const auto centers = functions::bump_centers(n);
      const int k = as_int(arg);
      if (k < 0 || k >= static_cast<int>(centers.size())) throw ConfigError("bump index out of range in '" + spec + "'");
      return functions::cap_bump(centers[static_cast<std::size_t>(k)], 1.2, 1.0);
    }
    if (kind == "suite") {
      const auto suite = functions::standard_suite(n);
      const int k = as_int(arg);
      if (k < 0 || k >= static_cast<int>(suite.size())) throw ConfigError("suite index out of range in '" + spec + "'");
      return suite[static_cast<std::size_t>(k)];
    }
    if (kind == "perturbed") {
      const auto c2 = arg.find(':');
      if (c2 == std::string::npos) throw ConfigError("perturbed needs <eps>:<i> in '" + spec + "'");
      return functions::perturbed_constant(std::stod(arg.substr(0, c2)), functions::coordinate(n, as_int(arg.substr(c2 + 1))));
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e)) throw;
    throw ConfigError("malformed function spec '" + spec + "'");
  }
  throw ConfigError("unknown function kind in '" + spec + "'");
}

ExperimentReport run_experiment(const RunConfig& cfg) {
  const auto& e = cfg.experiment;
  if (e == "volume") return cmd_volume(cfg);
  if (e == "verify-cayley") return cmd_verify_cayley(cfg);
  if (e == "seminorm") return cmd_seminorm(cfg);
  if (e == "thresholds") return cmd_thresholds(cfg);
  if (e == "scan-endpoint") return cmd_scan(cfg);
  if (e == "scalar-lemmas") return cmd_scalar(cfg);
  if (e == "poincare") return cmd_poincare(cfg);
  if (e == "admissibility") return cmd_admissibility(cfg);
  if (e == "subcritical") return cmd_subcritical(cfg);
  if (e == "constraints") return cmd_constraints(cfg);
  throw ConfigError("experiment '" + e + "' has no runner");
}

}  // namespace crsobolev::cli
