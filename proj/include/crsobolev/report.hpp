#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "crsobolev/monte_carlo.hpp"

namespace crsobolev {

/// Where a reported number came from.
enum class Provenance { analytic, quadrature, monte_carlo, extrapolated };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::quadrature: return "quadrature";
    case Provenance::monte_carlo: return "monte-carlo";
    case Provenance::extrapolated: return "extrapolated";
  }
  return "unknown";
}

struct Quantity {
  std::string name;
  double value = 0.0;
  /// Standard error (Monte Carlo), quadrature error, or 0 for analytic values.
  double error = 0.0;
  Provenance provenance = Provenance::analytic;
  std::int64_t samples = 0;
};

/// One verdict. `ok` says whether the outcome counts as a pass for exit codes.
struct Check {
  std::string name;
  std::string verdict;
  bool ok = true;
  std::string detail;
};

/// Column-oriented numeric table (written as CSV by the runner).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json params = nlohmann::json::object();
  std::vector<Quantity> quantities;
  std::vector<Check> checks;
  std::map<std::string, Table> tables;

  ExperimentReport() = default;
  explicit ExperimentReport(std::string name) : experiment(std::move(name)) {}

  void analytic(const std::string& name, double v) { quantities.push_back({name, v, 0.0, Provenance::analytic, 0}); }
  void quadrature(const std::string& name, double v, double err) {
    quantities.push_back({name, v, err, Provenance::quadrature, 0});
  }
  void monte_carlo(const std::string& name, const Estimate& e) {
    quantities.push_back({name, e.value, e.std_error, Provenance::monte_carlo, e.samples});
  }
  void extrapolated(const std::string& name, double v, double err) {
    quantities.push_back({name, v, err, Provenance::extrapolated, 0});
  }

  void check(const std::string& name, bool pass, const std::string& detail = {}) {
    checks.push_back({name, pass ? "PASS" : "FAIL", pass, detail});
  }
  void verdict(const std::string& name, const std::string& verdict, bool ok, const std::string& detail = {}) {
    checks.push_back({name, verdict, ok, detail});
  }

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
  }

  const Quantity* find(const std::string& name) const {
    for (const auto& q : quantities)
      if (q.name == name) return &q;
    return nullptr;
  }
  const Check* find_check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  /// Appends the contents of another report, prefixing names.
  void merge(const ExperimentReport& other, const std::string& prefix) {
    for (auto q : other.quantities) {
      q.name = prefix + q.name;
      quantities.push_back(std::move(q));
    }
    for (auto c : other.checks) {
      c.name = prefix + c.name;
      checks.push_back(std::move(c));
    }
    for (const auto& [k, t] : other.tables) tables[prefix + k] = t;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["params"] = params;
    auto& qs = j["quantities"] = nlohmann::json::array();
    for (const auto& q : quantities) {
      nlohmann::json e{{"name", q.name}, {"value", finite_or_null(q.value)}, {"provenance", to_string(q.provenance)}};
      if (q.provenance != Provenance::analytic) e["error"] = finite_or_null(q.error);
      if (q.samples > 0) e["samples"] = q.samples;
      qs.push_back(std::move(e));
    }
    auto& cs = j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
      nlohmann::json e{{"name", c.name}, {"verdict", c.verdict}, {"ok", c.ok}};
      if (!c.detail.empty()) e["detail"] = c.detail;
      cs.push_back(std::move(e));
    }
    j["ok"] = ok();
    return j;
  }

 private:
  static nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return nullptr;
  }
};

}  // namespace crsobolev
