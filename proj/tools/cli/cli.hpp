#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crsobolev/crsobolev.hpp"

namespace crsobolev::cli {

/// Process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_failed = 2,
  exit_numeric = 3,
  exit_io = 4,
};

inline constexpr int config_version = 1;

const std::vector<std::string>& experiment_names();

struct RunConfig {
  int version = config_version;
  std::string experiment;
  int n = 1;
  double s = 0.5;
  double p = 2.0;
  McConfig mc;
  /// Experiment-specific fields; defaults are filled in by resolve().
  nlohmann::json options = nlohmann::json::object();
  std::string output_dir = "crsobolev-out";
  bool cache = true;

  /// Everything that determines the numbers. Threads, output_dir and cache
  /// are left out: results do not depend on them.
  nlohmann::json canonical() const;
  std::string hash() const;

  /// Fills option defaults, rejects unknown option keys, checks (n, s, p)
  /// and the Monte Carlo settings. Throws ConfigError / ArgumentError.
  void resolve();
};

/// Default options for an experiment; throws ConfigError for unknown names.
nlohmann::json default_options(const std::string& experiment);

/// Merges a JSON config document (with "version") into cfg.
void apply_config_json(RunConfig& cfg, const nlohmann::json& doc);

/// Parses "coordinate:<i>", "bump:<k>", "constant:<c>", "suite:<k>",
/// "perturbed:<eps>:<i>".
functions::TestFunction parse_function(const std::string& spec, int n);

/// Runs the experiment named in cfg.
ExperimentReport run_experiment(const RunConfig& cfg);

// Artifacts.
std::string sha256_hex(const std::string& data);
std::string format_number(double v);
void write_csv(const Table& table, const std::filesystem::path& path);
/// Line plot of the y columns against x (log-log when every value is positive).
void write_svg(const Table& table, const std::string& x, const std::vector<std::string>& ys, const std::string& title,
               const std::filesystem::path& path);
nlohmann::json report_document(const ExperimentReport& rep, const RunConfig& cfg);
/// Writes report.json, one CSV per table, and SVG plots into dir.
void write_artifacts(const nlohmann::json& doc, const ExperimentReport& rep, const std::filesystem::path& dir);
void print_summary(const nlohmann::json& doc, std::ostream& out);

/// Entry point: returns the exit code. Diagnostics go to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crsobolev::cli
