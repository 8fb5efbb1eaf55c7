#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/cli.hpp"

namespace crsobolev::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json RunConfig::canonical() const {
  json mcj{{"samples", mc.samples}, {"seed", mc.seed}, {"chunk", mc.chunk}, {"diagonal_cutoff", mc.diagonal_cutoff}};
  mcj["importance_exponent"] = mc.importance_exponent ? json(*mc.importance_exponent) : json(nullptr);
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  return {{"version", version},
          {"experiment", experiment},
          {"params", {{"n", n}, {"s", s}, {"p", p}}},
          {"mc", mcj},
          {"options", options}};
}

std::string RunConfig::hash() const { return sha256_hex(canonical().dump()); }

void RunConfig::resolve() {
  if (version != config_version) throw ConfigError("unsupported config version " + std::to_string(version));
  auto merged = default_options(experiment);
  for (const auto& [k, v] : options.items()) {
    if (!merged.contains(k)) throw ConfigError("unknown option '" + k + "' for experiment " + experiment);
    const auto& d = merged[k];
    const bool ok = d.is_null() || v.is_null() || (d.is_number() && v.is_number()) || (d.is_string() && v.is_string()) ||
                    (d.is_array() && v.is_array()) || (d.is_boolean() && v.is_boolean());
    if (!ok) throw ConfigError("option '" + k + "' has the wrong type");
    merged[k] = v;
  }
  for (const auto& [k, v] : merged.items())
    if (v.is_array())
      for (const auto& e : v)
        if (!e.is_number()) throw ConfigError("option '" + k + "' must be a list of numbers");
  options = std::move(merged);
  if (experiment != "report") {
    const lab::CriticalParams cp(n, s, p);
    mc.validate(cp.Q());
  }
}

void apply_config_json(RunConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("version")) throw ConfigError("config is missing the 'version' field");
  for (const auto& [k, v] : doc.items()) {
    try {
      if (k == "version") {
        cfg.version = v.get<int>();
      } else if (k == "experiment") {
        if (v.get<std::string>() != cfg.experiment)
          throw ConfigError("config is for experiment '" + v.get<std::string>() + "', not '" + cfg.experiment + "'");
      } else if (k == "params") {
        for (const auto& [pk, pv] : v.items()) {
          if (pk == "n") cfg.n = pv.get<int>();
          else if (pk == "s") cfg.s = pv.get<double>();
          else if (pk == "p") cfg.p = pv.get<double>();
          else throw ConfigError("unknown params key '" + pk + "'");
        }
      } else if (k == "mc") {
        for (const auto& [mk, mv] : v.items()) {
          if (mk == "samples") cfg.mc.samples = mv.get<std::int64_t>();
          else if (mk == "seed") cfg.mc.seed = mv.get<std::uint64_t>();
          else if (mk == "chunk") cfg.mc.chunk = mv.get<int>();
          else if (mk == "importance_exponent") {
            if (mv.is_null()) cfg.mc.importance_exponent.reset();
            else cfg.mc.importance_exponent = mv.get<double>();
          } else if (mk == "diagonal_cutoff") cfg.mc.diagonal_cutoff = mv.get<double>();
          else if (mk == "threads") cfg.mc.threads = mv.get<int>();
          else throw ConfigError("unknown mc key '" + mk + "'");
        }
      } else if (k == "options") {
        if (!v.is_object()) throw ConfigError("'options' must be an object");
        for (const auto& [ok, ov] : v.items()) cfg.options[ok] = ov;
      } else if (k == "output_dir") {
        cfg.output_dir = v.get<std::string>();
      } else if (k == "cache") {
        cfg.cache = v.get<bool>();
      } else {
        throw ConfigError("unknown config key '" + k + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + k + "': " + e.what());
    }
  }
}

namespace {

enum class Kind { number, integer, text, list };

struct OptionSpec {
  std::string flag;
  std::string key;
  Kind kind;
  std::string help;
};

/// Experiment-specific flags, each mapped onto an options key.
std::vector<OptionSpec> option_specs(const std::string& e) {
  if (e == "verify-cayley") return {{"--points", "round_trip_points", Kind::integer, "round-trip sample count"}};
  if (e == "seminorm")
    return {{"--function", "function", Kind::text, "coordinate:<i> | bump:<k> | constant:<c> | suite:<k> | perturbed:<eps>:<i>"},
            {"--side", "side", Kind::text, "sphere | heisenberg"}};
  if (e == "thresholds") return {{"--B", "B", Kind::list, "comma-separated B values to certify"}};
  if (e == "scan-endpoint")
    return {{"--eps", "eps", Kind::list, "comma-separated eps values"}, {"--phi", "phi", Kind::text, "perturbation direction"}};
  if (e == "scalar-lemmas")
    return {{"--instances", "instances", Kind::integer, "instances per suite"},
            {"--tolerance", "tolerance", Kind::number, "violation tolerance"},
            {"--young-B", "young_B", Kind::list, "B values for the Young split"},
            {"--A0", "A0", Kind::number, "leading constant for the Young split"}};
  if (e == "poincare") return {{"--radius", "radius", Kind::number, "Koranyi ball radius"}};
  if (e == "admissibility")
    return {{"--B", "B", Kind::list, "comma-separated B grid (default: around the threshold)"},
            {"--form", "form", Kind::text, "linear | power"},
            {"--class", "class", Kind::text, "zero-average | orthogonal-to-Y"},
            {"--budget", "budget", Kind::integer, "optimizer evaluations per B"}};
  if (e == "subcritical")
    return {{"--r", "r", Kind::number, "exponent in [p, p*)"},
            {"--eps", "eps", Kind::number, "seminorm weight"},
            {"--A0", "A0", Kind::number, "critical leading constant"}};
  if (e == "constraints")
    return {{"--class", "class", Kind::text, "zero-average | orthogonal-to-Y"},
            {"--budget", "budget", Kind::integer, "optimizer evaluations"},
            {"--cutoff-phi", "cutoff_phi", Kind::text, "cutoff function"},
            {"--cutoff-u", "cutoff_u", Kind::text, "function under the cutoff"}};
  return {};
}

json convert(const std::string& raw, Kind kind, const std::string& flag) {
  try {
    switch (kind) {
      case Kind::text: return raw;
      case Kind::number: {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::integer: {
        std::size_t used = 0;
        const long long v = std::stoll(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case Kind::list: {
        json arr = json::array();
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (item.empty()) continue;
          std::size_t used = 0;
          arr.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        }
        return arr;
      }
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("malformed value '" + raw + "' for " + flag);
}

struct CommonFlags {
  std::string config;
  int n = 0;
  double s = 0, p = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  int chunk = 0;
  double beta = 0, cutoff = 0;
  int threads = 0;
  std::string output_dir;
  bool no_cache = false;
  bool quiet = false;
  std::vector<std::string> sets;
  std::map<std::string, CLI::Option*> opts;
};

int threads_from_env() {
  const char* env = std::getenv("CRSOBOLEV_THREADS");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const int v = std::stoi(env, &used);
    if (used == std::string(env).size() && v >= 0) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError(std::string("CRSOBOLEV_THREADS must be a nonnegative integer, got '") + env + "'");
}

int run_report(const RunConfig& cfg, std::ostream& out) {
  json summary = json::object();
  bool all_ok = true;
  int found = 0;
  for (const auto& name : experiment_names()) {
    const auto path = fs::path(cfg.output_dir) / name / "report.json";
    if (!fs::exists(path)) continue;
    std::ifstream f(path);
    json doc;
    try {
      doc = json::parse(f);
    } catch (const json::exception& e) {
      throw ConfigError("unreadable report " + path.string() + ": " + e.what());
    }
    ++found;
    const bool ok = doc.value("ok", false);
    all_ok = all_ok && ok;
    int failing = 0;
    for (const auto& c : doc.at("checks"))
      if (!c.value("ok", false)) ++failing;
    summary[name] = {{"ok", ok}, {"config_hash", doc.value("config_hash", "")}, {"failing_checks", failing}};
    out << (ok ? "PASS  " : "FAIL  ") << name << "  (" << doc.at("checks").size() << " checks, " << failing
        << " failing)\n";
  }
  if (found == 0) throw ConfigError("no reports found under " + cfg.output_dir);
  std::ofstream f(fs::path(cfg.output_dir) / "summary.json", std::ios::binary);
  if (!f) throw fs::filesystem_error("cannot write summary", fs::path(cfg.output_dir), std::make_error_code(std::errc::io_error));
  f << summary.dump(2) << '\n';
  return all_ok ? exit_ok : exit_failed;
}

void copy_dir(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  for (const auto& entry : fs::directory_iterator(from))
    fs::copy_file(entry.path(), to / entry.path().filename(), fs::copy_options::overwrite_existing);
}

int execute(RunConfig& cfg, bool quiet, std::ostream& out) {
  if (cfg.experiment == "report") return run_report(cfg, out);
  const auto hash = cfg.hash();
  const fs::path base(cfg.output_dir);
  const fs::path latest = base / cfg.experiment;
  json doc;
  if (cfg.cache) {
    const fs::path cache_dir = base / "cache" / hash;
    if (fs::exists(cache_dir / "report.json")) {
      std::ifstream f(cache_dir / "report.json");
      doc = json::parse(f);
      if (!quiet) out << "cached: " << cache_dir.string() << '\n';
    } else {
      const auto rep = run_experiment(cfg);
      doc = report_document(rep, cfg);
      // Write to a scratch directory first so an interrupted run never leaves
      // a half-filled cache entry.
      const fs::path tmp = base / "cache" / (hash + ".partial");
      fs::remove_all(tmp);
      write_artifacts(doc, rep, tmp);
      fs::remove_all(cache_dir);
      fs::rename(tmp, cache_dir);
    }
    fs::remove_all(latest);
    copy_dir(cache_dir, latest);
  } else {
    const auto rep = run_experiment(cfg);
    doc = report_document(rep, cfg);
    fs::remove_all(latest);
    write_artifacts(doc, rep, latest);
  }
  if (!quiet) print_summary(doc, out);
  out << "report: " << (latest / "report.json").string() << '\n';
  return doc.at("ok").get<bool>() ? exit_ok : exit_failed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional CR Sobolev experiments on the sphere and the Heisenberg group", "crsobolev"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  CommonFlags flags;
  std::map<std::string, std::map<std::string, std::string>> raw;  // experiment -> flag -> value
  std::map<std::string, std::vector<std::pair<OptionSpec, CLI::Option*>>> exp_opts;
  std::string chosen;

  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, name == "report" ? "summarize reports under the output directory"
                                                          : "run the " + name + " experiment");
    sub->callback([&chosen, name] { chosen = name; });
    auto& o = flags.opts;
    auto add = [&](const std::string& key, CLI::Option* opt) { o[name + key] = opt; };
    add("config", sub->add_option("--config", flags.config, "JSON config file (flags override it)"));
    add("out", sub->add_option("--output-dir", flags.output_dir, "output directory"));
    if (name != "report") {
      add("n", sub->add_option("--n", flags.n, "Heisenberg dimension n (sphere S^{2n+1})"));
      add("s", sub->add_option("--s", flags.s, "fractional order s in (0, 1)"));
      add("p", sub->add_option("--p", flags.p, "integrability exponent p in (1, Q)"));
      add("samples", sub->add_option("--samples", flags.samples, "Monte Carlo samples"));
      add("seed", sub->add_option("--seed", flags.seed, "base seed"));
      add("chunk", sub->add_option("--chunk", flags.chunk, "number of batches"));
      add("beta", sub->add_option("--beta", flags.beta, "pair proposal exponent in [0, Q)"));
      add("cutoff", sub->add_option("--cutoff", flags.cutoff, "diagonal cutoff delta (0 disables)"));
      add("threads", sub->add_option("--threads", flags.threads, "worker threads (0 = hardware; env CRSOBOLEV_THREADS)"));
      add("nocache", sub->add_flag("--no-cache", flags.no_cache, "recompute and do not touch the cache"));
      add("quiet", sub->add_flag("--quiet", flags.quiet, "print only the report path"));
      add("set", sub->add_option("--set", flags.sets, "option override key=<json value>"));
      for (const auto& spec : option_specs(name)) {
        auto* opt = sub->add_option(spec.flag, raw[name][spec.flag], spec.help);
        exp_opts[name].emplace_back(spec, opt);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return exit_ok;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    RunConfig cfg;
    cfg.experiment = chosen;
    cfg.mc.threads = -1;  // unset marker
    auto set = [&](const std::string& key) {
      const auto it = flags.opts.find(chosen + key);
      return it != flags.opts.end() && it->second->count() > 0;
    };
    if (set("config")) {
      std::ifstream f(flags.config);
      if (!f) throw ConfigError("cannot read config file " + flags.config);
      json doc;
      try {
        doc = json::parse(f);
      } catch (const json::exception& e) {
        throw ConfigError("malformed config " + flags.config + ": " + e.what());
      }
      apply_config_json(cfg, doc);
    }
    if (set("n")) cfg.n = flags.n;
    if (set("s")) cfg.s = flags.s;
    if (set("p")) cfg.p = flags.p;
    if (set("samples")) cfg.mc.samples = flags.samples;
    if (set("seed")) cfg.mc.seed = flags.seed;
    if (set("chunk")) cfg.mc.chunk = flags.chunk;
    if (set("beta")) cfg.mc.importance_exponent = flags.beta;
    if (set("cutoff")) cfg.mc.diagonal_cutoff = flags.cutoff;
    if (set("out")) cfg.output_dir = flags.output_dir;
    if (set("nocache")) cfg.cache = false;
    if (set("threads")) cfg.mc.threads = flags.threads;
    if (cfg.mc.threads < 0) cfg.mc.threads = threads_from_env();
    for (const auto& [spec, opt] : exp_opts[chosen])
      if (opt->count() > 0) cfg.options[spec.key] = convert(raw[chosen][spec.flag], spec.kind, spec.flag);
    for (const auto& s : flags.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
      json v;
      try {
        v = json::parse(s.substr(eq + 1));
      } catch (const json::exception&) {
        v = s.substr(eq + 1);
      }
      cfg.options[s.substr(0, eq)] = v;
    }
    cfg.resolve();
    return execute(cfg, set("quiet") && flags.quiet, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const RangeError& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const DegenerateInput& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const SingularEvaluation& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const PoleProximityError& e) {
    err << "numeric error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return exit_io;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::out_of_range& e) {
    err << "config error: " << e.what() << '\n';
    return exit_usage;
  }
}

}  // namespace crsobolev::cli
