#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "dam/results_csv.hpp"
#include "dam/theory.hpp"

namespace dam::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

const std::set<std::string>& point_keys() {
  static const std::set<std::string> keys{"model",      "degree",     "N",         "M",          "alpha",
                                          "alpha_factor", "rho",      "n_flips",   "scheduler",  "max_passes",
                                          "tie_policy", "target",     "corruption", "zero_diagonal"};
  return keys;
}

// Cartesian expansion order; the last key varies fastest.
const std::vector<std::string>& grid_order() {
  static const std::vector<std::string> order{"model",      "degree", "tie_policy", "zero_diagonal", "corruption",
                                              "scheduler",  "max_passes", "target", "N",  "M",
                                              "alpha",      "alpha_factor", "rho", "n_flips"};
  return order;
}

std::uint64_t get_uint(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw std::invalid_argument(where + ": '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double get_double(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw std::invalid_argument(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw std::invalid_argument(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

template <typename Fn>
auto rethrow_as_usage(const std::string& where, const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(where + ": '" + key + "': " + e.what());
  }
}

std::uint64_t env_seed_or(std::uint64_t fallback) {
  const char* env = std::getenv(kSeedEnvVar);
  if (env == nullptr || *env == '\0') return fallback;
  std::size_t used = 0;
  const std::string s(env);
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.front() == '-') {
    throw std::invalid_argument(std::string(kSeedEnvVar) + " must be an unsigned integer, got '" + s + "'");
  }
  return v;
}

void print_rows(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width + 2)) << k << v << '\n';
}

// Options shared by recover and bench, collected as a config point.
struct PointFlags {
  std::string model = "exponential";
  std::optional<unsigned> degree;
  std::size_t n_neurons = 40;
  std::optional<std::uint64_t> n_patterns;
  std::optional<double> alpha;
  std::optional<double> alpha_factor;
  std::optional<std::uint64_t> n_flips;
  std::optional<double> rho;
  std::string scheduler = "sync";
  std::size_t max_passes = 100;
  std::string tie_policy = "keep";
  std::string target = "0";
  std::string corruption = "sphere";
  bool zero_diagonal = false;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "classical | polynomial | exponential | power")->capture_default_str();
    app->add_option("--degree,-n", degree, "degree for polynomial/power models");
    app->add_option("--N", n_neurons, "number of neurons")->capture_default_str();
    app->add_option("--M", n_patterns, "number of stored patterns");
    app->add_option("--alpha", alpha, "load rate; M = round(exp(alpha N)) + 1");
    app->add_option("--alpha-factor", alpha_factor, "load as a multiple of alpha_star(rho)");
    app->add_option("--flips", n_flips, "corruption radius in bits");
    app->add_option("--rho", rho, "corruption radius as a fraction of N (rounded down)");
    app->add_option("--scheduler", scheduler, "sync | async | fixed_point")->capture_default_str();
    app->add_option("--max-passes", max_passes, "cap for fixed_point")->capture_default_str();
    app->add_option("--tie", tie_policy, "keep | plus_one")->capture_default_str();
    app->add_option("--target", target, "pattern index or 'all'")->capture_default_str();
    app->add_option("--corruption", corruption, "sphere | ball")->capture_default_str();
    app->add_flag("--zero-diagonal", zero_diagonal, "classical: drop the J_ii term");
  }

  [[nodiscard]] json to_point() const {
    json p{{"model", model},           {"N", n_neurons},       {"scheduler", scheduler},
           {"max_passes", max_passes}, {"tie_policy", tie_policy}, {"corruption", corruption},
           {"zero_diagonal", zero_diagonal}};
    if (degree) p["degree"] = *degree;
    if (n_patterns) p["M"] = *n_patterns;
    if (alpha) p["alpha"] = *alpha;
    if (alpha_factor) p["alpha_factor"] = *alpha_factor;
    if (n_flips) p["n_flips"] = *n_flips;
    if (rho) p["rho"] = *rho;
    if (target == "all") {
      p["target"] = "all";
    } else {
      try {
        std::size_t used = 0;
        const unsigned long long t = std::stoull(target, &used);
        if (used != target.size()) throw std::invalid_argument("");
        p["target"] = t;
      } catch (const std::exception&) {
        throw std::invalid_argument("--target must be a pattern index or 'all'");
      }
    }
    return p;
  }
};

std::vector<std::pair<std::string, std::string>> describe(const TrialSpec& spec) {
  std::vector<std::pair<std::string, std::string>> rows{{"model", std::string(to_string(spec.model.kind))}};
  if (spec.model.kind == ModelKind::Polynomial || spec.model.kind == ModelKind::PowerInteraction) {
    rows.emplace_back("degree", std::to_string(spec.model.degree));
  }
  rows.emplace_back("N", std::to_string(spec.n_neurons));
  rows.emplace_back("M", std::to_string(spec.n_patterns));
  rows.emplace_back("alpha", format_double(theory::alpha_for_patterns(spec.n_patterns, spec.n_neurons)));
  rows.emplace_back("n_flips", std::to_string(spec.n_flips));
  rows.emplace_back("rho", format_double(spec.rho()));
  rows.emplace_back("corruption", std::string(to_string(spec.corruption)));
  rows.emplace_back("scheduler", std::string(to_string(spec.scheduler.kind)));
  rows.emplace_back("tie_policy", std::string(to_string(spec.model.tie_policy)));
  rows.emplace_back("target", spec.target.all_patterns ? "all" : std::to_string(spec.target.index));
  return rows;
}

// ---------------------------------------------------------------------------

int cmd_theory(std::ostream& out, double rho, std::optional<std::size_t> n_neurons, std::optional<double> alpha,
               std::optional<unsigned> degree, const std::string& curve, std::size_t points,
               const std::string& format) {
  if (!curve.empty()) {
    if (curve != "rho") throw std::invalid_argument("--curve supports only 'rho'");
    if (points < 2) throw std::invalid_argument("--points must be >= 2");
    out << "rho,alpha_star\n";
    for (std::size_t k = 0; k < points; ++k) {
      const double r = 0.5 * static_cast<double>(k) / static_cast<double>(points);
      out << format_double(r) << ',' << format_double(theory::alpha_star(r)) << '\n';
    }
    return kExitOk;
  }
  const auto report = theory::threshold_report(rho, n_neurons, alpha, degree);
  if (format == "json") {
    json j{{"rho", report.rho}, {"alpha_star", report.alpha_star}, {"alpha", *report.alpha}};
    if (report.n_neurons) j["N"] = *report.n_neurons;
    if (report.m_max) j["m_max"] = *report.m_max;
    if (report.n_degree) j["n"] = *report.n_degree;
    if (report.c_n) j["c_n"] = *report.c_n;
    if (report.polynomial_capacity) j["polynomial_capacity"] = *report.polynomial_capacity;
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  if (format != "table") throw std::invalid_argument("--format must be table or json for theory");
  std::vector<std::pair<std::string, std::string>> rows{{"rho", format_double(report.rho)},
                                                        {"alpha_star", format_double(report.alpha_star)},
                                                        {"alpha", format_double(*report.alpha)}};
  if (report.n_neurons) rows.emplace_back("N", std::to_string(*report.n_neurons));
  if (report.m_max) rows.emplace_back("m_max", format_double(*report.m_max));
  if (report.n_degree) rows.emplace_back("n", std::to_string(*report.n_degree));
  if (report.c_n) rows.emplace_back("c_n", std::to_string(*report.c_n));
  if (report.polynomial_capacity) rows.emplace_back("polynomial_capacity", format_double(*report.polynomial_capacity));
  print_rows(out, rows);
  return kExitOk;
}

int cmd_recover(std::ostream& out, const PointFlags& flags, std::uint64_t master_seed, std::size_t trial_index,
                const std::string& format) {
  TrialSpec spec = parse_point(flags.to_point(), "recover");
  spec.seed = trial_seed(master_seed, 0, trial_index);
  const TrialResult r = run_trial(spec);

  auto rows = describe(spec);
  rows.emplace_back("seed", std::to_string(master_seed));
  rows.emplace_back("trial", std::to_string(trial_index));
  rows.emplace_back("result", r.success ? "success" : "failure");
  rows.emplace_back("wrong_bits", std::to_string(r.n_wrong_bits_after));
  rows.emplace_back("ties", std::to_string(r.ties_seen));
  if (spec.model.kind == ModelKind::Exponential) {
    rows.emplace_back("log_signal", format_double(r.signal_magnitude_log));
    rows.emplace_back("log_noise", format_double(r.noise_magnitude_log));
    rows.emplace_back("noise_dominated", std::to_string(r.noise_dominated_neurons));
    rows.emplace_back("first_step_errors", std::to_string(r.first_step_errors));
  }
  if (format == "json") {
    json j{{"point", to_json(spec)},
           {"seed", master_seed},
           {"trial", trial_index},
           {"success", r.success},
           {"wrong_bits", r.n_wrong_bits_after},
           {"ties", r.ties_seen}};
    if (spec.model.kind == ModelKind::Exponential) {
      // -inf (no noise term) serialises as null.
      j["log_signal"] = r.signal_magnitude_log;
      j["log_noise"] = r.noise_magnitude_log;
      j["noise_dominated"] = r.noise_dominated_neurons;
      j["first_step_errors"] = r.first_step_errors;
    }
    out << j.dump(2) << '\n';
  } else {
    print_rows(out, rows);
  }
  return kExitOk;
}

int cmd_bench(std::ostream& out, const PointFlags& flags, std::uint64_t master_seed, std::size_t trials,
              std::size_t parallelism) {
  TrialSpec spec = parse_point(flags.to_point(), "bench");
  SweepOptions options;
  options.master_seed = master_seed;
  options.n_trials = trials;
  options.parallelism = parallelism;
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_sweep(std::span<const TrialSpec>(&spec, 1), options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto rows = describe(spec);
  rows.emplace_back("trials", std::to_string(trials));
  rows.emplace_back("successes", std::to_string(results.front().n_success));
  rows.emplace_back("parallelism", std::to_string(parallelism));
  rows.emplace_back("seconds", format_double(seconds));
  rows.emplace_back("trials_per_second", format_double(static_cast<double>(trials) / seconds));
  print_rows(out, rows);
  return kExitOk;
}

int cmd_sweep(std::ostream& out, std::ostream& err, const std::string& config_path,
              std::optional<std::uint64_t> seed_flag, std::optional<std::size_t> parallelism_flag,
              const std::string& output_flag, const std::string& format_flag, const std::string& manifest_flag,
              const std::atomic<bool>* cancel) {
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config '" + config_path + "'");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed config '" + config_path + "': " + e.what());
  }
  SweepConfig cfg = parse_sweep_config(raw);
  cfg.master_seed = seed_flag.value_or(env_seed_or(cfg.master_seed));
  if (parallelism_flag) cfg.parallelism = *parallelism_flag;
  if (!output_flag.empty()) cfg.output = output_flag;
  if (!format_flag.empty()) cfg.format = format_flag;
  if (!manifest_flag.empty()) cfg.manifest = manifest_flag;
  if (cfg.format != "csv" && cfg.format != "json") throw std::invalid_argument("--format must be csv or json");

  std::unique_ptr<std::ofstream> file;
  if (!cfg.output.empty() && cfg.output != "-") {
    file = std::make_unique<std::ofstream>(cfg.output);
    if (!*file) throw std::invalid_argument("cannot open output '" + cfg.output + "'");
  }
  std::ostream& sink = file ? *file : out;

  SweepOptions options;
  options.master_seed = cfg.master_seed;
  options.n_trials = cfg.trials;
  options.parallelism = cfg.parallelism;
  options.cancel = cancel;
  if (cfg.format == "csv") {
    sink << kSweepCsvHeader << '\n' << std::flush;
    options.on_point = [&sink](const SweepResult& r) { sink << sweep_csv_row(r) << '\n' << std::flush; };
  }
  const auto results = run_sweep(cfg.points, options);
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : results) arr.push_back(to_json(r));
    sink << arr.dump(2) << '\n';
  }
  sink.flush();

  std::string manifest_path = cfg.manifest;
  if (manifest_path.empty() && file) manifest_path = cfg.output + ".manifest.json";
  if (!manifest_path.empty()) {
    json points = json::array();
    for (const auto& p : cfg.points) points.push_back(to_json(p));
    json manifest{{"tool", "dam"},
                  {"version", kVersion},
                  {"config_file", config_path},
                  {"config", raw},
                  {"master_seed", cfg.master_seed},
                  {"trials", cfg.trials},
                  {"parallelism", cfg.parallelism},
                  {"format", cfg.format},
                  {"output", cfg.output.empty() ? "-" : cfg.output},
                  {"completed_points", results.size()},
                  {"points", points}};
    std::ofstream mf(manifest_path);
    if (!mf) throw std::invalid_argument("cannot open manifest '" + manifest_path + "'");
    mf << manifest.dump(2) << '\n';
  }
  if (results.size() < cfg.points.size()) {
    err << "interrupted after " << results.size() << " of " << cfg.points.size() << " points\n";
    return kExitInterrupted;
  }
  return kExitOk;
}

}  // namespace

TrialSpec parse_point(const json& point, const std::string& where) {
  reject_unknown(point, point_keys(), where);
  if (!point.contains("N")) throw std::invalid_argument(where + ": missing 'N'");

  TrialSpec spec;
  spec.model.kind = ModelKind::Exponential;
  if (point.contains("model")) {
    spec.model.kind =
        rethrow_as_usage(where, "model", [&] { return parse_model_kind(get_string(point, "model", where)); });
  }
  if (point.contains("degree")) {
    spec.model.degree = static_cast<unsigned>(get_uint(point, "degree", where));
  } else if (spec.model.kind == ModelKind::Polynomial || spec.model.kind == ModelKind::PowerInteraction) {
    throw std::invalid_argument(where + ": missing 'degree' for model " + std::string(to_string(spec.model.kind)));
  }
  if (point.contains("tie_policy")) {
    spec.model.tie_policy =
        rethrow_as_usage(where, "tie_policy", [&] { return parse_tie_policy(get_string(point, "tie_policy", where)); });
  }
  if (point.contains("zero_diagonal")) {
    if (!point["zero_diagonal"].is_boolean()) throw std::invalid_argument(where + ": 'zero_diagonal' must be boolean");
    spec.model.zero_diagonal = point["zero_diagonal"].get<bool>();
  }

  spec.n_neurons = get_uint(point, "N", where);
  if (spec.n_neurons == 0) throw std::invalid_argument(where + ": 'N' must be positive");

  double rho = 0.0;
  const bool has_rho = point.contains("rho");
  const bool has_flips = point.contains("n_flips");
  if (has_rho && has_flips) throw std::invalid_argument(where + ": give only one of 'rho' and 'n_flips'");
  if (has_rho) {
    rho = get_double(point, "rho", where);
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument(where + ": 'rho' must lie in [0, 1]");
    spec.n_flips = static_cast<std::size_t>(std::floor(rho * static_cast<double>(spec.n_neurons) + 1e-9));
  } else if (has_flips) {
    spec.n_flips = get_uint(point, "n_flips", where);
  }
  rho = spec.rho();

  const int load_keys = static_cast<int>(point.contains("M")) + static_cast<int>(point.contains("alpha")) +
                        static_cast<int>(point.contains("alpha_factor"));
  if (load_keys != 1) throw std::invalid_argument(where + ": give exactly one of 'M', 'alpha', 'alpha_factor'");
  if (point.contains("M")) {
    spec.n_patterns = get_uint(point, "M", where);
  } else {
    double alpha = 0.0;
    if (point.contains("alpha")) {
      alpha = get_double(point, "alpha", where);
    } else {
      if (!(rho < 0.5)) throw std::invalid_argument(where + ": 'alpha_factor' needs rho < 1/2");
      alpha = get_double(point, "alpha_factor", where) * theory::alpha_star(rho);
    }
    spec.n_patterns = rethrow_as_usage(where, "alpha", [&] { return theory::patterns_for_alpha(alpha, spec.n_neurons); });
  }

  if (point.contains("scheduler")) {
    spec.scheduler.kind =
        rethrow_as_usage(where, "scheduler", [&] { return parse_scheduler(get_string(point, "scheduler", where)); });
  }
  if (point.contains("max_passes")) spec.scheduler.max_passes = get_uint(point, "max_passes", where);
  if (point.contains("corruption")) {
    spec.corruption =
        rethrow_as_usage(where, "corruption", [&] { return parse_corruption(get_string(point, "corruption", where)); });
  }
  if (point.contains("target")) {
    const json& t = point["target"];
    if (t.is_string() && t.get<std::string>() == "all") {
      spec.target = Target::all();
    } else if (t.is_number_unsigned()) {
      spec.target = Target::fixed(t.get<std::size_t>());
    } else {
      throw std::invalid_argument(where + ": 'target' must be a pattern index or \"all\"");
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(where + ": " + e.what());
  }
  return spec;
}

SweepConfig parse_sweep_config(const json& config) {
  static const std::set<std::string> top{"master_seed", "trials",   "parallelism", "output", "format",
                                         "manifest",    "defaults", "points",      "grid"};
  reject_unknown(config, top, "config");
  SweepConfig cfg;
  if (config.contains("master_seed")) cfg.master_seed = get_uint(config, "master_seed", "config");
  if (config.contains("trials")) cfg.trials = get_uint(config, "trials", "config");
  if (cfg.trials == 0) throw std::invalid_argument("config: 'trials' must be >= 1");
  if (config.contains("parallelism")) cfg.parallelism = get_uint(config, "parallelism", "config");
  if (config.contains("output")) cfg.output = get_string(config, "output", "config");
  if (config.contains("format")) cfg.format = get_string(config, "format", "config");
  if (config.contains("manifest")) cfg.manifest = get_string(config, "manifest", "config");

  json defaults = json::object();
  if (config.contains("defaults")) {
    defaults = config["defaults"];
    reject_unknown(defaults, point_keys(), "config.defaults");
  }

  if (config.contains("points")) {
    const json& pts = config["points"];
    if (!pts.is_array()) throw std::invalid_argument("config: 'points' must be an array");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const std::string where = "config.points[" + std::to_string(k) + "]";
      reject_unknown(pts[k], point_keys(), where);
      json merged = defaults;
      merged.update(pts[k]);
      cfg.points.push_back(parse_point(merged, where));
    }
  }

  if (config.contains("grid")) {
    const json& grid = config["grid"];
    reject_unknown(grid, point_keys(), "config.grid");
    std::vector<std::pair<std::string, json>> axes;
    for (const auto& key : grid_order()) {
      if (!grid.contains(key)) continue;
      json values = grid[key];
      if (!values.is_array()) values = json::array({values});
      if (values.empty()) throw std::invalid_argument("config.grid: '" + key + "' has no values");
      axes.emplace_back(key, values);
    }
    std::vector<std::size_t> counter(axes.size(), 0);
    for (bool more = true; more;) {
      json merged = defaults;
      for (std::size_t a = 0; a < axes.size(); ++a) merged[axes[a].first] = axes[a].second[counter[a]];
      cfg.points.push_back(parse_point(merged, "config.grid[" + std::to_string(cfg.points.size()) + "]"));
      more = false;
      for (std::size_t a = axes.size(); a-- > 0;) {
        if (++counter[a] < axes[a].second.size()) {
          more = true;
          break;
        }
        counter[a] = 0;
      }
    }
  }
  if (cfg.points.empty()) throw std::invalid_argument("config: no grid points (give 'points' or 'grid')");
  return cfg;
}

json to_json(const TrialSpec& spec) {
  json j{{"model", to_string(spec.model.kind)},
         {"N", spec.n_neurons},
         {"M", spec.n_patterns},
         {"n_flips", spec.n_flips},
         {"corruption", to_string(spec.corruption)},
         {"scheduler", to_string(spec.scheduler.kind)},
         {"max_passes", spec.scheduler.max_passes},
         {"tie_policy", to_string(spec.model.tie_policy)}};
  if (spec.model.kind == ModelKind::Polynomial || spec.model.kind == ModelKind::PowerInteraction) {
    j["degree"] = spec.model.degree;
  }
  if (spec.model.zero_diagonal) j["zero_diagonal"] = true;
  j["target"] = spec.target.all_patterns ? json("all") : json(spec.target.index);
  return j;
}

json to_json(const SweepResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); };
  json j = to_json(r.point);
  j["point_index"] = r.point_index;
  j["alpha"] = num(r.alpha);
  j["rho"] = num(r.rho);
  j["trials"] = r.n_trials;
  j["successes"] = r.n_success;
  j["wilson_low"] = num(r.wilson.low);
  j["wilson_high"] = num(r.wilson.high);
  j["mean_residual_fraction"] = num(r.mean_residual_fraction);
  j["alpha_star"] = num(r.alpha_star);
  j["theory_overlay"] = num(r.theory_overlay);
  j["ties"] = r.total_ties;
  j["noise_dominated_trials"] = r.noise_dominated_trials;
  j["audit_violations"] = r.audit_violations;
  j["seed"] = r.master_seed;
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const std::atomic<bool>* cancel) {
  CLI::App app{"Dense associative memory simulator", "dam"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::optional<std::uint64_t> seed;
  std::size_t parallelism = 1;

  // theory
  auto* theory_cmd = app.add_subcommand("theory", "capacity thresholds and rate-function curves");
  double rho = 0.0;
  std::optional<std::size_t> theory_n;
  std::optional<double> theory_alpha;
  std::optional<unsigned> theory_degree;
  std::string curve;
  std::size_t points = 101;
  std::string theory_format = "table";
  theory_cmd->add_option("--rho", rho, "corruption fraction in [0, 1/2)")->capture_default_str();
  theory_cmd->add_option("--N", theory_n, "neuron count for m_max and polynomial capacity");
  theory_cmd->add_option("--alpha", theory_alpha, "load rate for m_max (default alpha_star)");
  theory_cmd->add_option("--n", theory_degree, "polynomial degree for c_n");
  theory_cmd->add_option("--curve", curve, "emit a CSV curve: rho");
  theory_cmd->add_option("--points", points, "grid size for --curve")->capture_default_str();
  theory_cmd->add_option("--format", theory_format, "table | json")->capture_default_str();

  // recover
  auto* recover_cmd = app.add_subcommand("recover", "run one seeded retrieval trial");
  PointFlags recover_flags;
  recover_flags.attach(recover_cmd);
  std::size_t trial_index = 0;
  std::string recover_format = "table";
  recover_cmd->add_option("--seed", seed, "master seed");
  recover_cmd->add_option("--trial", trial_index, "trial index under the master seed")->capture_default_str();
  recover_cmd->add_option("--format", recover_format, "table | json")->capture_default_str();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep from a JSON config");
  std::string config_path;
  std::optional<std::size_t> sweep_parallelism;
  std::string output;
  std::string sweep_format;
  std::string manifest;
  sweep_cmd->add_option("--config,-c", config_path, "sweep configuration (JSON)")->required();
  sweep_cmd->add_option("--seed", seed, "master seed (overrides DAM_MASTER_SEED and the config)");
  sweep_cmd->add_option("--parallelism,-j", sweep_parallelism, "worker threads (0 = all cores)");
  sweep_cmd->add_option("--output,-o", output, "results file (default stdout)");
  sweep_cmd->add_option("--format", sweep_format, "csv | json");
  sweep_cmd->add_option("--manifest", manifest, "manifest path (default <output>.manifest.json)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "time repeated trials");
  PointFlags bench_flags;
  bench_flags.attach(bench_cmd);
  std::size_t bench_trials = 100;
  bench_cmd->add_option("--seed", seed, "master seed");
  bench_cmd->add_option("--trials", bench_trials, "trial count")->capture_default_str();
  bench_cmd->add_option("--parallelism,-j", parallelism, "worker threads (0 = all cores)")->capture_default_str();

  // CLI11 consumes a reversed argument vector without the program name.
  std::vector<std::string> reversed;
  for (std::size_t k = args.size(); k-- > 1;) reversed.push_back(args[k]);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (*theory_cmd) {
      return cmd_theory(out, rho, theory_n, theory_alpha, theory_degree, curve, points, theory_format);
    }
    if (*recover_cmd) {
      if (recover_format != "table" && recover_format != "json") {
        throw std::invalid_argument("--format must be table or json for recover");
      }
      return cmd_recover(out, recover_flags, seed.value_or(env_seed_or(0)), trial_index, recover_format);
    }
    if (*sweep_cmd) {
      return cmd_sweep(out, err, config_path, seed, sweep_parallelism, output, sweep_format, manifest, cancel);
    }
    if (*bench_cmd) {
      return cmd_bench(out, bench_flags, seed.value_or(env_seed_or(0)), bench_trials, parallelism);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::overflow_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace dam::cli
