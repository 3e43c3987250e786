#include "simsize/cli.hpp"

#include "simsize/error.hpp"
#include "simsize/harness.hpp"
#include "simsize/serialize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace simsize {

namespace {

struct GeneratorOptions {
  std::string outcome;
  std::optional<double> prevalence;
  std::optional<double> event_rate;
  std::optional<double> c_statistic;
  std::optional<double> r2;
  int p = 10;
  int p_noise = 0;
  double censor_time = kDefaultCensorTime;
  std::string generator_file;
};

struct SearchOptions {
  std::string metric = "auc";
  std::optional<double> target;
  std::string criterion = "mean";
  std::string engine = "gp";
  int budget = 1000;
  int reps = 20;
  int pilot_budget = 100;
  int pilot_iters = 10;
  int n_test = kDefaultTestSize;
  std::string bounds;
  std::optional<std::int64_t> start_n;
};

struct CommonOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  bool timing = false;
};

void add_generator_options(CLI::App& cmd, GeneratorOptions& g, bool allow_file) {
  cmd.add_option("--outcome", g.outcome, "Outcome family: binary, continuous, survival");
  cmd.add_option("--prevalence", g.prevalence, "Binary outcome prevalence");
  cmd.add_option("--event-rate", g.event_rate, "Survival event rate");
  cmd.add_option("--c-statistic", g.c_statistic,
                 "Large-sample C-statistic (binary) or C-index (survival)");
  cmd.add_option("--r2", g.r2, "Large-sample R-squared (continuous)");
  cmd.add_option("--p", g.p, "Number of candidate predictors")->check(CLI::PositiveNumber);
  cmd.add_option("--p-noise", g.p_noise, "How many of the p predictors carry no signal")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--censor-time", g.censor_time, "Administrative censoring time")
      ->check(CLI::PositiveNumber);
  if (allow_file) {
    cmd.add_option("--generator-file", g.generator_file,
                   "Tuned generator JSON (output of 'tune'); replaces the options above");
  }
}

void add_search_options(CLI::App& cmd, SearchOptions& s) {
  cmd.add_option("--metric", s.metric, "auc, c_index, r2 or calibration_slope");
  cmd.add_option("--target", s.target, "Target performance")->required();
  cmd.add_option("--criterion", s.criterion, "mean or assurance");
  cmd.add_option("--engine", s.engine, "gp, bisection or gp-bs");
  cmd.add_option("--budget", s.budget, "Main evaluation budget");
  cmd.add_option("--reps", s.reps, "Replicates per candidate sample size");
  cmd.add_option("--pilot-budget", s.pilot_budget, "Bound-finding budget");
  cmd.add_option("--pilot-iters", s.pilot_iters, "Bound-finding iteration cap");
  cmd.add_option("--n-test", s.n_test, "Size of the fixed test set");
  cmd.add_option("--bounds", s.bounds, "Manual search bounds MIN,MAX; skips bound finding");
  cmd.add_option("--start-n", s.start_n, "Starting sample size of the bound finder");
}

void add_common_options(CLI::App& cmd, CommonOptions& c, const std::string& out_help) {
  cmd.add_option("--seed", c.seed, "Master seed");
  cmd.add_option("--threads", c.threads, "Worker threads; output does not depend on it")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--out", c.out, out_help);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path + "'");
  file << text;
  if (!file) throw Error("failed writing '" + path + "'");
}

std::string render(const Json& j) { return j.dump(2) + "\n"; }

GeneratorRequest generator_request(const GeneratorOptions& g) {
  if (g.outcome.empty()) throw ConfigError("--outcome is required");
  GeneratorRequest request;
  request.family = parse_family(g.outcome);
  request.p = g.p;
  request.p_noise = g.p_noise;
  request.t_c = g.censor_time;
  auto need = [](const std::optional<double>& v, const char* flag) {
    if (!v) throw ConfigError(std::string(flag) + " is required for this outcome");
    return *v;
  };
  switch (request.family) {
    case OutcomeFamily::binary:
      request.rate = need(g.prevalence, "--prevalence");
      request.performance = need(g.c_statistic, "--c-statistic");
      break;
    case OutcomeFamily::survival:
      request.rate = need(g.event_rate, "--event-rate");
      request.performance = need(g.c_statistic, "--c-statistic");
      break;
    case OutcomeFamily::continuous:
      request.performance = need(g.r2, "--r2");
      break;
  }
  return request;
}

Json request_json(const GeneratorRequest& r) {
  Json j;
  j["outcome"] = std::string(to_string(r.family));
  j["prevalence"] = r.family == OutcomeFamily::binary ? Json(*r.rate) : Json(nullptr);
  j["event_rate"] = r.family == OutcomeFamily::survival ? Json(*r.rate) : Json(nullptr);
  if (r.family == OutcomeFamily::continuous) {
    j["r2"] = r.performance;
  } else {
    j["c_statistic"] = r.performance;
  }
  j["p"] = r.p;
  j["p_noise"] = r.p_noise;
  j["censor_time"] = r.family == OutcomeFamily::survival ? Json(r.t_c) : Json(nullptr);
  return j;
}

GeneratorParams resolve_generator(const GeneratorOptions& g) {
  if (!g.generator_file.empty()) {
    const Json j = read_json_file(g.generator_file);
    // accepts both a bare generator and the full output of 'tune'
    try {
      return generator_from_json(j.contains("result") ? j.at("result") : j);
    } catch (const Json::exception& e) {
      throw ConfigError("malformed generator file: " + std::string(e.what()));
    }
  }
  return tune_generator(generator_request(g));
}

std::optional<Bounds> parse_bounds(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("--bounds expects MIN,MAX");
  try {
    std::size_t used = 0;
    const std::string lo = text.substr(0, comma);
    const std::string hi = text.substr(comma + 1);
    Bounds b{std::stoll(lo, &used), 0};
    if (used != lo.size()) throw ConfigError("--bounds expects MIN,MAX");
    b.n_max = std::stoll(hi, &used);
    if (used != hi.size()) throw ConfigError("--bounds expects MIN,MAX");
    if (b.n_min < 1 || b.n_max < b.n_min) {
      throw ConfigError("--bounds needs 1 <= MIN <= MAX");
    }
    return b;
  } catch (const std::logic_error&) {
    throw ConfigError("--bounds expects MIN,MAX");
  }
}

SearchProblem build_problem(const GeneratorParams& generator, const SearchOptions& s,
                            const CommonOptions& c) {
  SearchProblem problem;
  problem.generator = generator;
  problem.metric = parse_metric(s.metric);
  problem.tau = *s.target;
  problem.criterion = parse_criterion(s.criterion);
  problem.budget = s.budget;
  problem.kappa = s.reps;
  problem.pilot_budget = s.pilot_budget;
  problem.pilot_max_iters = s.pilot_iters;
  problem.n_test = s.n_test;
  problem.master_seed = c.seed;
  problem.manual_bounds = parse_bounds(s.bounds);
  problem.start_n = s.start_n;
  problem.threads = c.threads;
  problem.validate();
  return problem;
}

int run_tune(const GeneratorOptions& g, const CommonOptions& c, std::ostream& out) {
  const GeneratorRequest request = generator_request(g);
  Json doc;
  doc["config"] = request_json(request);
  doc["result"] = to_json(tune_generator(request));
  write_text(c.out, render(doc), out);
  return 0;
}

int run_search_command(const GeneratorOptions& g, const SearchOptions& s,
                       const CommonOptions& c, std::ostream& out) {
  // validate the cheap options before spending time on tuning
  parse_metric(s.metric);
  parse_criterion(s.criterion);
  const EngineKind engine = parse_engine(s.engine);
  parse_bounds(s.bounds);
  if (g.generator_file.empty()) {
    const GeneratorRequest request = generator_request(g);
    const MetricKind metric = parse_metric(s.metric);
    if (!metric_supports(metric, request.family)) {
      throw DomainError("metric " + std::string(to_string(metric)) +
                        " is not defined for " + std::string(to_string(request.family)) +
                        " outcomes");
    }
  }
  if (!metric_target_valid(parse_metric(s.metric), *s.target)) {
    throw DomainError("target " + std::to_string(*s.target) + " is outside the range of " +
                      std::string(to_string(parse_metric(s.metric))));
  }
  const SearchProblem problem = build_problem(resolve_generator(g), s, c);
  SearchResult result = run_search(problem, engine, SeedStream(problem.master_seed));
  if (!c.timing) result.wall_time = 0.0;

  Json config = to_json(problem);
  config["engine"] = std::string(to_string(engine));
  Json doc;
  doc["config"] = config;
  doc["result"] = to_json(result);
  write_text(c.out, render(doc), out);
  return 0;
}

int run_benchmark_command(const std::string& config_path, const CommonOptions& c,
                          bool seed_given, std::ostream& out) {
  GeneratorCache cache;
  Json raw = read_json_file(config_path);
  if (seed_given) raw["seed"] = c.seed;
  BenchmarkConfig config = parse_benchmark(raw, cache);

  std::vector<ScenarioSummary> summaries;
  Json resolved;
  resolved["seed"] = config.seed;
  Json scenarios = Json::array();
  for (Scenario& scenario : config.scenarios) {
    scenario.problem.threads = c.threads;
    Json s = to_json(scenario.problem);
    s["label"] = scenario.label;
    s["engine"] = std::string(to_string(scenario.engine));
    s["runs"] = scenario.runs;
    s["n_validation"] = scenario.n_validation;
    s["validate"] = scenario.validate;
    scenarios.push_back(s);
    summaries.push_back(run_scenario(scenario));
  }
  resolved["scenarios"] = scenarios;

  const std::string prefix = c.out.empty() ? "benchmark" : c.out;
  std::ostringstream runs;
  write_runs_csv(runs, summaries, c.timing);
  std::ostringstream summary;
  write_summary_csv(summary, summaries, c.timing);
  write_text(prefix + "_runs.csv", runs.str(), out);
  write_text(prefix + "_summary.csv", summary.str(), out);
  write_text(prefix + "_config.json", render(resolved), out);
  out << summary.str();
  return 0;
}

int run_validate_command(const GeneratorOptions& g, const SearchOptions& s,
                         const CommonOptions& c, const std::string& result_path,
                         std::optional<std::int64_t> n, int n_validation,
                         std::ostream& out) {
  SearchProblem problem;
  std::int64_t n_star = 0;
  if (!result_path.empty()) {
    const Json doc = read_json_file(result_path);
    try {
      if (!doc.contains("config") || !doc.contains("result")) {
        throw ConfigError("'" + result_path + "' is not the output of 'search'");
      }
      problem = problem_from_json(doc.at("config"));
      n_star = result_from_json(doc.at("result")).n_star;
    } catch (const Json::exception& e) {
      throw ConfigError("malformed result file: " + std::string(e.what()));
    }
    if (n) n_star = *n;
    problem.master_seed = c.seed;
  } else {
    if (!n) throw ConfigError("validate needs --result or --n");
    problem = build_problem(resolve_generator(g), s, c);
    n_star = *n;
  }
  if (n_validation < 1000) throw ConfigError("--n-validation must be at least 1000");
  const ValidationOutcome v = validate_recommendation(
      problem, n_star, n_validation, SeedStream(c.seed).child("validate"));

  Json config;
  config["generator"] = to_json(problem.generator);
  config["metric"] = std::string(to_string(problem.metric));
  config["target"] = problem.tau;
  config["n_validation"] = n_validation;
  config["seed"] = c.seed;
  Json result;
  result["n_star"] = n_star;
  result["achieved"] = v.achieved;
  result["deviation_percent"] = v.deviation_percent;
  Json doc;
  doc["config"] = config;
  doc["result"] = result;
  write_text(c.out, render(doc), out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation-based sample size search for prediction models", "simsize"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GeneratorOptions gen;
  SearchOptions search;
  CommonOptions common;
  std::string config_path;
  std::string result_path;
  std::optional<std::int64_t> n;
  int n_validation = 30000;

  auto* tune = app.add_subcommand("tune", "Tune a data-generating process and print it");
  add_generator_options(*tune, gen, false);
  tune->add_option("--out", common.out, "Output JSON file (default: stdout)");

  auto* search_cmd = app.add_subcommand("search", "Find the minimum sample size");
  add_generator_options(*search_cmd, gen, true);
  add_search_options(*search_cmd, search);
  add_common_options(*search_cmd, common, "Output JSON file (default: stdout)");
  search_cmd->add_flag("--timing", common.timing, "Record wall-clock time in the output");

  auto* bench = app.add_subcommand("benchmark", "Run a scenario grid from a config file");
  bench->add_option("--config", config_path, "Benchmark config (JSON)")->required();
  add_common_options(*bench, common,
                     "Output prefix; writes PREFIX_runs.csv, PREFIX_summary.csv "
                     "and PREFIX_config.json");
  bench->add_flag("--timing", common.timing, "Record wall-clock times in the CSVs");

  auto* validate = app.add_subcommand("validate", "Score a recommendation on fresh data");
  validate->add_option("--result", result_path, "Output file of 'search'");
  validate->add_option("--n", n, "Sample size to validate (overrides --result)");
  validate->add_option("--n-validation", n_validation, "Validation set size");
  add_generator_options(*validate, gen, true);
  validate->add_option("--metric", search.metric, "auc, c_index, r2 or calibration_slope");
  validate->add_option("--target", search.target, "Target performance");
  add_common_options(*validate, common, "Output JSON file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (tune->parsed()) return run_tune(gen, common, out);
    if (search_cmd->parsed()) return run_search_command(gen, search, common, out);
    if (bench->parsed()) {
      return run_benchmark_command(config_path, common, bench->count("--seed") > 0, out);
    }
    if (validate->parsed()) {
      if (result_path.empty() && !search.target) {
        throw ConfigError("validate needs --target when --result is not given");
      }
      return run_validate_command(gen, search, common, result_path, n, n_validation, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace simsize
