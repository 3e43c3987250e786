#include "simsize/harness.hpp"

#include "simsize/error.hpp"
#include "simsize/models.hpp"
#include "simsize/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

namespace simsize {

GeneratorParams tune_generator(const GeneratorRequest& request) {
  switch (request.family) {
    case OutcomeFamily::continuous:
      return tune_continuous(request.performance, request.p, request.p_noise);
    case OutcomeFamily::binary:
      if (!request.rate) throw ConfigError("binary outcome needs a prevalence");
      return tune_binary(*request.rate, request.performance, request.p, request.p_noise);
    case OutcomeFamily::survival:
      if (!request.rate) throw ConfigError("survival outcome needs an event rate");
      return tune_survival(*request.rate, request.performance, request.p,
                           request.p_noise, request.t_c);
  }
  throw ConfigError("unknown outcome family");
}

GeneratorParams GeneratorCache::get(const GeneratorRequest& request) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(request); it != cache_.end()) return it->second;
  }
  GeneratorParams params = tune_generator(request);
  std::lock_guard lock(mutex_);
  return cache_.emplace(request, params).first->second;
}

void Scenario::check() const {
  if (label.empty()) throw ConfigError("scenario label must not be empty");
  if (runs < 1) throw ConfigError("scenario '" + label + "': runs must be >= 1");
  if (n_validation < 1000) {
    throw ConfigError("scenario '" + label + "': n_validation must be >= 1000");
  }
  problem.validate();
}

double deviation_percent(double achieved, double target) {
  if (target == 0.0) throw DomainError("deviation is undefined for a zero target");
  return (achieved - target) / target * 100.0;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("mean of an empty vector");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) throw DomainError("sd needs at least two values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double cv(const std::vector<double>& values) {
  if (values.size() < 2) throw DomainError("cv needs at least two values");
  const double m = mean(values);
  if (!(m > 0.0)) throw DomainError("cv needs a positive mean");
  return sample_sd(values) / m * 100.0;
}

ValidationOutcome validate_recommendation(const SearchProblem& problem,
                                          std::int64_t n_star, int n_validation,
                                          const SeedStream& stream) {
  if (n_star < family_floor(problem)) {
    throw DomainError("recommendation " + std::to_string(n_star) +
                      " is below the smallest fittable sample size");
  }
  const Dataset validation =
      generate(problem.generator, n_validation, stream.child("validation"));
  std::string last_error;
  for (int a = 0; a <= kMaxRedraws; ++a) {
    try {
      const Dataset train = generate(problem.generator, n_star, stream.child("train", a));
      const FittedModel model = fit_model(train);
      const double achieved = evaluate_metric(
          problem.metric, linear_predictor(model, validation.x), validation.outcome);
      if (!std::isfinite(achieved)) {
        last_error = "non-finite metric value";
        continue;
      }
      return {achieved, deviation_percent(achieved, problem.tau)};
    } catch (const FitError& e) {
      last_error = e.what();
    } catch (const MetricError& e) {
      last_error = e.what();
    }
  }
  throw EvaluationError("validation training draw stayed degenerate after " +
                        std::to_string(kMaxRedraws) + " redraws: " + last_error);
}

namespace {

ScenarioSummary run_runs(const Scenario& scenario, const Evaluator* evaluator) {
  scenario.check();
  ScenarioSummary summary;
  summary.label = scenario.label;
  summary.engine = scenario.engine;
  summary.criterion = scenario.problem.criterion;
  summary.metric = scenario.problem.metric;
  summary.target = scenario.problem.tau;
  summary.runs = scenario.runs;

  // parallelism goes to runs; each search then runs single-threaded
  const int threads = std::max(1, scenario.problem.threads);
  SearchProblem problem = scenario.problem;
  problem.threads = threads > 1 && scenario.runs > 1 ? 1 : threads;
  const SeedStream base = SeedStream(problem.master_seed).child(scenario.label);

  std::vector<RunRecord> records(static_cast<std::size_t>(scenario.runs));
  std::vector<std::optional<SearchResult>> results(records.size());
  parallel_for(records.size(), threads, [&](std::size_t r) {
    RunRecord& record = records[r];
    record.run = static_cast<int>(r);
    const SeedStream run_stream = base.child("run", r);
    try {
      SearchResult result =
          evaluator ? run_search(problem, scenario.engine, *evaluator, run_stream)
                    : run_search(problem, scenario.engine, run_stream);
      record.n_star = result.n_star;
      record.evaluations_used = result.evaluations_used;
      record.wall_time = result.wall_time;
      record.flags = result.fallback_flags;
      if (scenario.validate && !evaluator) {
        const ValidationOutcome v = validate_recommendation(
            problem, result.n_star, scenario.n_validation, run_stream.child("validate"));
        record.achieved = v.achieved;
        record.deviation_percent = v.deviation_percent;
      }
      results[r] = std::move(result);
    } catch (const Error& e) {
      record.failed = true;
      record.error = e.what();
    }
  });

  std::vector<double> n_stars;
  std::vector<double> achieved;
  std::vector<double> deviations;
  std::vector<double> times;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const RunRecord& record = records[r];
    if (record.failed) {
      ++summary.failures;
      continue;
    }
    n_stars.push_back(static_cast<double>(record.n_star));
    times.push_back(record.wall_time);
    if (record.achieved) achieved.push_back(*record.achieved);
    if (record.deviation_percent) deviations.push_back(*record.deviation_percent);
    summary.results.push_back(std::move(*results[r]));
  }
  if (!n_stars.empty()) {
    summary.mean_n_star = mean(n_stars);
    summary.mean_wall_time = mean(times);
  }
  if (n_stars.size() >= 2) {
    summary.sd_n_star = sample_sd(n_stars);
    summary.cv_percent = summary.mean_n_star > 0 ? cv(n_stars) : 0.0;
  }
  if (!achieved.empty()) summary.mean_achieved = mean(achieved);
  if (!deviations.empty()) summary.mean_deviation_percent = mean(deviations);
  summary.per_run = std::move(records);
  return summary;
}

}  // namespace

ScenarioSummary run_scenario(const Scenario& scenario) {
  return run_runs(scenario, nullptr);
}

ScenarioSummary run_scenario(const Scenario& scenario, const Evaluator& evaluator) {
  return run_runs(scenario, &evaluator);
}

namespace {

const Json& field(const Json& scenario, const Json& defaults, const char* key) {
  static const Json null_value;
  if (scenario.contains(key)) return scenario.at(key);
  if (defaults.contains(key)) return defaults.at(key);
  return null_value;
}

template <typename T>
T get_or(const Json& scenario, const Json& defaults, const char* key, T fallback) {
  const Json& v = field(scenario, defaults, key);
  return v.is_null() ? fallback : v.get<T>();
}

double get_required(const Json& scenario, const Json& defaults, const char* key,
                    const std::string& label) {
  const Json& v = field(scenario, defaults, key);
  if (v.is_null()) {
    throw ConfigError("scenario '" + label + "' is missing '" + key + "'");
  }
  return v.get<double>();
}

}  // namespace

BenchmarkConfig parse_benchmark(const Json& config, GeneratorCache& cache) {
  BenchmarkConfig out;
  try {
    out.seed = config.value("seed", std::uint64_t{1});
    const Json defaults = config.value("defaults", Json::object());
    if (!config.contains("scenarios") || !config.at("scenarios").is_array()) {
      throw ConfigError("benchmark config needs a 'scenarios' array");
    }
    int index = 0;
    for (const Json& s : config.at("scenarios")) {
      Scenario scenario;
      scenario.label = get_or<std::string>(s, defaults, "label",
                                           "scenario" + std::to_string(index++));
      GeneratorRequest request;
      request.family = parse_family(get_or<std::string>(s, defaults, "outcome", ""));
      request.p = get_or<int>(s, defaults, "p", 10);
      request.p_noise = get_or<int>(s, defaults, "p_noise", 0);
      request.t_c = get_or<double>(s, defaults, "censor_time", kDefaultCensorTime);
      switch (request.family) {
        case OutcomeFamily::binary:
          request.rate = get_required(s, defaults, "prevalence", scenario.label);
          request.performance = get_required(s, defaults, "c_statistic", scenario.label);
          break;
        case OutcomeFamily::survival:
          request.rate = get_required(s, defaults, "event_rate", scenario.label);
          request.performance = get_required(s, defaults, "c_statistic", scenario.label);
          break;
        case OutcomeFamily::continuous:
          request.performance = get_required(s, defaults, "r2", scenario.label);
          break;
      }
      SearchProblem& problem = scenario.problem;
      problem.generator = cache.get(request);
      problem.metric = parse_metric(get_or<std::string>(s, defaults, "metric", ""));
      problem.tau = get_required(s, defaults, "target", scenario.label);
      problem.criterion =
          parse_criterion(get_or<std::string>(s, defaults, "criterion", "mean"));
      problem.budget = get_or<int>(s, defaults, "budget", problem.budget);
      problem.kappa = get_or<int>(s, defaults, "reps", problem.kappa);
      problem.pilot_budget = get_or<int>(s, defaults, "pilot_budget", problem.pilot_budget);
      problem.pilot_max_iters =
          get_or<int>(s, defaults, "pilot_iters", problem.pilot_max_iters);
      problem.bound_tolerance =
          get_or<double>(s, defaults, "bound_tolerance", problem.bound_tolerance);
      problem.n_test = get_or<int>(s, defaults, "n_test", problem.n_test);
      problem.n_boot = get_or<int>(s, defaults, "n_boot", problem.n_boot);
      problem.master_seed = out.seed;
      const Json& bounds = field(s, defaults, "bounds");
      if (!bounds.is_null()) {
        problem.manual_bounds =
            Bounds{bounds.at(0).get<std::int64_t>(), bounds.at(1).get<std::int64_t>()};
      }
      scenario.engine = parse_engine(get_or<std::string>(s, defaults, "engine", "gp"));
      scenario.runs = get_or<int>(s, defaults, "runs", scenario.runs);
      scenario.n_validation = get_or<int>(s, defaults, "n_validation", scenario.n_validation);
      scenario.validate = get_or<bool>(s, defaults, "validate", false);
      scenario.check();
      out.scenarios.push_back(std::move(scenario));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed benchmark config: ") + e.what());
  }
  std::vector<std::string> labels;
  for (const auto& s : out.scenarios) labels.push_back(s.label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw ConfigError("scenario labels must be unique");
  }
  return out;
}

BenchmarkConfig load_benchmark(const std::string& path, GeneratorCache& cache) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open benchmark config '" + path + "'");
  Json config;
  try {
    config = Json::parse(in, nullptr, true, true);
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return parse_benchmark(config, cache);
}

std::string format_number(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

void write_runs_csv(std::ostream& out, const std::vector<ScenarioSummary>& summaries,
                    bool timing) {
  out << "scenario_label,run,engine,n_star,achieved,deviation_percent,"
         "evaluations_used,wall_time_s\n";
  for (const auto& s : summaries) {
    for (const auto& r : s.per_run) {
      out << s.label << ',' << r.run << ',' << to_string(s.engine) << ',';
      if (r.failed) {
        out << ",,,,\n";
        continue;
      }
      out << r.n_star << ',' << optional_number(r.achieved) << ','
          << optional_number(r.deviation_percent) << ',' << r.evaluations_used << ','
          << format_number(timing ? r.wall_time : 0.0) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out,
                       const std::vector<ScenarioSummary>& summaries, bool timing) {
  out << "scenario_label,engine,criterion,metric,target,S,failures,mean_n_star,"
         "sd_n_star,cv_percent,mean_achieved,mean_deviation_percent,mean_wall_time_s\n";
  for (const auto& s : summaries) {
    out << s.label << ',' << to_string(s.engine) << ',' << to_string(s.criterion.kind)
        << ',' << to_string(s.metric) << ',' << format_number(s.target) << ',' << s.runs
        << ',' << s.failures << ',' << format_number(s.mean_n_star) << ','
        << format_number(s.sd_n_star) << ',' << format_number(s.cv_percent) << ','
        << optional_number(s.mean_achieved) << ','
        << optional_number(s.mean_deviation_percent) << ','
        << format_number(timing ? s.mean_wall_time : 0.0) << '\n';
  }
}

}  // namespace simsize
