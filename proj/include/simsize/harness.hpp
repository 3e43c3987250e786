#pragma once

#include "simsize/engines.hpp"
#include "simsize/serialize.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace simsize {

/// Inputs of the generator tuner, as written in configs and on the command line.
struct GeneratorRequest {
  OutcomeFamily family = OutcomeFamily::binary;
  /// Prevalence (binary) or event rate (survival).
  std::optional<double> rate;
  /// C-statistic (binary, survival) or R-squared (continuous).
  double performance = 0.0;
  int p = 10;
  int p_noise = 0;
  double t_c = kDefaultCensorTime;

  auto operator<=>(const GeneratorRequest&) const = default;
};

GeneratorParams tune_generator(const GeneratorRequest& request);

/// Memoises tuned generators; tuning survival generators is the slow part of
/// setting up a grid.
class GeneratorCache {
 public:
  GeneratorParams get(const GeneratorRequest& request);

 private:
  std::mutex mutex_;
  std::map<GeneratorRequest, GeneratorParams> cache_;
};

struct Scenario {
  std::string label;
  SearchProblem problem;
  EngineKind engine = EngineKind::gp;
  int runs = 20;
  int n_validation = 30000;
  /// Train one model at each recommendation and score it on fresh data.
  bool validate = false;

  void check() const;
};

struct RunRecord {
  int run = 0;
  bool failed = false;
  std::string error;
  std::int64_t n_star = 0;
  std::optional<double> achieved;
  std::optional<double> deviation_percent;
  int evaluations_used = 0;
  double wall_time = 0.0;
  std::vector<std::string> flags;
};

struct ScenarioSummary {
  std::string label;
  EngineKind engine = EngineKind::gp;
  Criterion criterion;
  MetricKind metric = MetricKind::auc;
  double target = 0.0;
  int runs = 0;
  int failures = 0;
  double mean_n_star = 0.0;
  double sd_n_star = 0.0;
  double cv_percent = 0.0;
  std::optional<double> mean_achieved;
  std::optional<double> mean_deviation_percent;
  double mean_wall_time = 0.0;
  std::vector<RunRecord> per_run;
  /// Complete results of the successful runs, in run order.
  std::vector<SearchResult> results;
};

/// Runs the scenario `runs` times on seed paths (seed, label, run index).
/// Runs execute in parallel over problem.threads; output does not depend on it.
ScenarioSummary run_scenario(const Scenario& scenario);
/// Same, with replicate values drawn from `evaluator` instead of simulation.
/// Recommendations are not validated in this form.
ScenarioSummary run_scenario(const Scenario& scenario, const Evaluator& evaluator);

struct ValidationOutcome {
  double achieved = 0.0;
  double deviation_percent = 0.0;
};

/// Fits one model on a fresh sample of n_star and scores it on n_validation
/// fresh observations.
ValidationOutcome validate_recommendation(const SearchProblem& problem,
                                          std::int64_t n_star, int n_validation,
                                          const SeedStream& stream);

/// (achieved - target) / target * 100.
double deviation_percent(double achieved, double target);

/// Sample mean and standard deviation (denominator size - 1).
double mean(const std::vector<double>& values);
double sample_sd(const std::vector<double>& values);

/// sd / mean * 100. Throws DomainError unless mean > 0 and size >= 2.
double cv(const std::vector<double>& values);

struct BenchmarkConfig {
  std::uint64_t seed = 1;
  std::vector<Scenario> scenarios;
};

/// Parses a benchmark grid; tuned generators are shared through `cache`.
BenchmarkConfig parse_benchmark(const Json& config, GeneratorCache& cache);
BenchmarkConfig load_benchmark(const std::string& path, GeneratorCache& cache);

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// One row per (scenario, run). Wall times are written as 0 unless
/// `timing` is set, which keeps files byte-reproducible.
void write_runs_csv(std::ostream& out, const std::vector<ScenarioSummary>& summaries,
                    bool timing);
void write_summary_csv(std::ostream& out,
                       const std::vector<ScenarioSummary>& summaries, bool timing);

}  // namespace simsize
