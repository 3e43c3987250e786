// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fails.

#include "oracles.hpp"

#include "simsize/cli.hpp"
#include "simsize/harness.hpp"
#include "simsize/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

using namespace simsize;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr int kRuns = 20;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int worker_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GeneratorCache& generators() {
  static GeneratorCache cache;
  return cache;
}

GeneratorParams binary_gen(int p) {
  return generators().get({OutcomeFamily::binary, 0.2, 0.8, p, 0, kDefaultCensorTime});
}
GeneratorParams continuous_gen(double r2, int p) {
  return generators().get({OutcomeFamily::continuous, std::nullopt, r2, p, 0,
                           kDefaultCensorTime});
}
GeneratorParams survival_gen(double rate, int p) {
  return generators().get({OutcomeFamily::survival, rate, 0.8, p, 0, kDefaultCensorTime});
}

Scenario make_scenario(std::string label, GeneratorParams g, MetricKind metric, double tau,
                       Criterion criterion, EngineKind engine) {
  Scenario s;
  s.label = std::move(label);
  s.engine = engine;
  s.runs = kRuns;
  s.problem.generator = std::move(g);
  s.problem.metric = metric;
  s.problem.tau = tau;
  s.problem.criterion = criterion;
  s.problem.budget = 1000;
  s.problem.kappa = 20;
  s.problem.master_seed = kSeed;
  s.problem.threads = worker_threads();
  return s;
}

// Runs are memoised by label so criteria sharing a scenario share its runs.
std::map<std::string, ScenarioSummary>& completed() {
  static std::map<std::string, ScenarioSummary> runs;
  return runs;
}

const ScenarioSummary& run(const Scenario& s) {
  auto it = completed().find(s.label);
  if (it != completed().end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioSummary summary = run_scenario(s);
  std::cerr << "  " << s.label << ": mean n* " << fmt(summary.mean_n_star) << ", cv "
            << fmt(summary.cv_percent) << "%, failures " << summary.failures;
  if (summary.mean_deviation_percent) {
    std::cerr << ", mean deviation " << fmt(*summary.mean_deviation_percent) << "%";
  }
  std::cerr << " (" << fmt(elapsed_since(t0), 1) << " s)\n";
  return completed().emplace(s.label, std::move(summary)).first->second;
}

struct Benchmark {
  std::string name;
  GeneratorParams generator;
  MetricKind metric;
  double tau;
  double lo, hi, max_cv;
};

std::vector<Benchmark> benchmarks() {
  return {
      {"binary", binary_gen(10), MetricKind::auc, 0.75, 90, 135, 8},
      {"continuous", continuous_gen(0.7, 10), MetricKind::r2, 0.65, 65, 95, 12},
      {"survival", survival_gen(0.8, 10), MetricKind::c_index, 0.75, 26, 40, 10},
  };
}

Scenario benchmark_scenario(const Benchmark& b, Criterion criterion, EngineKind engine) {
  const std::string label = b.name + "_" + std::string(to_string(b.metric)) + "_" +
                            std::string(to_string(criterion.kind)) + "_" +
                            std::string(to_string(engine));
  return make_scenario(label, b.generator, b.metric, b.tau, criterion, engine);
}

Verdict benchmark_criterion(const Benchmark& b) {
  const ScenarioSummary& s = run(benchmark_scenario(b, Criterion::mean(), EngineKind::gp));
  const bool ok = s.failures == 0 && s.mean_n_star >= b.lo && s.mean_n_star <= b.hi &&
                  s.cv_percent <= b.max_cv;
  return {ok, "mean n* " + fmt(s.mean_n_star) + " (want " + fmt(b.lo, 0) + ".." +
                  fmt(b.hi, 0) + "), cv " + fmt(s.cv_percent) + "% (want <= " +
                  fmt(b.max_cv, 0) + "%), failures " + std::to_string(s.failures)};
}

Verdict assurance_dominance() {
  Verdict v{true, ""};
  for (const Benchmark& b : benchmarks()) {
    const double m = run(benchmark_scenario(b, Criterion::mean(), EngineKind::gp)).mean_n_star;
    const double a =
        run(benchmark_scenario(b, Criterion::assurance(), EngineKind::gp)).mean_n_star;
    v.pass = v.pass && a > m;
    v.detail += b.name + " " + fmt(a) + " vs " + fmt(m) + "; ";
  }
  return v;
}

Verdict deviation_criterion() {
  struct Case {
    std::string name;
    GeneratorParams generator;
  };
  const std::vector<Case> cases{{"binary", binary_gen(20)},
                                {"continuous", continuous_gen(0.5, 20)},
                                {"survival", survival_gen(0.4, 20)}};
  Verdict v{true, ""};
  for (const Case& c : cases) {
    Scenario s = make_scenario(c.name + "_calibration_slope_p20_validated", c.generator,
                               MetricKind::calibration_slope, 0.9, Criterion::mean(),
                               EngineKind::gp);
    s.validate = true;
    s.n_validation = 30000;
    const ScenarioSummary& summary = run(s);
    const double dev = summary.mean_deviation_percent.value_or(NAN);
    v.pass = v.pass && summary.failures == 0 && std::abs(dev) <= 2.0;
    v.detail += c.name + " " + fmt(dev) + "%; ";
  }
  v.detail += "(want each within +-2%)";
  return v;
}

Verdict engine_ranking() {
  std::vector<Benchmark> grid = benchmarks();
  grid.push_back({"binary", binary_gen(10), MetricKind::calibration_slope, 0.9, 0, 0, 0});
  grid.push_back(
      {"continuous", continuous_gen(0.7, 10), MetricKind::calibration_slope, 0.9, 0, 0, 0});
  grid.push_back(
      {"survival", survival_gen(0.8, 10), MetricKind::calibration_slope, 0.9, 0, 0, 0});
  const std::vector<EngineKind> engines{EngineKind::gp, EngineKind::bisection,
                                        EngineKind::gp_bs};
  std::vector<std::vector<double>> cvs(engines.size());
  std::vector<double> rank_sum(engines.size(), 0.0);
  for (const Benchmark& b : grid) {
    std::vector<double> row;
    for (EngineKind e : engines) {
      row.push_back(run(benchmark_scenario(b, Criterion::mean(), e)).cv_percent);
    }
    // average ranks, ties shared
    for (std::size_t i = 0; i < row.size(); ++i) {
      double below = 0.0, tied = 0.0;
      for (double other : row) {
        if (other < row[i]) below += 1.0;
        if (other == row[i]) tied += 1.0;
      }
      rank_sum[i] += below + (tied + 1.0) / 2.0;
      cvs[i].push_back(row[i]);
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[(v.size() - 1) / 2] + v[v.size() / 2]);
  };
  const double gp_median = median(cvs[0]);
  const double bis_median = median(cvs[1]);
  std::vector<double> mean_rank;
  for (double r : rank_sum) mean_rank.push_back(r / static_cast<double>(grid.size()));
  const bool best_rank =
      mean_rank[0] <= *std::min_element(mean_rank.begin() + 1, mean_rank.end());
  return {gp_median <= bis_median && best_rank,
          "median cv gp " + fmt(gp_median) + "%, bisection " + fmt(bis_median) +
              "%; mean rank gp " + fmt(mean_rank[0]) + ", bisection " + fmt(mean_rank[1]) +
              ", gp-bs " + fmt(mean_rank[2])};
}

std::vector<SearchResult>& oracle_results() {
  static std::vector<SearchResult> results;
  return results;
}

Verdict oracle_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const FunctionEvaluator oracle(
      [](std::int64_t n, Rng&) { return static_cast<double>(n) / (n + 100.0); }, 2);
  SearchProblem problem;
  problem.generator = continuous_gen(0.5, 2);
  problem.metric = MetricKind::r2;
  problem.tau = 0.5;
  const SeedStream stream = SeedStream(kSeed).child("oracle");
  const BoundsResult bounds = find_bounds(problem, oracle, stream.child("pilot"));
  const SearchResult bis = run_search(problem, EngineKind::bisection, oracle, stream);
  const SearchResult gp = run_search(problem, EngineKind::gp, oracle, stream);
  const SearchResult hybrid = run_search(problem, EngineKind::gp_bs, oracle, stream);
  oracle_results() = {bis, gp, hybrid};
  const double seconds = elapsed_since(t0);
  const bool ok = bounds.bounds.n_min <= 100 && bounds.bounds.n_max >= 100 &&
                  bis.n_star == 100 && std::abs(gp.n_star - 100) <= 2 &&
                  std::abs(hybrid.n_star - 100) <= 2 && seconds < 1.0;
  return {ok, "bracket (" + std::to_string(bounds.bounds.n_min) + ", " +
                  std::to_string(bounds.bounds.n_max) + "), bisection " +
                  std::to_string(bis.n_star) + ", gp " + std::to_string(gp.n_star) +
                  ", gp-bs " + std::to_string(hybrid.n_star) + ", " + fmt(seconds, 3) + " s"};
}

// 10^6 fresh observations per generator.
Verdict tuner_oracles() {
  Verdict v{true, ""};
  constexpr int kChunks = 10;
  constexpr int kChunk = 100000;
  struct Case {
    std::string name;
    GeneratorParams g;
    double rate;
    double performance;
  };
  const std::vector<Case> cases{
      {"binary p10", binary_gen(10), 0.2, 0.8},
      {"binary p20", binary_gen(20), 0.2, 0.8},
      {"continuous 0.7", continuous_gen(0.7, 10), 0, 0.7},
      {"continuous 0.5", continuous_gen(0.5, 20), 0, 0.5},
      {"survival 0.8", survival_gen(0.8, 10), 0.8, 0.8},
      {"survival 0.4", survival_gen(0.4, 20), 0.4, 0.8},
  };
  for (const Case& c : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const SeedStream stream = SeedStream(kSeed).child("tuner-oracle").child(c.name);
    bool ok = true;
    std::string got;
    if (c.g.family == OutcomeFamily::continuous) {
      const Dataset train = generate(c.g, kChunks * kChunk, stream.child("train"));
      const FittedModel model = fit_model(train);
      const Dataset test = generate(c.g, kChunks * kChunk, stream.child("test"));
      const Eigen::VectorXd pred = linear_predictor(model, test.x);
      const double r2 = r2_oos({pred.data(), static_cast<std::size_t>(pred.size())},
                               {test.outcome.y.data(),
                                static_cast<std::size_t>(test.outcome.y.size())});
      ok = std::abs(r2 - c.performance) <= 0.005;
      got = "R2 " + fmt(r2, 4);
    } else {
      std::vector<double> eta, y, event;
      for (int k = 0; k < kChunks; ++k) {
        const Dataset d = generate(c.g, kChunk, stream.child("chunk", k));
        const Eigen::VectorXd e = true_linear_predictor(c.g, d.x);
        eta.insert(eta.end(), e.data(), e.data() + e.size());
        y.insert(y.end(), d.outcome.y.data(), d.outcome.y.data() + d.outcome.y.size());
        if (c.g.family == OutcomeFamily::survival) {
          event.insert(event.end(), d.outcome.event.data(),
                       d.outcome.event.data() + d.outcome.event.size());
        }
      }
      const std::vector<double>& indicator = c.g.family == OutcomeFamily::binary ? y : event;
      double rate = 0.0;
      for (double x : indicator) rate += x;
      rate /= static_cast<double>(indicator.size());
      const double disc =
          c.g.family == OutcomeFamily::binary ? auc(eta, y) : c_index(eta, y, event);
      ok = std::abs(rate - c.rate) <= 0.01 && std::abs(disc - c.performance) <= 0.01;
      got = "rate " + fmt(rate, 4) + " C " + fmt(disc, 4);
    }
    v.pass = v.pass && ok;
    v.detail += c.name + ": " + got + " (" + fmt(elapsed_since(t0), 1) + " s); ";
  }
  return v;
}

Verdict metric_equivalence() {
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_int_distribution<int> level(0, 4);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  int auc_checked = 0, auc_bad = 0, c_checked = 0, c_bad = 0, r2_bad = 0;
  double r2_worst = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const int n = size(rng);
    std::vector<double> s(n), y(n), t(n), d(n), pred(n), cont(n);
    for (int i = 0; i < n; ++i) {
      // coarse levels force ties in scores and times
      s[i] = level(rng);
      y[i] = coin(rng) ? 1.0 : 0.0;
      t[i] = 1 + level(rng);
      d[i] = coin(rng) ? 1.0 : 0.0;
      pred[i] = normal(rng);
      cont[i] = pred[i] + normal(rng);
    }
    y[0] = 1.0;
    y[1] = 0.0;
    ++auc_checked;
    if (auc(s, y) != oracle::auc_pairs(s, y)) ++auc_bad;
    const double c_expected = oracle::c_index_pairs(s, t, d);
    if (!std::isnan(c_expected)) {
      ++c_checked;
      if (c_index(s, t, d) != c_expected) ++c_bad;
    }
    const double r2_gap = std::abs(r2_oos(pred, cont) - oracle::r2_direct(pred, cont));
    r2_worst = std::max(r2_worst, r2_gap);
    if (!(r2_gap <= 1e-12)) ++r2_bad;
  }
  return {auc_bad == 0 && c_bad == 0 && r2_bad == 0 && c_checked > 100,
          "auc mismatches " + std::to_string(auc_bad) + "/" + std::to_string(auc_checked) +
              ", c_index mismatches " + std::to_string(c_bad) + "/" +
              std::to_string(c_checked) + ", worst r2 gap " + [&] {
                std::ostringstream o;
                o << r2_worst;
                return o.str();
              }()};
}

std::string cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) return "exit " + std::to_string(code) + ": " + err.str();
  return out.str();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict cli_determinism() {
  const std::vector<std::vector<std::string>> searches{
      {"search", "--outcome", "binary", "--prevalence", "0.2", "--c-statistic", "0.8", "--p",
       "5", "--metric", "auc", "--target", "0.74", "--n-test", "5000", "--budget", "200"},
      {"search", "--outcome", "continuous", "--r2", "0.5", "--p", "5", "--metric",
       "calibration_slope", "--target", "0.9", "--criterion", "assurance", "--engine",
       "gp-bs", "--n-test", "5000", "--budget", "300"},
      {"search", "--outcome", "survival", "--event-rate", "0.6", "--c-statistic", "0.75",
       "--p", "5", "--metric", "c_index", "--target", "0.7", "--engine", "bisection",
       "--n-test", "5000", "--budget", "200"},
      {"validate", "--outcome", "binary", "--prevalence", "0.2", "--c-statistic", "0.8",
       "--p", "5", "--metric", "calibration_slope", "--target", "0.9", "--n", "300"},
  };
  int mismatches = 0;
  int compared = 0;
  for (auto args : searches) {
    args.insert(args.end(), {"--seed", "7", "--threads"});
    std::string reference;
    for (const char* threads : {"1", "2", "5"}) {
      args.push_back(threads);
      const std::string out = cli(args);
      args.pop_back();
      if (reference.empty()) {
        reference = out;
        if (out.rfind("exit", 0) == 0) ++mismatches;
      } else {
        ++compared;
        if (out != reference) ++mismatches;
      }
    }
  }

  const auto dir = std::filesystem::temp_directory_path() / "simsize_acceptance";
  std::filesystem::create_directories(dir);
  const auto config = dir / "grid.json";
  {
    std::ofstream out(config);
    out << R"({"seed": 3,
      "defaults": {"p": 4, "budget": 100, "reps": 5, "n_test": 3000, "runs": 3},
      "scenarios": [
        {"label": "b", "outcome": "binary", "prevalence": 0.3, "c_statistic": 0.8,
         "metric": "auc", "target": 0.74, "validate": true, "n_validation": 5000},
        {"label": "s", "outcome": "survival", "event_rate": 0.5, "c_statistic": 0.8,
         "metric": "c_index", "target": 0.74, "engine": "gp-bs"}]})";
  }
  std::vector<std::string> files;
  for (const char* threads : {"1", "4"}) {
    const std::string prefix = (dir / (std::string("t") + threads)).string();
    const std::string echo = cli({"benchmark", "--config", config.string(), "--out", prefix,
                                  "--threads", threads});
    files.push_back(echo + slurp(prefix + "_runs.csv") + slurp(prefix + "_summary.csv") +
                    slurp(prefix + "_config.json"));
  }
  ++compared;
  if (files[0] != files[1] || files[0].rfind("exit", 0) == 0) ++mismatches;
  return {mismatches == 0, std::to_string(compared) + " comparisons, " +
                               std::to_string(mismatches) + " mismatches"};
}

Verdict budget_accounting() {
  int checked = 0;
  int violations = 0;
  auto check = [&](const SearchProblem& p, const SearchResult& r) {
    ++checked;
    int attempts = 0;
    for (const auto& e : r.trace.entries) attempts += e.attempts;
    if (attempts != r.evaluations_used || attempts > p.pilot_budget + p.budget) ++violations;
  };
  SearchProblem oracle_problem;
  for (const SearchResult& r : oracle_results()) check(oracle_problem, r);
  for (const auto& [label, summary] : completed()) {
    SearchProblem p;  // every scenario here uses the default B0 and B = 1000
    for (const SearchResult& r : summary.results) check(p, r);
  }
  return {violations == 0 && checked > 0, std::to_string(checked) + " results checked, " +
                                              std::to_string(violations) + " violations"};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<int, Verdict> verdicts;
  auto stage = [&](int id, auto&& fn) {
    std::cerr << "criterion " << id << "...\n";
    Verdict v = fn();
    while (!v.detail.empty() && (v.detail.back() == ' ' || v.detail.back() == ';')) {
      v.detail.pop_back();
    }
    verdicts[id] = std::move(v);
  };
  stage(7, oracle_exactness);
  stage(9, metric_equivalence);
  stage(8, tuner_oracles);
  stage(10, cli_determinism);
  const auto bench = benchmarks();
  for (int i = 0; i < 3; ++i) stage(i + 1, [&] { return benchmark_criterion(bench[i]); });
  stage(4, assurance_dominance);
  stage(5, deviation_criterion);
  stage(6, engine_ranking);
  stage(11, budget_accounting);

  int failures = 0;
  for (const auto& [id, v] : verdicts) {
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail
              << "\n";
    if (!v.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << " in " << fmt(elapsed_since(t0), 0) << " s\n";
  return failures == 0 ? 0 : 1;
}
