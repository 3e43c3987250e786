#pragma once

#include "simsize/datagen.hpp"
#include "simsize/metrics.hpp"
#include "simsize/seed.hpp"
#include "simsize/surrogate.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simsize {

enum class EngineKind { gp, bisection, gp_bs };
std::string_view to_string(EngineKind engine);
EngineKind parse_engine(std::string_view text);

enum class Phase { pilot, bisection, gp_init, gp_iter };
std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

/// Test-set size. At 10,000 rows the AUC of a fixed test set is off by ~0.005,
/// which moves the crossing of a typical learning curve by ~10%.
inline constexpr int kDefaultTestSize = 100000;

/// Everything a search engine needs.
struct SearchProblem {
  GeneratorParams generator;
  MetricKind metric = MetricKind::auc;
  double tau = 0.0;
  Criterion criterion;
  /// Main evaluation budget B: one simulate-fit-score attempt costs 1.
  int budget = 1000;
  /// Replicates per candidate sample size.
  int kappa = 20;
  /// Pilot budget B0 and iteration cap K of the bound finder.
  int pilot_budget = 100;
  int pilot_max_iters = 10;
  double bound_tolerance = 1e-4;
  int n_test = kDefaultTestSize;
  std::uint64_t master_seed = 1;
  int n_boot = kDefaultBootstrapResamples;
  /// Overrides the heuristic starting size of the bound finder.
  std::optional<std::int64_t> start_n;
  /// Skips the bound finder entirely.
  std::optional<Bounds> manual_bounds;
  /// Caps replicate-level parallelism; results never depend on it.
  int threads = 1;

  OutcomeFamily family() const { return generator.family; }
  /// Throws ConfigError / DomainError on inconsistent settings.
  void validate() const;
};

struct TraceEntry {
  std::int64_t n = 0;
  std::vector<double> raw;
  double g_hat = 0.0;
  double se = 0.0;
  Phase phase = Phase::pilot;
  /// Simulate-fit-score attempts charged to the budget, redraws included.
  int attempts = 0;
  int redraws = 0;
  bool failed = false;
  std::string error;
};

struct EvaluationTrace {
  std::vector<TraceEntry> entries;

  int attempts(Phase phase) const;
  int total_attempts() const;
};

struct SearchResult {
  std::int64_t n_star = 0;
  Bounds bounds_used;
  EvaluationTrace trace;
  int evaluations_used = 0;
  EngineKind engine = EngineKind::gp;
  double wall_time = 0.0;
  std::vector<std::string> fallback_flags;
  std::uint64_t seed = 0;

  bool has_flag(std::string_view flag) const;
};

/// Replicate metric values at one sample size.
struct ReplicateBatch {
  std::vector<double> values;
  int attempts = 0;
  int redraws = 0;
  bool failed = false;
  std::string error;
};

inline constexpr int kMaxRedraws = 10;

/// Source of replicate metric values G(n). The simulation evaluator is the
/// real thing; function evaluators stand in for it in engine tests.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  /// Draws `kappa` replicates at n, charging at most `max_attempts` attempts.
  /// Fewer than kappa values come back when the cap is reached.
  virtual ReplicateBatch simulate(std::int64_t n, int kappa, int max_attempts,
                                  const SeedStream& stream) const = 0;
  /// Smallest sample size worth simulating.
  virtual std::int64_t min_n() const { return 1; }
};

/// generate -> fit -> score on a fixed test set, with the redraw policy.
class SimulationEvaluator final : public Evaluator {
 public:
  SimulationEvaluator(const SearchProblem& problem, const Dataset& test_set);
  ReplicateBatch simulate(std::int64_t n, int kappa, int max_attempts,
                          const SeedStream& stream) const override;
  std::int64_t min_n() const override;

 private:
  const SearchProblem& problem_;
  const Dataset& test_set_;
  PreparedOutcome prepared_;
};

/// Replicate values from a function of (n, rng); deterministic functions give
/// zero-variance problems.
class FunctionEvaluator final : public Evaluator {
 public:
  using Function = std::function<double(std::int64_t, Rng&)>;
  explicit FunctionEvaluator(Function f, std::int64_t min_n = 1)
      : f_(std::move(f)), min_n_(min_n) {}
  ReplicateBatch simulate(std::int64_t n, int kappa, int max_attempts,
                          const SeedStream& stream) const override;
  std::int64_t min_n() const override { return min_n_; }

 private:
  Function f_;
  std::int64_t min_n_;
};

/// Smallest n that leaves room for fitting: p + 2, and for binary/survival
/// outcomes at least two expected minority-class or event observations.
std::int64_t family_floor(const SearchProblem& problem);

/// Heuristic starting size for the bound finder (floor 30).
std::int64_t heuristic_start(const SearchProblem& problem);

/// kappa replicates at n on the fixed test set, aggregated with bootstrap se.
/// Throws EvaluationError when a replicate exhausts the redraw cap.
AggregateEstimate evaluate_candidate(const SearchProblem& problem, std::int64_t n,
                                     int kappa, const Dataset& test_set,
                                     const SeedStream& stream);

struct BoundsResult {
  Bounds bounds;
  EvaluationTrace trace;
  std::vector<std::string> flags;
};

/// Doubling/halving bracket search on the pilot budget.
BoundsResult find_bounds(const SearchProblem& problem, const Evaluator& evaluator,
                         const SeedStream& stream);
BoundsResult find_bounds(const SearchProblem& problem, const Dataset& test_set,
                         const SeedStream& stream);

SearchResult search_bisection(const SearchProblem& problem, const Bounds& bounds,
                              const Evaluator& evaluator, const SeedStream& stream);
SearchResult search_bisection(const SearchProblem& problem, const Bounds& bounds,
                              const Dataset& test_set, const SeedStream& stream);

SearchResult search_gp(const SearchProblem& problem, const Bounds& bounds,
                       const Evaluator& evaluator, const SeedStream& stream);
SearchResult search_gp(const SearchProblem& problem, const Bounds& bounds,
                       const Dataset& test_set, const SeedStream& stream);

/// Bound finding, 20% budget coarse bisection, then GP search on the refined
/// interval with the remaining 80%.
SearchResult search_gp_bs(const SearchProblem& problem, const Evaluator& evaluator,
                          const SeedStream& stream);
SearchResult search_gp_bs(const SearchProblem& problem, const Dataset& test_set,
                          const SeedStream& stream);

/// Full pipeline: fixed test set, bounds (manual or pilot), chosen engine.
SearchResult run_search(const SearchProblem& problem, EngineKind engine,
                        const SeedStream& stream);
SearchResult run_search(const SearchProblem& problem, EngineKind engine,
                        const Evaluator& evaluator, const SeedStream& stream);

}  // namespace simsize
