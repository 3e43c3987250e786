#include "simsize/engines.hpp"

#include "simsize/error.hpp"
#include "simsize/models.hpp"
#include "simsize/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace simsize {

namespace {

constexpr std::int64_t kMaxSampleSize = 100'000'000;

// Budgeted evaluation loop shared by all engines.
class Session {
 public:
  Session(const SearchProblem& problem, const Evaluator& evaluator,
          SeedStream stream, EvaluationTrace& trace)
      : problem_(problem), evaluator_(evaluator), stream_(std::move(stream)),
        trace_(trace) {}

  /// Evaluates n with kappa replicates, charging `budget`. Returns nullopt
  /// (and records a failed trace entry) when the evaluation cannot be used.
  std::optional<AggregateEstimate> evaluate(std::int64_t n, int kappa, Phase phase,
                                            int& budget) {
    if (budget < kappa || kappa < 1) return std::nullopt;
    const SeedStream eval_stream = stream_.child("eval", counter_++);
    ReplicateBatch batch = evaluator_.simulate(n, kappa, budget, eval_stream);
    budget -= batch.attempts;

    TraceEntry entry;
    entry.n = n;
    entry.phase = phase;
    entry.attempts = batch.attempts;
    entry.redraws = batch.redraws;
    entry.raw = batch.values;
    const std::size_t needed =
        problem_.criterion.kind == Criterion::Kind::assurance ? 2 : 1;
    if (batch.failed || batch.values.size() < needed) {
      entry.failed = true;
      entry.error = batch.failed ? batch.error : "budget exhausted mid-evaluation";
      entry.g_hat = -std::numeric_limits<double>::infinity();
      trace_.entries.push_back(std::move(entry));
      return std::nullopt;
    }
    AggregateEstimate estimate = aggregate(batch.values, problem_.criterion,
                                           eval_stream.child("bootstrap"),
                                           problem_.n_boot);
    entry.g_hat = estimate.value;
    entry.se = estimate.se;
    trace_.entries.push_back(std::move(entry));
    return estimate;
  }

  const SeedStream& stream() const { return stream_; }
  const SearchProblem& problem() const { return problem_; }
  std::int64_t floor() const { return std::max<std::int64_t>(1, evaluator_.min_n()); }

 private:
  const SearchProblem& problem_;
  const Evaluator& evaluator_;
  SeedStream stream_;
  EvaluationTrace& trace_;
  std::uint64_t counter_ = 0;
};

struct StageResult {
  std::int64_t n_star = 0;
  /// Interval actually searched; wider than the input after re-bracketing.
  Bounds searched;
  /// Bisection: last bracket. GP: same as searched.
  Bounds final_bounds;
  std::vector<std::string> flags;
  /// Aggregates at the final bracket ends, when they were evaluated.
  std::optional<double> g_lower;
  std::optional<double> g_upper;
};

void add_flag(std::vector<std::string>& flags, const std::string& flag) {
  if (std::find(flags.begin(), flags.end(), flag) == flags.end()) flags.push_back(flag);
}

StageResult run_bisection(Session& session, Bounds bounds, int budget) {
  const SearchProblem& problem = session.problem();
  const int kappa = problem.kappa;
  const double tau = problem.tau;
  StageResult out;
  out.searched = bounds;
  out.final_bounds = bounds;
  out.n_star = bounds.n_max;
  if (bounds.n_max - bounds.n_min <= 1) return out;
  if (budget < 2 * kappa) {
    add_flag(out.flags, "insufficient_budget");
    return out;
  }

  const int max_iterations = budget / kappa;
  int t = 0;
  if (auto g = session.evaluate(bounds.n_min, kappa, Phase::bisection, budget)) {
    out.g_lower = g->value;
  }
  ++t;
  if (auto g = session.evaluate(bounds.n_max, kappa, Phase::bisection, budget)) {
    out.g_upper = g->value;
  }
  ++t;
  if (out.g_lower && *out.g_lower >= tau) add_flag(out.flags, "lower_bound_meets_target");
  if (!out.g_upper || *out.g_upper < tau) add_flag(out.flags, "upper_bound_below_target");

  while (t < max_iterations && budget >= kappa && bounds.n_max - bounds.n_min > 1) {
    const std::int64_t mid = (bounds.n_min + bounds.n_max) / 2;
    const auto g = session.evaluate(mid, kappa, Phase::bisection, budget);
    if (g && g->value >= tau) {
      bounds.n_max = mid;
      out.g_upper = g->value;
    } else {
      bounds.n_min = mid;
      out.g_lower = g ? std::optional<double>(g->value) : std::nullopt;
    }
    ++t;
  }
  if (bounds.n_max - bounds.n_min > 1) add_flag(out.flags, "budget_exhausted");
  out.final_bounds = bounds;
  out.n_star = bounds.n_max;
  return out;
}

std::vector<std::int64_t> initial_design(const Bounds& bounds, int points) {
  std::vector<std::int64_t> design;
  const double lo = std::log(static_cast<double>(bounds.n_min));
  const double hi = std::log(static_cast<double>(bounds.n_max));
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / static_cast<double>(points - 1);
    const auto n = std::clamp(static_cast<std::int64_t>(std::llround(std::exp(x))),
                              bounds.n_min, bounds.n_max);
    if (design.empty() || design.back() != n) design.push_back(n);
  }
  return design;
}

constexpr int kInitialDesignPoints = 5;
constexpr int kMaxExpansions = 4;

StageResult run_gp(Session& session, Bounds bounds, int budget) {
  const SearchProblem& problem = session.problem();
  const int kappa = problem.kappa;
  const double tau = problem.tau;
  StageResult out;
  out.searched = bounds;
  out.final_bounds = bounds;
  out.n_star = bounds.n_max;
  if (bounds.n_max <= bounds.n_min) {
    out.n_star = bounds.n_min;
    return out;
  }

  std::vector<GPObservation> observations;
  std::set<std::int64_t> failed;
  auto record = [&](std::int64_t n, const std::optional<AggregateEstimate>& g) {
    if (g) {
      observations.push_back({n, g->value, g->se * g->se});
    } else {
      failed.insert(n);
    }
  };

  for (std::int64_t n : initial_design(bounds, kInitialDesignPoints)) {
    if (budget < kappa) {
      add_flag(out.flags, "initial_design_truncated");
      break;
    }
    record(n, session.evaluate(n, kappa, Phase::gp_init, budget));
  }
  if (budget < kappa) add_flag(out.flags, "no_gp_iterations");

  auto fallback = [&](const char* flag) {
    add_flag(out.flags, flag);
    StageResult bs = run_bisection(session, bounds, budget);
    for (const auto& f : bs.flags) add_flag(out.flags, f);
    out.n_star = bs.n_star;
    out.searched = bounds;
    out.final_bounds = bs.final_bounds;
    return out;
  };

  std::optional<GPModel> gp;
  try {
    gp = fit_gp(observations);
  } catch (const FitError&) {
    return fallback("gp_fit_failed");
  }

  // The pilot bracket rests on few replicates and can miss the crossing.
  // When the surrogate puts the crossing on the lower edge, or nowhere, the
  // interval is widened by one doubling step on that side.
  int expansions = 0;
  auto rebracket = [&]() {
    if (expansions >= kMaxExpansions) return;
    const CrossingEstimate c = crossing_estimate(*gp, bounds, tau);
    if (c.crossed && c.n == bounds.n_min && bounds.n_min > session.floor()) {
      bounds.n_min = std::max(session.floor(), bounds.n_min / 2);
    } else if (!c.crossed && bounds.n_max < kMaxSampleSize) {
      bounds.n_max = std::min(kMaxSampleSize, 2 * bounds.n_max);
    } else {
      return;
    }
    ++expansions;
    add_flag(out.flags, "bounds_expanded");
  };

  int iteration = 0;
  while (budget >= kappa) {
    rebracket();
    const auto next = acquire_next(*gp, bounds, tau,
                                   session.stream().child("acquire", iteration++),
                                   failed);
    if (!next) {
      add_flag(out.flags, "candidates_exhausted");
      break;
    }
    record(*next, session.evaluate(*next, kappa, Phase::gp_iter, budget));
    try {
      gp = fit_gp(observations);
    } catch (const FitError&) {
      return fallback("gp_fit_failed");
    }
  }

  const CrossingEstimate crossing = crossing_estimate(*gp, bounds, tau);
  if (!crossing.crossed) add_flag(out.flags, "no_crossing");
  out.n_star = crossing.n;
  out.searched = bounds;
  out.final_bounds = bounds;
  return out;
}

SearchResult make_result(EngineKind engine, const Bounds& bounds,
                         const SeedStream& stream) {
  SearchResult result;
  result.engine = engine;
  result.bounds_used = bounds;
  result.seed = stream.master_seed();
  return result;
}

void finish(SearchResult& result, const StageResult& stage,
            std::chrono::steady_clock::time_point start) {
  result.bounds_used.n_min = std::min(result.bounds_used.n_min, stage.searched.n_min);
  result.bounds_used.n_max = std::max(result.bounds_used.n_max, stage.searched.n_max);
  result.n_star = std::clamp(stage.n_star, result.bounds_used.n_min,
                             result.bounds_used.n_max);
  for (const auto& f : stage.flags) add_flag(result.fallback_flags, f);
  result.evaluations_used = result.trace.total_attempts();
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Bounds checked(const Bounds& bounds) {
  if (bounds.n_min < 1 || bounds.n_max < bounds.n_min) {
    throw DomainError("search bounds must satisfy 1 <= n_min <= n_max");
  }
  return bounds;
}

}  // namespace

std::string_view to_string(EngineKind engine) {
  switch (engine) {
    case EngineKind::gp: return "gp";
    case EngineKind::bisection: return "bisection";
    case EngineKind::gp_bs: return "gp_bs";
  }
  return "unknown";
}

EngineKind parse_engine(std::string_view text) {
  if (text == "gp") return EngineKind::gp;
  if (text == "bisection") return EngineKind::bisection;
  if (text == "gp_bs" || text == "gp-bs") return EngineKind::gp_bs;
  throw DomainError("unknown engine '" + std::string(text) + "'");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::pilot: return "pilot";
    case Phase::bisection: return "bisection";
    case Phase::gp_init: return "gp-init";
    case Phase::gp_iter: return "gp-iter";
  }
  return "unknown";
}

Phase parse_phase(std::string_view text) {
  if (text == "pilot") return Phase::pilot;
  if (text == "bisection") return Phase::bisection;
  if (text == "gp-init") return Phase::gp_init;
  if (text == "gp-iter") return Phase::gp_iter;
  throw DomainError("unknown phase '" + std::string(text) + "'");
}

void SearchProblem::validate() const {
  generator.validate();
  if (!metric_supports(metric, family())) {
    throw DomainError(std::string("metric ") + std::string(to_string(metric)) +
                      " is not defined for " + std::string(to_string(family())) +
                      " outcomes");
  }
  if (!metric_target_valid(metric, tau)) {
    throw DomainError("target " + std::to_string(tau) + " is outside the range of " +
                      std::string(to_string(metric)));
  }
  if (kappa < 1) throw ConfigError("reps must be at least 1");
  if (criterion.kind == Criterion::Kind::assurance && kappa < 2) {
    throw ConfigError("assurance criterion needs at least 2 reps");
  }
  if (budget < 2 * kappa) throw ConfigError("budget must be at least 2 * reps");
  if (!manual_bounds) {
    if (pilot_max_iters < 2) throw ConfigError("pilot iterations must be at least 2");
    const int pilot_kappa = pilot_budget / pilot_max_iters;
    if (pilot_kappa < (criterion.kind == Criterion::Kind::assurance ? 2 : 1)) {
      throw ConfigError("pilot budget too small for the pilot iteration count");
    }
  } else {
    checked(*manual_bounds);
  }
  if (n_test < 2) throw ConfigError("test set needs at least 2 observations");
  if (!(bound_tolerance >= 0.0)) throw ConfigError("bound tolerance must be >= 0");
  if (n_boot < 2) throw ConfigError("bootstrap needs at least 2 resamples");
}

int EvaluationTrace::attempts(Phase phase) const {
  int total = 0;
  for (const auto& e : entries) {
    if (e.phase == phase) total += e.attempts;
  }
  return total;
}

int EvaluationTrace::total_attempts() const {
  int total = 0;
  for (const auto& e : entries) total += e.attempts;
  return total;
}

bool SearchResult::has_flag(std::string_view flag) const {
  return std::find(fallback_flags.begin(), fallback_flags.end(), flag) !=
         fallback_flags.end();
}

SimulationEvaluator::SimulationEvaluator(const SearchProblem& problem,
                                         const Dataset& test_set)
    : problem_(problem), test_set_(test_set), prepared_(test_set.outcome) {}

std::int64_t SimulationEvaluator::min_n() const { return family_floor(problem_); }

ReplicateBatch SimulationEvaluator::simulate(std::int64_t n, int kappa,
                                             int max_attempts,
                                             const SeedStream& stream) const {
  struct Slot {
    double value = 0.0;
    int attempts = 0;
    bool failed = false;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(std::max(kappa, 0)));
  const SeedStream base = stream.child("n", static_cast<std::uint64_t>(n));
  parallel_for(slots.size(), problem_.threads, [&](std::size_t j) {
    Slot& slot = slots[j];
    const SeedStream rep = base.child("rep", j);
    for (int a = 0; a <= kMaxRedraws; ++a) {
      ++slot.attempts;
      try {
        const Dataset train = generate(problem_.generator, n, rep.child("attempt", a));
        const FittedModel model = fit_model(train);
        const double value = evaluate_metric(
            problem_.metric, linear_predictor(model, test_set_.x), prepared_);
        if (std::isfinite(value)) {
          slot.value = value;
          return;
        }
        slot.error = "non-finite metric value";
      } catch (const FitError& e) {
        slot.error = e.what();
      } catch (const MetricError& e) {
        slot.error = e.what();
      }
    }
    slot.failed = true;
  });

  ReplicateBatch batch;
  for (const Slot& slot : slots) {
    if (batch.attempts + slot.attempts > max_attempts) break;
    batch.attempts += slot.attempts;
    batch.redraws += slot.attempts - 1;
    if (slot.failed) {
      batch.failed = true;
      batch.error = "more than " + std::to_string(kMaxRedraws) +
                    " degenerate redraws at n=" + std::to_string(n) + ": " + slot.error;
      break;
    }
    batch.values.push_back(slot.value);
  }
  return batch;
}

ReplicateBatch FunctionEvaluator::simulate(std::int64_t n, int kappa, int max_attempts,
                                           const SeedStream& stream) const {
  ReplicateBatch batch;
  const SeedStream base = stream.child("n", static_cast<std::uint64_t>(n));
  for (int j = 0; j < kappa && batch.attempts < max_attempts; ++j) {
    Rng rng = base.child("rep", static_cast<std::uint64_t>(j)).engine();
    batch.values.push_back(f_(n, rng));
    ++batch.attempts;
  }
  return batch;
}

std::int64_t family_floor(const SearchProblem& problem) {
  const auto& g = problem.generator;
  std::int64_t floor_n = g.p + 2;
  if (g.family != OutcomeFamily::continuous && g.achieved.prevalence_or_event_rate) {
    const double rate = *g.achieved.prevalence_or_event_rate;
    const double minority =
        g.family == OutcomeFamily::binary ? std::min(rate, 1.0 - rate) : rate;
    floor_n = std::max(floor_n,
                       static_cast<std::int64_t>(std::ceil(2.0 / minority - 1e-6)));
  }
  return floor_n;
}

std::int64_t heuristic_start(const SearchProblem& problem) {
  const auto& g = problem.generator;
  const double p = g.p;
  double start = 10.0 * p + 50.0;
  if (g.family != OutcomeFamily::continuous) {
    const double rate = g.achieved.prevalence_or_event_rate.value_or(0.5);
    const double denom =
        g.family == OutcomeFamily::binary ? std::min(rate, 1.0 - rate) : rate;
    // tuned rates differ from the request by ~1e-10; don't let that bump ceil
    start = std::ceil(10.0 * p / denom - 1e-6);
  }
  return std::max<std::int64_t>(30, static_cast<std::int64_t>(start));
}

AggregateEstimate evaluate_candidate(const SearchProblem& problem, std::int64_t n,
                                     int kappa, const Dataset& test_set,
                                     const SeedStream& stream) {
  if (n < 1) throw DomainError("sample size must be positive");
  const SimulationEvaluator evaluator(problem, test_set);
  const ReplicateBatch batch =
      evaluator.simulate(n, kappa, std::numeric_limits<int>::max(), stream);
  if (batch.failed) throw EvaluationError(batch.error);
  return aggregate(batch.values, problem.criterion, stream.child("bootstrap"),
                   problem.n_boot);
}

BoundsResult find_bounds(const SearchProblem& problem, const Evaluator& evaluator,
                         const SeedStream& stream) {
  if (problem.pilot_max_iters < 2) throw ConfigError("pilot iterations must be >= 2");
  BoundsResult out;
  Session session(problem, evaluator, stream, out.trace);
  const int pilot_kappa = problem.pilot_budget / problem.pilot_max_iters;
  int budget = problem.pilot_budget;
  const double tau = problem.tau;
  const double delta = problem.bound_tolerance;
  const std::int64_t floor_n = std::max<std::int64_t>(1, evaluator.min_n());

  auto estimate = [&](std::int64_t n) {
    const auto g = session.evaluate(n, pilot_kappa, Phase::pilot, budget);
    // an unusable evaluation means the sample is too small to fit
    return g ? g->value : -std::numeric_limits<double>::infinity();
  };

  std::int64_t n = std::max(floor_n, problem.start_n.value_or(heuristic_start(problem)));
  std::int64_t explored_lo = n;
  std::int64_t explored_hi = n;
  const double first = estimate(n);
  const bool up = first < tau;
  std::optional<std::int64_t> n_min;
  std::optional<std::int64_t> n_max;
  if (up) {
    n_min = n;
  } else {
    n_max = n;
  }

  bool bracketed = false;
  for (int k = 1; k < problem.pilot_max_iters; ++k) {
    const std::int64_t next =
        up ? std::min(2 * n, kMaxSampleSize) : std::max(n / 2, floor_n);
    if (next == n) {
      add_flag(out.flags, "pilot_collapsed");
      break;
    }
    if (budget < pilot_kappa) {
      add_flag(out.flags, "pilot_budget_exhausted");
      break;
    }
    const double g = estimate(next);
    explored_lo = std::min(explored_lo, next);
    explored_hi = std::max(explored_hi, next);
    if (up) {
      if (g >= tau - delta) {
        n_max = next;
        bracketed = true;
        break;
      }
      n_min = next;
    } else {
      if (g <= tau + delta) {
        n_min = next;
        bracketed = true;
        break;
      }
      n_max = next;
    }
    n = next;
  }

  if (bracketed) {
    out.bounds = {*n_min, *n_max};
  } else {
    add_flag(out.flags, "pilot_unbracketed");
    out.bounds = {explored_lo, explored_hi};
  }
  return out;
}

BoundsResult find_bounds(const SearchProblem& problem, const Dataset& test_set,
                         const SeedStream& stream) {
  const SimulationEvaluator evaluator(problem, test_set);
  return find_bounds(problem, evaluator, stream);
}

SearchResult search_bisection(const SearchProblem& problem, const Bounds& bounds,
                              const Evaluator& evaluator, const SeedStream& stream) {
  const auto start = std::chrono::steady_clock::now();
  SearchResult result = make_result(EngineKind::bisection, checked(bounds), stream);
  Session session(problem, evaluator, stream, result.trace);
  const StageResult stage = run_bisection(session, bounds, problem.budget);
  finish(result, stage, start);
  return result;
}

SearchResult search_bisection(const SearchProblem& problem, const Bounds& bounds,
                              const Dataset& test_set, const SeedStream& stream) {
  const SimulationEvaluator evaluator(problem, test_set);
  return search_bisection(problem, bounds, evaluator, stream);
}

SearchResult search_gp(const SearchProblem& problem, const Bounds& bounds,
                       const Evaluator& evaluator, const SeedStream& stream) {
  const auto start = std::chrono::steady_clock::now();
  SearchResult result = make_result(EngineKind::gp, checked(bounds), stream);
  Session session(problem, evaluator, stream, result.trace);
  const StageResult stage = run_gp(session, bounds, problem.budget);
  finish(result, stage, start);
  return result;
}

SearchResult search_gp(const SearchProblem& problem, const Bounds& bounds,
                       const Dataset& test_set, const SeedStream& stream) {
  const SimulationEvaluator evaluator(problem, test_set);
  return search_gp(problem, bounds, evaluator, stream);
}

namespace {

// Stages 2 and 3 of the hybrid engine on already-established bounds.
StageResult run_hybrid(const SearchProblem& problem, const Evaluator& evaluator,
                       const SeedStream& stream, const Bounds& bounds,
                       EvaluationTrace& trace) {
  const int coarse_budget = static_cast<int>(std::floor(0.2 * problem.budget));
  const int refine_budget = problem.budget - coarse_budget;

  Session coarse(problem, evaluator, stream.child("stage", 2), trace);
  const StageResult bs = run_bisection(coarse, bounds, coarse_budget);

  // widen by one bisection step on each side, clipped to the outer bounds
  const std::int64_t width = std::max<std::int64_t>(
      1, bs.final_bounds.n_max - bs.final_bounds.n_min);
  Bounds refined{std::max(bounds.n_min, bs.final_bounds.n_min - width),
                 std::min(bounds.n_max, bs.final_bounds.n_max + width)};
  if (refined.n_max <= refined.n_min) refined = bounds;

  StageResult out;
  for (const auto& f : bs.flags) {
    if (f != "budget_exhausted") add_flag(out.flags, "stage2_" + f);
  }
  // either the outer ends as evaluated or the final interval fails to bracket
  auto has = [&](std::string_view f) {
    return std::find(bs.flags.begin(), bs.flags.end(), f) != bs.flags.end();
  };
  const bool unbracketed = has("lower_bound_meets_target") ||
                           has("upper_bound_below_target") ||
                           (bs.g_lower && *bs.g_lower >= problem.tau) ||
                           (bs.g_upper && *bs.g_upper < problem.tau);
  if (unbracketed) add_flag(out.flags, "stage2_unbracketed");

  Session refine(problem, evaluator, stream.child("stage", 3), trace);
  const StageResult gp = run_gp(refine, refined, refine_budget);
  for (const auto& f : gp.flags) add_flag(out.flags, f);
  out.n_star = gp.n_star;
  out.searched = gp.searched;
  out.final_bounds = gp.final_bounds;
  return out;
}

}  // namespace

SearchResult search_gp_bs(const SearchProblem& problem, const Evaluator& evaluator,
                          const SeedStream& stream) {
  return run_search(problem, EngineKind::gp_bs, evaluator, stream);
}

SearchResult search_gp_bs(const SearchProblem& problem, const Dataset& test_set,
                          const SeedStream& stream) {
  const SimulationEvaluator evaluator(problem, test_set);
  return search_gp_bs(problem, evaluator, stream);
}

SearchResult run_search(const SearchProblem& problem, EngineKind engine,
                        const Evaluator& evaluator, const SeedStream& stream) {
  const auto start = std::chrono::steady_clock::now();
  SearchResult result;
  result.engine = engine;
  result.seed = stream.master_seed();

  Bounds bounds;
  if (problem.manual_bounds) {
    bounds = checked(*problem.manual_bounds);
  } else {
    BoundsResult pilot = find_bounds(problem, evaluator, stream.child("pilot"));
    bounds = pilot.bounds;
    result.trace = std::move(pilot.trace);
    for (const auto& f : pilot.flags) add_flag(result.fallback_flags, f);
  }
  result.bounds_used = bounds;

  const SeedStream engine_stream = stream.child("engine");
  StageResult stage;
  switch (engine) {
    case EngineKind::bisection: {
      Session session(problem, evaluator, engine_stream, result.trace);
      stage = run_bisection(session, bounds, problem.budget);
      break;
    }
    case EngineKind::gp: {
      Session session(problem, evaluator, engine_stream, result.trace);
      stage = run_gp(session, bounds, problem.budget);
      break;
    }
    case EngineKind::gp_bs:
      stage = run_hybrid(problem, evaluator, engine_stream, bounds, result.trace);
      break;
  }
  finish(result, stage, start);
  return result;
}

SearchResult run_search(const SearchProblem& problem, EngineKind engine,
                        const SeedStream& stream) {
  const Dataset test_set =
      generate(problem.generator, problem.n_test, stream.child("test"));
  const SimulationEvaluator evaluator(problem, test_set);
  return run_search(problem, engine, evaluator, stream);
}

}  // namespace simsize
