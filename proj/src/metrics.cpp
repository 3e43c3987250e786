#include "simsize/metrics.hpp"

#include "simsize/error.hpp"
#include "simsize/models.hpp"
#include "simsize/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>

namespace simsize {

namespace {

class Fenwick {
 public:
  explicit Fenwick(std::size_t size) : tree_(size + 1, 0) {}
  void add(std::size_t index) {
    for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // number of inserted entries with index < end
  std::int64_t prefix(std::size_t end) const {
    std::int64_t total = 0;
    for (std::size_t i = end; i > 0; i -= i & (~i + 1)) total += tree_[i];
    return total;
  }

 private:
  std::vector<std::int64_t> tree_;
};

// Sum of squared deviations, shifted by the first value so that constant
// input gives exactly zero.
double sum_squares(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  const double shift = values.front();
  double sum = 0.0;
  double ss = 0.0;
  for (double v : values) {
    sum += v - shift;
    ss += (v - shift) * (v - shift);
  }
  return std::max(0.0, ss - sum * sum / n);
}

double variance_n(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / n;
}

bool is_constant(std::span<const double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *lo == *hi;
}

}  // namespace

std::string_view to_string(MetricKind metric) {
  switch (metric) {
    case MetricKind::auc: return "auc";
    case MetricKind::c_index: return "c_index";
    case MetricKind::r2: return "r2";
    case MetricKind::calibration_slope: return "calibration_slope";
  }
  return "unknown";
}

MetricKind parse_metric(std::string_view text) {
  if (text == "auc") return MetricKind::auc;
  if (text == "c_index" || text == "c-index") return MetricKind::c_index;
  if (text == "r2") return MetricKind::r2;
  if (text == "calibration_slope" || text == "calibration-slope") {
    return MetricKind::calibration_slope;
  }
  throw DomainError("unknown metric '" + std::string(text) + "'");
}

bool metric_supports(MetricKind metric, OutcomeFamily family) {
  switch (metric) {
    case MetricKind::auc: return family == OutcomeFamily::binary;
    case MetricKind::c_index: return family == OutcomeFamily::survival;
    case MetricKind::r2: return family == OutcomeFamily::continuous;
    case MetricKind::calibration_slope: return true;
  }
  return false;
}

bool metric_target_valid(MetricKind metric, double target) {
  switch (metric) {
    case MetricKind::auc:
    case MetricKind::c_index: return target > 0.5 && target < 1.0;
    case MetricKind::r2: return target > 0.0 && target < 1.0;
    case MetricKind::calibration_slope: return target > 0.0 && std::isfinite(target);
  }
  return false;
}

std::string_view to_string(Criterion::Kind kind) {
  return kind == Criterion::Kind::mean ? "mean" : "assurance";
}

Criterion parse_criterion(std::string_view text) {
  if (text == "mean") return Criterion::mean();
  if (text == "assurance") return Criterion::assurance();
  throw DomainError("unknown criterion '" + std::string(text) + "'");
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw DomainError("auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double case_rank_sum = 0.0;
  double cases = 0.0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k + 1;
    while (end < n && scores[order[end]] == scores[order[k]]) ++end;
    // ranks k+1 .. end share the midrank
    const double midrank = 0.5 * static_cast<double>(k + 1 + end);
    for (std::size_t m = k; m < end; ++m) {
      if (labels[order[m]] > 0.5) {
        case_rank_sum += midrank;
        cases += 1.0;
      }
    }
    k = end;
  }
  const double controls = static_cast<double>(n) - cases;
  if (cases < 1.0 || controls < 1.0) {
    throw MetricError("auc needs at least one case and one control");
  }
  const double u = case_rank_sum - cases * (cases + 1.0) / 2.0;
  return u / (cases * controls);
}

namespace {

// Harrell's C given the rows ordered by descending time.
double c_index_ordered(std::span<const double> scores, std::span<const double> times,
                       std::span<const double> events,
                       std::span<const Eigen::Index> order) {
  const std::size_t n = scores.size();
  // dense score ranks
  std::vector<std::pair<double, std::size_t>> by_score(n);
  for (std::size_t i = 0; i < n; ++i) by_score[i] = {scores[i], i};
  std::sort(by_score.begin(), by_score.end());
  std::vector<std::size_t> rank(n);
  std::size_t distinct = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && by_score[k].first != by_score[k - 1].first) ++distinct;
    rank[by_score[k].second] = distinct;
  }

  Fenwick later(distinct + 1);
  std::int64_t in_tree = 0;
  std::int64_t concordant = 0;
  std::int64_t tied = 0;
  std::int64_t comparable = 0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k + 1;
    while (end < n && times[order[end]] == times[order[k]]) ++end;
    for (std::size_t m = k; m < end; ++m) {
      const auto i = static_cast<std::size_t>(order[m]);
      if (events[i] < 0.5) continue;
      const std::int64_t below = later.prefix(rank[i]);
      const std::int64_t upto = later.prefix(rank[i] + 1);
      concordant += below;
      tied += upto - below;
      comparable += in_tree;
    }
    for (std::size_t m = k; m < end; ++m) {
      later.add(rank[static_cast<std::size_t>(order[m])]);
      ++in_tree;
    }
    k = end;
  }
  if (comparable == 0) throw MetricError("c_index: no comparable pairs");
  return (2.0 * static_cast<double>(concordant) + static_cast<double>(tied)) /
         (2.0 * static_cast<double>(comparable));
}

std::vector<Eigen::Index> descending_time_order(std::span<const double> times) {
  std::vector<Eigen::Index> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return times[a] > times[b]; });
  return order;
}

}  // namespace

double c_index(std::span<const double> scores, std::span<const double> times,
               std::span<const double> events) {
  const std::size_t n = scores.size();
  if (times.size() != n || events.size() != n) {
    throw DomainError("c_index: length mismatch");
  }
  return c_index_ordered(scores, times, events, descending_time_order(times));
}

double r2_oos(std::span<const double> predictions, std::span<const double> y) {
  if (predictions.size() != y.size() || y.empty()) {
    throw DomainError("r2_oos: length mismatch");
  }
  const double var = variance_n(y);
  if (is_constant(y) || !(var > 0.0)) throw MetricError("r2_oos: outcome has zero variance");
  double mse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    mse += (y[i] - predictions[i]) * (y[i] - predictions[i]);
  }
  mse /= static_cast<double>(y.size());
  return 1.0 - mse / var;
}

double calibration_slope(const Eigen::VectorXd& eta_hat, const Outcome& outcome) {
  if (eta_hat.size() != outcome.size()) {
    throw DomainError("calibration_slope: length mismatch");
  }
  if (eta_hat.size() < 2 ||
      is_constant({eta_hat.data(), static_cast<std::size_t>(eta_hat.size())})) {
    throw MetricError("calibration_slope: linear predictor is constant");
  }
  const Eigen::MatrixXd x = eta_hat;
  switch (outcome.family) {
    case OutcomeFamily::binary: return fit_logistic(x, outcome.y).coefficients(0);
    case OutcomeFamily::continuous: return fit_linear(x, outcome.y).coefficients(0);
    case OutcomeFamily::survival:
      return fit_cox(x, outcome.y, outcome.event).coefficients(0);
  }
  throw DomainError("unknown outcome family");
}

double evaluate_metric(MetricKind metric, const Eigen::VectorXd& eta_hat,
                       const Outcome& outcome) {
  if (!metric_supports(metric, outcome.family)) {
    throw DomainError(std::string("metric ") + std::string(to_string(metric)) +
                      " does not apply to " + std::string(to_string(outcome.family)) +
                      " outcomes");
  }
  const std::span<const double> scores(eta_hat.data(),
                                       static_cast<std::size_t>(eta_hat.size()));
  const std::span<const double> y(outcome.y.data(),
                                  static_cast<std::size_t>(outcome.y.size()));
  switch (metric) {
    case MetricKind::auc: return auc(scores, y);
    case MetricKind::c_index: {
      // higher linear predictor means higher hazard, i.e. shorter time
      const std::span<const double> events(
          outcome.event.data(), static_cast<std::size_t>(outcome.event.size()));
      return c_index(scores, y, events);
    }
    case MetricKind::r2: return r2_oos(scores, y);
    case MetricKind::calibration_slope: return calibration_slope(eta_hat, outcome);
  }
  throw DomainError("unknown metric");
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty vector");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

double aggregate_value(std::span<const double> raw, const Criterion& criterion) {
  if (raw.empty()) throw DomainError("aggregate of an empty replicate vector");
  if (criterion.kind == Criterion::Kind::mean) {
    // sorted summation keeps the result independent of replicate order
    std::vector<double> sorted(raw.begin(), raw.end());
    std::sort(sorted.begin(), sorted.end());
    return std::accumulate(sorted.begin(), sorted.end(), 0.0) /
           static_cast<double>(sorted.size());
  }
  if (raw.size() < 2) throw DomainError("assurance criterion needs at least 2 replicates");
  return quantile({raw.begin(), raw.end()}, criterion.assurance_quantile);
}

double bootstrap_se(std::span<const double> raw, const Criterion& criterion,
                    int n_boot, const SeedStream& stream) {
  if (raw.size() < 2) throw DomainError("bootstrap needs at least 2 values");
  if (n_boot < 2) throw DomainError("bootstrap needs at least 2 resamples");
  std::vector<double> sorted(raw.begin(), raw.end());
  std::sort(sorted.begin(), sorted.end());
  Rng rng = stream.engine();
  std::uniform_int_distribution<std::size_t> pick(0, sorted.size() - 1);
  std::vector<double> resample(sorted.size());
  std::vector<double> stats(static_cast<std::size_t>(n_boot));
  for (auto& stat : stats) {
    for (auto& v : resample) v = sorted[pick(rng)];
    stat = aggregate_value(resample, criterion);
  }
  return std::sqrt(sum_squares(stats) / (n_boot - 1));
}

AggregateEstimate aggregate(std::span<const double> raw, const Criterion& criterion,
                            const SeedStream& stream, int n_boot) {
  AggregateEstimate out;
  out.value = aggregate_value(raw, criterion);
  out.kappa = static_cast<int>(raw.size());
  out.raw.assign(raw.begin(), raw.end());
  out.se = raw.size() >= 2 ? bootstrap_se(raw, criterion, n_boot, stream) : 0.0;
  return out;
}

PreparedOutcome::PreparedOutcome(const Outcome& outcome) : outcome_(outcome) {
  if (outcome.family != OutcomeFamily::survival) return;
  const std::span<const double> times(outcome.y.data(),
                                      static_cast<std::size_t>(outcome.y.size()));
  time_order_ = descending_time_order(times);
  for (std::size_t k = 1; k <= time_order_.size(); ++k) {
    if (k == time_order_.size() || times[time_order_[k]] != times[time_order_[k - 1]]) {
      group_end_.push_back(k);
    }
  }
}

namespace {

// The stopping rules below mirror the general fitters: score below
// kScoreTolerance, or a stalled likelihood with the score at the roundoff
// floor of an n-term sum. nullopt sends the caller to the general fitter.

std::optional<double> cox_slope(const Eigen::VectorXd& x, const PreparedOutcome& prepared) {
  const Eigen::VectorXd& event = prepared.outcome().event;
  const auto& order = prepared.time_order();
  const auto n = static_cast<double>(x.size());
  if (event.sum() < 2.0) return std::nullopt;
  const Eigen::VectorXd xc = x.array() - x.mean();
  const double x_max = xc.maxCoeff();
  const double x_min = xc.minCoeff();

  struct State {
    double ll = 0.0, score = 0.0, information = 0.0;
  };
  auto state = [&](double beta) {
    const double shift = beta >= 0.0 ? beta * x_max : beta * x_min;
    State st;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    std::size_t begin = 0;
    for (std::size_t end : prepared.group_end()) {
      double deaths = 0.0, death_x = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const Eigen::Index i = order[k];
        const double w = std::exp(beta * xc(i) - shift);
        s0 += w;
        s1 += w * xc(i);
        s2 += w * xc(i) * xc(i);
        if (event(i) > 0.5) {
          deaths += 1.0;
          death_x += xc(i);
        }
      }
      if (deaths > 0.0) {
        const double mean = s1 / s0;
        st.ll += beta * death_x - deaths * (shift + std::log(s0));
        st.score += death_x - deaths * mean;
        st.information += deaths * (s2 / s0 - mean * mean);
      }
      begin = end;
    }
    return st;
  };

  double beta = 0.0;
  State st = state(beta);
  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    if (std::abs(st.score) < kScoreTolerance) return beta;
    if (!(st.information > 0.0)) return std::nullopt;
    const double step = st.score / st.information;
    double t = 1.0;
    State next = state(beta + step);
    for (int h = 0; h < 30 && !(next.ll >= st.ll); ++h) {
      t *= 0.5;
      next = state(beta + t * step);
    }
    if (!(next.ll >= st.ll)) return std::nullopt;
    const bool stalled = next.ll - st.ll <= 1e-15 * std::max(1.0, std::abs(st.ll));
    const double previous_score = std::abs(st.score);
    beta += t * step;
    st = next;
    if (std::abs(beta) > kDivergenceBound) return std::nullopt;
    if (stalled && previous_score < 1e-6 * n) return beta;
  }
  if (std::abs(st.score) < kScoreTolerance) return beta;
  return std::nullopt;
}

std::optional<double> logistic_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  struct State {
    double ll = 0.0, s0 = 0.0, s1 = 0.0, i00 = 0.0, i01 = 0.0, i11 = 0.0;
  };
  auto state = [&](double a, double b) {
    State st;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double eta = a + b * x(i);
      // one exponential serves both the likelihood and the fitted probability
      const double e = std::exp(-std::abs(eta));
      st.ll += y(i) * eta - (std::max(eta, 0.0) + std::log1p(e));
      const double p = eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      const double r = y(i) - p;
      const double w = p * (1.0 - p);
      st.s0 += r;
      st.s1 += r * x(i);
      st.i00 += w;
      st.i01 += w * x(i);
      st.i11 += w * x(i) * x(i);
    }
    return st;
  };

  double a = 0.0, b = 0.0;
  State st = state(a, b);
  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    if (std::max(std::abs(st.s0), std::abs(st.s1)) < kScoreTolerance) return b;
    const double det = st.i00 * st.i11 - st.i01 * st.i01;
    if (!(det > 0.0)) return std::nullopt;
    const double da = (st.i11 * st.s0 - st.i01 * st.s1) / det;
    const double db = (st.i00 * st.s1 - st.i01 * st.s0) / det;
    double t = 1.0;
    State next = state(a + da, b + db);
    for (int h = 0; h < 30 && !(next.ll >= st.ll); ++h) {
      t *= 0.5;
      next = state(a + t * da, b + t * db);
    }
    if (!(next.ll >= st.ll)) return std::nullopt;
    const bool stalled = next.ll - st.ll <= 1e-15 * std::max(1.0, std::abs(st.ll));
    a += t * da;
    b += t * db;
    st = next;
    if (std::max(std::abs(a), std::abs(b)) > kDivergenceBound) return std::nullopt;
    if (stalled && std::max(std::abs(st.s0), std::abs(st.s1)) < 1e-6 * static_cast<double>(n)) {
      return b;
    }
  }
  return std::nullopt;
}

}  // namespace

double calibration_slope(const Eigen::VectorXd& eta_hat, const PreparedOutcome& prepared) {
  const Outcome& outcome = prepared.outcome();
  if (eta_hat.size() != outcome.size()) {
    throw DomainError("calibration_slope: length mismatch");
  }
  if (eta_hat.size() < 2 ||
      is_constant({eta_hat.data(), static_cast<std::size_t>(eta_hat.size())})) {
    throw MetricError("calibration_slope: linear predictor is constant");
  }
  std::optional<double> slope;
  switch (outcome.family) {
    case OutcomeFamily::binary: slope = logistic_slope(eta_hat, outcome.y); break;
    case OutcomeFamily::survival: slope = cox_slope(eta_hat, prepared); break;
    case OutcomeFamily::continuous: break;
  }
  return slope ? *slope : calibration_slope(eta_hat, outcome);
}

double evaluate_metric(MetricKind metric, const Eigen::VectorXd& eta_hat,
                       const PreparedOutcome& prepared) {
  const Outcome& outcome = prepared.outcome();
  if (metric == MetricKind::c_index && metric_supports(metric, outcome.family)) {
    if (eta_hat.size() != outcome.size()) throw DomainError("c_index: length mismatch");
    const auto n = static_cast<std::size_t>(eta_hat.size());
    return c_index_ordered({eta_hat.data(), n}, {outcome.y.data(), n},
                           {outcome.event.data(), n}, prepared.time_order());
  }
  if (metric == MetricKind::calibration_slope) return calibration_slope(eta_hat, prepared);
  return evaluate_metric(metric, eta_hat, outcome);
}

}  // namespace simsize
