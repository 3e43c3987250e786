#pragma once

#include "simsize/datagen.hpp"
#include "simsize/seed.hpp"

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

namespace simsize {

enum class MetricKind { auc, c_index, r2, calibration_slope };

std::string_view to_string(MetricKind metric);
MetricKind parse_metric(std::string_view text);
/// auc needs binary, c_index survival, r2 continuous; calibration_slope any.
bool metric_supports(MetricKind metric, OutcomeFamily family);
/// Open interval of meaningful targets for the metric.
bool metric_target_valid(MetricKind metric, double target);

/// Aggregation of replicate metric values at one sample size.
struct Criterion {
  enum class Kind { mean, assurance };
  Kind kind = Kind::mean;
  double assurance_quantile = 0.20;

  static Criterion mean() { return {Kind::mean, 0.20}; }
  static Criterion assurance() { return {Kind::assurance, 0.20}; }
};

std::string_view to_string(Criterion::Kind kind);
Criterion parse_criterion(std::string_view text);

struct AggregateEstimate {
  double value = 0.0;
  double se = 0.0;
  int kappa = 0;
  std::vector<double> raw;
};

inline constexpr int kDefaultBootstrapResamples = 200;

/// Mann-Whitney AUC: wins 1, ties 1/2, over all case-control pairs.
double auc(std::span<const double> scores, std::span<const double> labels);

/// Harrell's C. A pair is comparable when time_i < time_j and subject i had
/// the event; it is concordant when score_i > score_j, score ties count 1/2.
double c_index(std::span<const double> scores, std::span<const double> times,
               std::span<const double> events);

/// 1 - MSE / Var(y), variance with denominator n.
double r2_oos(std::span<const double> predictions, std::span<const double> y);

/// Slope of the outcome regressed on eta_hat with the family's default model.
double calibration_slope(const Eigen::VectorXd& eta_hat, const Outcome& outcome);

/// Metric of a model's linear predictor on a test outcome block.
double evaluate_metric(MetricKind metric, const Eigen::VectorXd& eta_hat,
                       const Outcome& outcome);

/// A fixed test outcome with the orderings that survival metrics need, so
/// that scoring many prediction vectors against it skips re-sorting.
class PreparedOutcome {
 public:
  explicit PreparedOutcome(const Outcome& outcome);

  const Outcome& outcome() const { return outcome_; }
  /// Survival only: rows by descending time, and the exclusive end of each
  /// group of tied times in that order.
  const std::vector<Eigen::Index>& time_order() const { return time_order_; }
  const std::vector<std::size_t>& group_end() const { return group_end_; }

 private:
  const Outcome& outcome_;
  std::vector<Eigen::Index> time_order_;
  std::vector<std::size_t> group_end_;
};

/// Same values as the Outcome overloads up to solver tolerance. Calibration
/// slopes use a dedicated one-covariate Newton solver and fall back to the
/// general model fit whenever it does not converge cleanly.
double calibration_slope(const Eigen::VectorXd& eta_hat, const PreparedOutcome& prepared);
double evaluate_metric(MetricKind metric, const Eigen::VectorXd& eta_hat,
                       const PreparedOutcome& prepared);

/// Quantile with linear interpolation at zero-based rank (size - 1) * q.
double quantile(std::vector<double> values, double q);

/// Point aggregate only (no bootstrap).
double aggregate_value(std::span<const double> raw, const Criterion& criterion);

/// Standard deviation of the aggregate over `n_boot` resamples of `raw`.
double bootstrap_se(std::span<const double> raw, const Criterion& criterion,
                    int n_boot, const SeedStream& stream);

AggregateEstimate aggregate(std::span<const double> raw,
                            const Criterion& criterion,
                            const SeedStream& stream,
                            int n_boot = kDefaultBootstrapResamples);

}  // namespace simsize
