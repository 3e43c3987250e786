#pragma once

#include "simsize/seed.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace simsize {

enum class OutcomeFamily { binary, continuous, survival };

std::string_view to_string(OutcomeFamily family);
OutcomeFamily parse_family(std::string_view text);

/// Population quantities a tuned generator is meant to reproduce.
struct GeneratorTargets {
  /// Prevalence (binary) or event rate (survival); absent for continuous.
  std::optional<double> prevalence_or_event_rate;
  /// Large-sample C-statistic / C-index, or R-squared for continuous.
  double performance_target = 0.0;
};

/// Fully tuned description of one data-generating process.
///
/// The linear predictor is eta = X beta + beta0 with X ~ N(0, I_p), the first
/// `p_signal` coefficients equal to `beta_signal` and the remaining `p_noise`
/// equal to zero, so sd(eta) = beta_signal * sqrt(p_signal).
struct GeneratorParams {
  OutcomeFamily family = OutcomeFamily::continuous;
  int p = 1;
  int p_noise = 0;
  int p_signal = 1;
  double beta_signal = 0.0;
  double beta0 = 0.0;  // binary only
  double mu = 0.0;     // binary only
  double sigma = 0.0;
  double residual_sd = 1.0;  // continuous only
  double lambda0 = 0.0;      // survival only
  double t_c = 0.0;          // survival only
  GeneratorTargets achieved;

  /// Throws ConfigError when the invariants above are violated.
  void validate() const;
};

/// Outcome block of a dataset.
struct Outcome {
  OutcomeFamily family = OutcomeFamily::continuous;
  /// 0/1 labels, continuous responses, or observed times min(E, t_c).
  Eigen::VectorXd y;
  /// Survival only: 1 when the event was observed, 0 when censored.
  Eigen::VectorXd event;

  Eigen::Index size() const { return y.size(); }
};

struct Dataset {
  Eigen::MatrixXd x;
  Outcome outcome;

  Eigen::Index rows() const { return x.rows(); }
  OutcomeFamily family() const { return outcome.family; }
};

inline constexpr double kDefaultCensorTime = 1.0;
/// Simulation size and seed behind the survival tuning objective.
inline constexpr int kSurvivalTuningSize = 200000;
inline constexpr std::uint64_t kSurvivalTuningSeed = 20240611ULL;

GeneratorParams tune_continuous(double r2_target, int p, int p_noise = 0);

GeneratorParams tune_binary(double prevalence_target, double c_target, int p,
                            int p_noise = 0);

GeneratorParams tune_survival(double event_rate_target, double c_target, int p,
                              int p_noise = 0,
                              double t_c = kDefaultCensorTime);

/// Draws n observations. Bit-identical for identical (params, n, stream).
Dataset generate(const GeneratorParams& params, Eigen::Index n,
                 const SeedStream& stream);

/// True linear predictor X beta + beta0 of `params` evaluated on `x`.
Eigen::VectorXd true_linear_predictor(const GeneratorParams& params,
                                      const Eigen::MatrixXd& x);

/// E[logistic(eta)] for eta ~ N(mu, sigma^2), 64-node Gauss-Hermite.
double binary_prevalence(double mu, double sigma);

/// Case/control concordance of eta ~ N(mu, sigma^2) under a logistic link:
/// P(eta_case > eta_control), integrated numerically.
double binary_concordance(double mu, double sigma);

struct SurvivalMoments {
  double event_rate = 0.0;
  double c_index = 0.5;
};

/// Event rate and Harrell's C of the true linear predictor, estimated on the
/// fixed tuning simulation.
SurvivalMoments survival_moments(double lambda0, double sigma, double t_c);

}  // namespace simsize
