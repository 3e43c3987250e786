#pragma once

#include "simsize/datagen.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace simsize {

struct FitDiagnostics {
  /// Logistic fit terminated with |coefficient| > 20 or perfect prediction.
  bool separation = false;
  /// Cox fit drifting to infinity (coefficient norm > 20).
  bool monotone_likelihood = false;
  bool singular = false;
  std::string message;
};

struct FittedModel {
  OutcomeFamily family = OutcomeFamily::continuous;
  Eigen::VectorXd coefficients;
  /// Absent for Cox models.
  std::optional<double> intercept;
  bool converged = false;
  int iterations = 0;
  FitDiagnostics diagnostics;
  /// Log-likelihood (partial for Cox) after every accepted iterate, starting
  /// at the zero vector. Empty for least squares.
  std::vector<double> log_likelihood_trace;
};

inline constexpr int kMaxNewtonIterations = 25;
inline constexpr double kScoreTolerance = 1e-8;
inline constexpr double kDivergenceBound = 20.0;

/// Ordinary least squares of y on (1, x).
FittedModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
FittedModel fit_linear(const Dataset& data);

/// IRLS with step-halving. Separated fits are returned, flagged.
FittedModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
FittedModel fit_logistic(const Dataset& data);

/// Newton-Raphson on the Breslow partial likelihood, no intercept.
FittedModel fit_cox(const Eigen::MatrixXd& x, const Eigen::VectorXd& time,
                    const Eigen::VectorXd& event);
FittedModel fit_cox(const Dataset& data);

/// Default model for the dataset's family.
FittedModel fit_model(const Dataset& data);

/// x * coefficients (+ intercept when present).
Eigen::VectorXd linear_predictor(const FittedModel& model,
                                 const Eigen::MatrixXd& x);

/// Logistic log-likelihood at (intercept, coefficients); used by tests.
double logistic_log_likelihood(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, double intercept,
                               const Eigen::VectorXd& coefficients);

/// Breslow log partial likelihood at `coefficients`.
double cox_log_partial_likelihood(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& time,
                                  const Eigen::VectorXd& event,
                                  const Eigen::VectorXd& coefficients);

}  // namespace simsize
