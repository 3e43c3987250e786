#pragma once

#include "simsize/seed.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

namespace simsize {

struct GPObservation {
  std::int64_t n = 0;
  double g_hat = 0.0;
  double noise_var = 0.0;
};

struct Posterior {
  double mean = 0.0;
  double sd = 0.0;
};

struct Bounds {
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;
};

inline constexpr double kGPJitter = 1e-8;
inline constexpr int kCrossingGridPoints = 512;

/// Gaussian process over x = log(n) with a squared-exponential kernel,
/// constant prior mean and fixed per-observation noise. Immutable once built.
class GPModel {
 public:
  GPModel(std::vector<GPObservation> observations, double signal_variance,
          double length_scale);

  Posterior posterior(double n) const;

  const std::vector<GPObservation>& observations() const { return observations_; }
  double signal_variance() const { return signal_variance_; }
  double length_scale() const { return length_scale_; }
  double mean_const() const { return mean_const_; }
  double log_marginal_likelihood() const { return log_marginal_likelihood_; }

  /// -inf when the kernel matrix is not positive definite.
  static double log_marginal_likelihood(const std::vector<GPObservation>& obs,
                                        double signal_variance,
                                        double length_scale);

 private:
  std::vector<GPObservation> observations_;
  double signal_variance_;
  double length_scale_;
  double mean_const_ = 0.0;
  double log_marginal_likelihood_ = 0.0;
  Eigen::VectorXd inputs_;
  Eigen::LLT<Eigen::MatrixXd> cholesky_;
  Eigen::VectorXd alpha_;
};

/// Hyperparameter search box and 5x5 initialisation grid, both scaled to the
/// data: signal variance relative to the spread of g_hat, length scale
/// relative to the span of log(n).
struct GPHyperGrid {
  std::vector<double> signal_variances;
  std::vector<double> length_scales;
  double min_signal_variance = 0.0;
  double max_signal_variance = 0.0;
  double min_length_scale = 0.0;
  double max_length_scale = 0.0;
};

GPHyperGrid hyper_grid(const std::vector<GPObservation>& observations);

/// Maximises the marginal likelihood: best grid point, then Nelder-Mead in
/// log space within the search box. Throws FitError for fewer than two
/// distinct sample sizes.
GPModel fit_gp(const std::vector<GPObservation>& observations);

Posterior posterior(const GPModel& gp, std::int64_t n_query);

/// `kCrossingGridPoints` log-spaced real values from n_min to n_max.
std::vector<double> log_grid(const Bounds& bounds, int points = kCrossingGridPoints);

struct CrossingEstimate {
  std::int64_t n = 0;
  /// false when no grid point reaches tau; n is then n_max.
  bool crossed = false;
};

/// Smallest integer n in bounds whose posterior mean reaches tau.
CrossingEstimate crossing_estimate(const GPModel& gp, const Bounds& bounds,
                                   double tau);

/// Next sample size to simulate: the integer grid point within
/// [n_hat / 2, 2 n_hat] maximising sd * exp(-(mean - tau)^2 / (2 sd^2)).
/// Already-evaluated sizes (observations plus `exclude`) are replaced by the
/// nearest unevaluated grid point; nullopt when none is left.
std::optional<std::int64_t> acquire_next(const GPModel& gp, const Bounds& bounds,
                                         double tau, const SeedStream& stream,
                                         const std::set<std::int64_t>& exclude = {});

}  // namespace simsize
