#include "simsize/surrogate.hpp"

#include "simsize/error.hpp"
#include "simsize/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace simsize {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double observation_mean(const std::vector<GPObservation>& obs) {
  double total = 0.0;
  for (const auto& o : obs) total += o.g_hat;
  return total / static_cast<double>(obs.size());
}

Eigen::MatrixXd kernel_matrix(const std::vector<GPObservation>& obs,
                              double signal_variance, double length_scale) {
  const auto m = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double xi = std::log(static_cast<double>(obs[i].n));
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double d = (xi - std::log(static_cast<double>(obs[j].n))) / length_scale;
      k(i, j) = k(j, i) = signal_variance * std::exp(-0.5 * d * d);
    }
    k(i, i) += obs[i].noise_var + kGPJitter;
  }
  return k;
}

}  // namespace

GPModel::GPModel(std::vector<GPObservation> observations, double signal_variance,
                 double length_scale)
    : observations_(std::move(observations)),
      signal_variance_(signal_variance),
      length_scale_(length_scale) {
  if (observations_.empty()) throw FitError("GP needs at least one observation");
  mean_const_ = observation_mean(observations_);
  const auto m = static_cast<Eigen::Index>(observations_.size());
  inputs_.resize(m);
  Eigen::VectorXd residual(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    inputs_(i) = std::log(static_cast<double>(observations_[i].n));
    residual(i) = observations_[i].g_hat - mean_const_;
  }
  cholesky_.compute(kernel_matrix(observations_, signal_variance_, length_scale_));
  if (cholesky_.info() != Eigen::Success) {
    throw FitError("GP kernel matrix is not positive definite");
  }
  alpha_ = cholesky_.solve(residual);
  const Eigen::MatrixXd l = cholesky_.matrixL();
  log_marginal_likelihood_ = -0.5 * residual.dot(alpha_) -
                             l.diagonal().array().log().sum() -
                             0.5 * static_cast<double>(m) * std::log(2.0 * M_PI);
}

double GPModel::log_marginal_likelihood(const std::vector<GPObservation>& obs,
                                        double signal_variance,
                                        double length_scale) {
  if (obs.empty()) return kNegInf;
  const double mean = observation_mean(obs);
  const auto m = static_cast<Eigen::Index>(obs.size());
  Eigen::VectorXd residual(m);
  for (Eigen::Index i = 0; i < m; ++i) residual(i) = obs[i].g_hat - mean;
  Eigen::LLT<Eigen::MatrixXd> llt(kernel_matrix(obs, signal_variance, length_scale));
  if (llt.info() != Eigen::Success) return kNegInf;
  const Eigen::MatrixXd l = llt.matrixL();
  const double value = -0.5 * residual.dot(llt.solve(residual)) -
                       l.diagonal().array().log().sum() -
                       0.5 * static_cast<double>(m) * std::log(2.0 * M_PI);
  return std::isfinite(value) ? value : kNegInf;
}

Posterior GPModel::posterior(double n) const {
  const double x = std::log(n);
  const Eigen::Index m = inputs_.size();
  Eigen::VectorXd k_star(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = (x - inputs_(i)) / length_scale_;
    k_star(i) = signal_variance_ * std::exp(-0.5 * d * d);
  }
  Posterior out;
  out.mean = mean_const_ + k_star.dot(alpha_);
  const Eigen::VectorXd v = cholesky_.matrixL().solve(k_star);
  out.sd = std::sqrt(std::max(0.0, signal_variance_ - v.squaredNorm()));
  return out;
}

GPHyperGrid hyper_grid(const std::vector<GPObservation>& observations) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& o : observations) {
    lo = std::min(lo, std::log(static_cast<double>(o.n)));
    hi = std::max(hi, std::log(static_cast<double>(o.n)));
  }
  const double span = hi - lo;
  const double mean = observation_mean(observations);
  double spread = 0.0;
  double noise = 0.0;
  for (const auto& o : observations) {
    spread += (o.g_hat - mean) * (o.g_hat - mean);
    noise += o.noise_var;
  }
  spread /= static_cast<double>(observations.size());
  noise /= static_cast<double>(observations.size());
  const double scale = std::max({spread, noise, 1e-10});

  GPHyperGrid grid;
  for (double f : {0.1, 0.3, 1.0, 3.0, 10.0}) grid.signal_variances.push_back(f * scale);
  for (double f : {0.1, 0.25, 0.5, 1.0, 2.0}) grid.length_scales.push_back(f * span);
  grid.min_signal_variance = 1e-4 * scale;
  grid.max_signal_variance = 1e4 * scale;
  grid.min_length_scale = 0.02 * span;
  grid.max_length_scale = 20.0 * span;
  return grid;
}

GPModel fit_gp(const std::vector<GPObservation>& observations) {
  if (observations.size() < 2) throw FitError("GP needs at least two observations");
  const bool distinct = std::any_of(
      observations.begin(), observations.end(),
      [&](const GPObservation& o) { return o.n != observations.front().n; });
  if (!distinct) throw FitError("GP needs at least two distinct sample sizes");

  const GPHyperGrid grid = hyper_grid(observations);
  double best_value = kNegInf;
  std::vector<double> best = {std::log(grid.signal_variances[2]),
                              std::log(grid.length_scales[2])};
  for (double sv : grid.signal_variances) {
    for (double ls : grid.length_scales) {
      const double value = GPModel::log_marginal_likelihood(observations, sv, ls);
      if (value > best_value) {
        best_value = value;
        best = {std::log(sv), std::log(ls)};
      }
    }
  }
  if (!std::isfinite(best_value)) throw FitError("GP marginal likelihood is degenerate");

  const double log_sv_lo = std::log(grid.min_signal_variance);
  const double log_sv_hi = std::log(grid.max_signal_variance);
  const double log_ls_lo = std::log(grid.min_length_scale);
  const double log_ls_hi = std::log(grid.max_length_scale);
  auto negative_lml = [&](const std::vector<double>& v) {
    if (v[0] < log_sv_lo || v[0] > log_sv_hi || v[1] < log_ls_lo || v[1] > log_ls_hi) {
      return std::numeric_limits<double>::infinity();
    }
    const double value = GPModel::log_marginal_likelihood(
        observations, std::exp(v[0]), std::exp(v[1]));
    return std::isfinite(value) ? -value : std::numeric_limits<double>::infinity();
  };
  NelderMeadOptions options;
  options.max_iterations = 200;
  options.f_tolerance = 1e-9;
  options.x_tolerance = 1e-4;
  const auto ascent = nelder_mead(negative_lml, best, {0.5, 0.25}, options);
  if (std::isfinite(ascent.value) && -ascent.value >= best_value) best = ascent.x;

  return GPModel(observations, std::exp(best[0]), std::exp(best[1]));
}

Posterior posterior(const GPModel& gp, std::int64_t n_query) {
  return gp.posterior(static_cast<double>(n_query));
}

std::vector<double> log_grid(const Bounds& bounds, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double lo = std::log(static_cast<double>(bounds.n_min));
  const double hi = std::log(static_cast<double>(bounds.n_max));
  for (int i = 0; i < points; ++i) {
    grid[i] = points == 1 ? bounds.n_min
                          : std::exp(lo + (hi - lo) * i / static_cast<double>(points - 1));
  }
  grid.front() = static_cast<double>(bounds.n_min);
  grid.back() = static_cast<double>(bounds.n_max);
  return grid;
}

CrossingEstimate crossing_estimate(const GPModel& gp, const Bounds& bounds,
                                   double tau) {
  const auto grid = log_grid(bounds);
  std::size_t first = grid.size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (gp.posterior(grid[k]).mean >= tau) {
      first = k;
      break;
    }
  }
  if (first == grid.size()) return {bounds.n_max, false};
  if (first == 0) return {bounds.n_min, true};

  auto lo = std::max(bounds.n_min, static_cast<std::int64_t>(std::floor(grid[first - 1])));
  auto hi = std::min(bounds.n_max, static_cast<std::int64_t>(std::ceil(grid[first])));
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (posterior(gp, mid).mean >= tau) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (lo == bounds.n_min && posterior(gp, lo).mean >= tau) hi = lo;
  return {hi, true};
}

std::optional<std::int64_t> acquire_next(const GPModel& gp, const Bounds& bounds,
                                         double tau, const SeedStream& stream,
                                         const std::set<std::int64_t>& exclude) {
  std::vector<std::int64_t> candidates;
  for (double g : log_grid(bounds)) {
    const auto n = static_cast<std::int64_t>(std::llround(g));
    if (candidates.empty() || candidates.back() != n) candidates.push_back(n);
  }
  std::set<std::int64_t> evaluated = exclude;
  for (const auto& o : gp.observations()) evaluated.insert(o.n);

  const std::int64_t n_hat = crossing_estimate(gp, bounds, tau).n;
  const double window_lo = 0.5 * static_cast<double>(n_hat);
  const double window_hi = 2.0 * static_cast<double>(n_hat);

  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> best;
  for (std::int64_t n : candidates) {
    const auto nd = static_cast<double>(n);
    if (nd < window_lo || nd > window_hi) continue;
    const Posterior post = posterior(gp, n);
    const double gap = post.mean - tau;
    // log of sd * exp(-gap^2 / (2 (sd^2 + 1e-12)))
    const double score =
        std::log(post.sd + 1e-300) - gap * gap / (2.0 * (post.sd * post.sd + 1e-12));
    if (score > best_score) {
      best_score = score;
      best.assign(1, n);
    } else if (score == best_score) {
      best.push_back(n);
    }
  }
  if (best.empty()) best.push_back(std::clamp(n_hat, bounds.n_min, bounds.n_max));

  std::int64_t chosen = best.front();
  if (best.size() > 1) {
    Rng rng = stream.engine();
    chosen = best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];
  }
  if (!evaluated.contains(chosen)) return chosen;

  std::optional<std::int64_t> nearest;
  double nearest_distance = std::numeric_limits<double>::infinity();
  const double target = std::log(static_cast<double>(chosen));
  for (std::int64_t n : candidates) {
    if (evaluated.contains(n)) continue;
    const double d = std::abs(std::log(static_cast<double>(n)) - target);
    if (d < nearest_distance) {
      nearest_distance = d;
      nearest = n;
    }
  }
  return nearest;
}

}  // namespace simsize
