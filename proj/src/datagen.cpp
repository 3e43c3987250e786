#include "simsize/datagen.hpp"

#include "simsize/error.hpp"
#include "simsize/metrics.hpp"
#include "simsize/optim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace simsize {

namespace {

void check_dimensions(int p, int p_noise) {
  if (p < 1 || p_noise < 0 || p - p_noise < 1) {
    throw ConfigError("need at least one signal predictor (p=" +
                      std::to_string(p) + ", p_noise=" +
                      std::to_string(p_noise) + ")");
  }
}

void check_open_unit(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    throw DomainError(std::string(name) + " must lie in (0, 1)");
  }
}

GeneratorParams base_params(OutcomeFamily family, int p, int p_noise) {
  GeneratorParams params;
  params.family = family;
  params.p = p;
  params.p_noise = p_noise;
  params.p_signal = p - p_noise;
  return params;
}

// Standard-normal scores and uniforms behind the survival tuning objective.
struct SurvivalTuningSample {
  std::vector<double> z;
  std::vector<double> unit_exponential;

  SurvivalTuningSample() : z(kSurvivalTuningSize), unit_exponential(kSurvivalTuningSize) {
    Rng rng = SeedStream(kSurvivalTuningSeed).child("survival-tuning").engine();
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> exponential(1.0);
    for (int i = 0; i < kSurvivalTuningSize; ++i) {
      z[i] = normal(rng);
      unit_exponential[i] = exponential(rng);
    }
  }
};

const SurvivalTuningSample& survival_tuning_sample() {
  static const SurvivalTuningSample sample;
  return sample;
}

constexpr double kTuningTolerance = 1e-6;

}  // namespace

std::string_view to_string(OutcomeFamily family) {
  switch (family) {
    case OutcomeFamily::binary: return "binary";
    case OutcomeFamily::continuous: return "continuous";
    case OutcomeFamily::survival: return "survival";
  }
  return "unknown";
}

OutcomeFamily parse_family(std::string_view text) {
  if (text == "binary") return OutcomeFamily::binary;
  if (text == "continuous") return OutcomeFamily::continuous;
  if (text == "survival") return OutcomeFamily::survival;
  throw DomainError("unknown outcome family '" + std::string(text) + "'");
}

void GeneratorParams::validate() const {
  check_dimensions(p, p_noise);
  if (p_signal != p - p_noise) throw ConfigError("p_signal must equal p - p_noise");
  if (!(sigma >= 0.0) || !std::isfinite(beta_signal)) {
    throw ConfigError("linear predictor scale must be finite and non-negative");
  }
  if (family != OutcomeFamily::continuous &&
      std::abs(sigma - beta_signal * std::sqrt(static_cast<double>(p_signal))) >
          1e-9 * std::max(1.0, sigma)) {
    throw ConfigError("sigma must equal beta_signal * sqrt(p_signal)");
  }
  if (family == OutcomeFamily::survival && !(lambda0 > 0.0 && t_c > 0.0)) {
    throw ConfigError("survival generator needs lambda0 > 0 and t_c > 0");
  }
  if (family == OutcomeFamily::continuous && !(residual_sd > 0.0)) {
    throw ConfigError("continuous generator needs residual_sd > 0");
  }
}

GeneratorParams tune_continuous(double r2_target, int p, int p_noise) {
  check_dimensions(p, p_noise);
  check_open_unit(r2_target, "R-squared target");
  GeneratorParams params = base_params(OutcomeFamily::continuous, p, p_noise);
  params.beta_signal =
      std::sqrt(r2_target / (params.p_signal * (1.0 - r2_target)));
  params.sigma = params.beta_signal * std::sqrt(static_cast<double>(params.p_signal));
  params.residual_sd = 1.0;
  params.achieved.performance_target = r2_target;
  return params;
}

double binary_prevalence(double mu, double sigma) {
  const auto& rule = gauss_hermite_normal(64);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    total += rule.weights[i] * logistic(mu + sigma * rule.nodes[i]);
  }
  return total;
}

double binary_concordance(double mu, double sigma) {
  if (sigma <= 0.0) return 0.5;
  // Trapezoid rule on z in [-10, 10]; case density phi(z) expit(eta), control
  // density phi(z) (1 - expit(eta)), eta = mu + sigma z increasing in z.
  constexpr int kPoints = 8001;
  constexpr double kLimit = 10.0;
  const double h = 2.0 * kLimit / (kPoints - 1);
  double cumulative_control = 0.0;
  double prev_control = 0.0;
  double numerator = 0.0;
  double prev_term = 0.0;
  double cases = 0.0;
  double prev_case = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    const double z = -kLimit + h * k;
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    const double risk = logistic(mu + sigma * z);
    const double case_density = density * risk;
    const double control_density = density * (1.0 - risk);
    if (k > 0) {
      cumulative_control += 0.5 * h * (control_density + prev_control);
      cases += 0.5 * h * (case_density + prev_case);
    }
    const double term = case_density * cumulative_control;
    if (k > 0) numerator += 0.5 * h * (term + prev_term);
    prev_control = control_density;
    prev_case = case_density;
    prev_term = term;
  }
  const double controls = cumulative_control;
  return numerator / (cases * controls);
}

GeneratorParams tune_binary(double prevalence_target, double c_target, int p,
                            int p_noise) {
  check_dimensions(p, p_noise);
  check_open_unit(prevalence_target, "prevalence target");
  if (!(c_target > 0.5 && c_target < 1.0)) {
    throw DomainError("C-statistic target must lie in (0.5, 1)");
  }

  auto objective = [&](const std::vector<double>& v) {
    const double sigma = std::exp(v[1]);
    const double c = binary_concordance(v[0], sigma);
    const double prev = binary_prevalence(v[0], sigma);
    return (c - c_target) * (c - c_target) +
           (prev - prevalence_target) * (prev - prevalence_target);
  };
  const double start_mu = std::log(prevalence_target / (1.0 - prevalence_target));
  NelderMeadOptions options;
  options.max_iterations = 500;
  options.f_tolerance = 1e-20;
  options.x_tolerance = 1e-9;
  const auto best = nelder_mead(objective, {start_mu, 0.0}, {0.5, 0.5}, options);
  if (!(best.value <= kTuningTolerance)) {
    throw TuningError("binary generator tuning did not converge", best.x,
                      best.value);
  }

  GeneratorParams params = base_params(OutcomeFamily::binary, p, p_noise);
  params.mu = best.x[0];
  params.beta0 = params.mu;
  params.sigma = std::exp(best.x[1]);
  params.beta_signal = params.sigma / std::sqrt(static_cast<double>(params.p_signal));
  params.achieved.prevalence_or_event_rate = binary_prevalence(params.mu, params.sigma);
  params.achieved.performance_target = binary_concordance(params.mu, params.sigma);
  return params;
}

SurvivalMoments survival_moments(double lambda0, double sigma, double t_c) {
  const auto& sample = survival_tuning_sample();
  const std::size_t n = sample.z.size();
  std::vector<double> scores(n), times(n), events(n);
  double event_count = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = sigma * sample.z[i];
    const double latent = sample.unit_exponential[i] / (lambda0 * std::exp(eta));
    scores[i] = eta;
    events[i] = latent <= t_c ? 1.0 : 0.0;
    times[i] = std::min(latent, t_c);
    event_count += events[i];
  }
  SurvivalMoments out;
  out.event_rate = event_count / static_cast<double>(n);
  if (sigma > 0.0 && event_count > 0.0) {
    out.c_index = c_index(scores, times, events);
  }
  return out;
}

GeneratorParams tune_survival(double event_rate_target, double c_target, int p,
                              int p_noise, double t_c) {
  check_dimensions(p, p_noise);
  check_open_unit(event_rate_target, "event rate target");
  if (!(c_target >= 0.5 && c_target < 1.0)) {
    throw DomainError("C-index target must lie in [0.5, 1)");
  }
  if (!(t_c > 0.0)) throw DomainError("censoring time must be positive");

  GeneratorParams params = base_params(OutcomeFamily::survival, p, p_noise);
  params.t_c = t_c;
  const double flat_hazard = -std::log(1.0 - event_rate_target) / t_c;

  if (c_target == 0.5) {
    // No signal: the event rate is 1 - exp(-lambda0 t_c) exactly.
    params.sigma = 0.0;
    params.beta_signal = 0.0;
    params.lambda0 = flat_hazard;
    params.achieved.prevalence_or_event_rate = event_rate_target;
    params.achieved.performance_target = 0.5;
    return params;
  }

  auto objective = [&](const std::vector<double>& v) {
    const auto m = survival_moments(std::exp(v[0]), std::exp(v[1]), t_c);
    return (m.event_rate - event_rate_target) * (m.event_rate - event_rate_target) +
           (m.c_index - c_target) * (m.c_index - c_target);
  };
  NelderMeadOptions options;
  options.max_iterations = 500;
  options.target_value = 1e-10;
  options.f_tolerance = 1e-14;
  options.x_tolerance = 1e-7;
  const auto best =
      nelder_mead(objective, {std::log(flat_hazard), 0.0}, {0.5, 0.5}, options);
  if (!(best.value <= kTuningTolerance)) {
    throw TuningError("survival generator tuning did not converge", best.x,
                      best.value);
  }
  params.lambda0 = std::exp(best.x[0]);
  params.sigma = std::exp(best.x[1]);
  params.beta_signal = params.sigma / std::sqrt(static_cast<double>(params.p_signal));
  const auto achieved = survival_moments(params.lambda0, params.sigma, t_c);
  params.achieved.prevalence_or_event_rate = achieved.event_rate;
  params.achieved.performance_target = achieved.c_index;
  return params;
}

Eigen::VectorXd true_linear_predictor(const GeneratorParams& params,
                                      const Eigen::MatrixXd& x) {
  if (x.cols() != params.p) throw DomainError("predictor matrix has wrong width");
  Eigen::VectorXd eta =
      x.leftCols(params.p_signal).rowwise().sum() * params.beta_signal;
  if (params.family == OutcomeFamily::binary) eta.array() += params.beta0;
  return eta;
}

Dataset generate(const GeneratorParams& params, Eigen::Index n,
                 const SeedStream& stream) {
  if (n < 1) throw DomainError("sample size must be at least 1");
  params.validate();

  Rng rng = stream.engine();
  std::normal_distribution<double> normal;

  Dataset data;
  data.x.resize(n, params.p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < params.p; ++j) data.x(i, j) = normal(rng);
  }
  const Eigen::VectorXd eta = true_linear_predictor(params, data.x);

  Outcome& out = data.outcome;
  out.family = params.family;
  out.y.resize(n);
  switch (params.family) {
    case OutcomeFamily::binary: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        out.y(i) = unit(rng) < logistic(eta(i)) ? 1.0 : 0.0;
      }
      break;
    }
    case OutcomeFamily::continuous:
      for (Eigen::Index i = 0; i < n; ++i) {
        out.y(i) = eta(i) + params.residual_sd * normal(rng);
      }
      break;
    case OutcomeFamily::survival: {
      std::exponential_distribution<double> exponential(1.0);
      out.event.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double latent = exponential(rng) / (params.lambda0 * std::exp(eta(i)));
        out.event(i) = latent <= params.t_c ? 1.0 : 0.0;
        out.y(i) = std::min(latent, params.t_c);
      }
      break;
    }
  }
  return data;
}

}  // namespace simsize
