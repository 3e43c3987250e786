#include "simsize/serialize.hpp"

#include "simsize/error.hpp"

#include <cmath>
#include <string>

namespace simsize {

namespace {

// JSON has no infinities; non-finite values travel as null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or(const Json& j, double fallback) {
  return j.is_null() ? fallback : j.get<double>();
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return j.at(key).get<T>();
}

template <typename T>
T optional_field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

Json to_json(const GeneratorParams& params) {
  Json j;
  const bool binary = params.family == OutcomeFamily::binary;
  const bool continuous = params.family == OutcomeFamily::continuous;
  const bool survival = params.family == OutcomeFamily::survival;
  j["family"] = std::string(to_string(params.family));
  j["p"] = params.p;
  j["p_signal"] = params.p_signal;
  j["p_noise"] = params.p_noise;
  j["beta_signal"] = params.beta_signal;
  j["beta0"] = binary ? Json(params.beta0) : Json(nullptr);
  j["mu"] = binary ? Json(params.mu) : Json(nullptr);
  j["sigma"] = params.sigma;
  j["residual_sd"] = continuous ? Json(params.residual_sd) : Json(nullptr);
  j["lambda0"] = survival ? Json(params.lambda0) : Json(nullptr);
  j["t_c"] = survival ? Json(params.t_c) : Json(nullptr);
  Json achieved;
  const auto& rate = params.achieved.prevalence_or_event_rate;
  achieved["prevalence"] = binary && rate ? Json(*rate) : Json(nullptr);
  achieved["event_rate"] = survival && rate ? Json(*rate) : Json(nullptr);
  achieved[continuous ? "r2" : "c_statistic"] = params.achieved.performance_target;
  j["achieved"] = achieved;
  return j;
}

GeneratorParams generator_from_json(const Json& j) {
  GeneratorParams params;
  params.family = parse_family(required<std::string>(j, "family"));
  params.p = required<int>(j, "p");
  params.p_noise = optional_field<int>(j, "p_noise", 0);
  params.p_signal = optional_field<int>(j, "p_signal", params.p - params.p_noise);
  params.beta_signal = required<double>(j, "beta_signal");
  params.beta0 = optional_field<double>(j, "beta0", 0.0);
  params.mu = optional_field<double>(j, "mu", 0.0);
  params.sigma = optional_field<double>(j, "sigma", 0.0);
  params.residual_sd = optional_field<double>(j, "residual_sd", 1.0);
  params.lambda0 = optional_field<double>(j, "lambda0", 0.0);
  params.t_c = optional_field<double>(j, "t_c", 0.0);
  if (j.contains("achieved") && j.at("achieved").is_object()) {
    const Json& a = j.at("achieved");
    if (params.family == OutcomeFamily::binary && a.contains("prevalence") &&
        !a.at("prevalence").is_null()) {
      params.achieved.prevalence_or_event_rate = a.at("prevalence").get<double>();
    }
    if (params.family == OutcomeFamily::survival && a.contains("event_rate") &&
        !a.at("event_rate").is_null()) {
      params.achieved.prevalence_or_event_rate = a.at("event_rate").get<double>();
    }
    const char* perf =
        params.family == OutcomeFamily::continuous ? "r2" : "c_statistic";
    params.achieved.performance_target = optional_field<double>(a, perf, 0.0);
  }
  params.validate();
  return params;
}

Json to_json(const FittedModel& model) {
  Json j;
  j["family"] = std::string(to_string(model.family));
  j["intercept"] = model.intercept ? number(*model.intercept) : Json(nullptr);
  Json coefs = Json::array();
  for (Eigen::Index i = 0; i < model.coefficients.size(); ++i) {
    coefs.push_back(number(model.coefficients(i)));
  }
  j["coefficients"] = coefs;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["separation"] = model.diagnostics.separation;
  j["monotone_likelihood"] = model.diagnostics.monotone_likelihood;
  j["singular"] = model.diagnostics.singular;
  j["message"] = model.diagnostics.message;
  Json trace = Json::array();
  for (double v : model.log_likelihood_trace) trace.push_back(number(v));
  j["log_likelihood_trace"] = trace;
  return j;
}

Json to_json(const SearchProblem& problem) {
  Json j;
  j["generator"] = to_json(problem.generator);
  j["metric"] = std::string(to_string(problem.metric));
  j["target"] = problem.tau;
  j["criterion"] = std::string(to_string(problem.criterion.kind));
  j["assurance_quantile"] = problem.criterion.assurance_quantile;
  j["budget"] = problem.budget;
  j["reps"] = problem.kappa;
  j["pilot_budget"] = problem.pilot_budget;
  j["pilot_iters"] = problem.pilot_max_iters;
  j["bound_tolerance"] = problem.bound_tolerance;
  j["n_test"] = problem.n_test;
  j["seed"] = problem.master_seed;
  j["n_boot"] = problem.n_boot;
  j["start_n"] = problem.start_n ? Json(*problem.start_n) : Json(nullptr);
  if (problem.manual_bounds) {
    j["bounds"] = Json::array({problem.manual_bounds->n_min, problem.manual_bounds->n_max});
  } else {
    j["bounds"] = nullptr;
  }
  return j;
}

SearchProblem problem_from_json(const Json& j) {
  SearchProblem problem;
  problem.generator = generator_from_json(required<Json>(j, "generator"));
  problem.metric = parse_metric(required<std::string>(j, "metric"));
  problem.tau = required<double>(j, "target");
  problem.criterion = parse_criterion(optional_field<std::string>(j, "criterion", "mean"));
  problem.criterion.assurance_quantile =
      optional_field<double>(j, "assurance_quantile", problem.criterion.assurance_quantile);
  problem.budget = optional_field<int>(j, "budget", problem.budget);
  problem.kappa = optional_field<int>(j, "reps", problem.kappa);
  problem.pilot_budget = optional_field<int>(j, "pilot_budget", problem.pilot_budget);
  problem.pilot_max_iters = optional_field<int>(j, "pilot_iters", problem.pilot_max_iters);
  problem.bound_tolerance =
      optional_field<double>(j, "bound_tolerance", problem.bound_tolerance);
  problem.n_test = optional_field<int>(j, "n_test", problem.n_test);
  problem.master_seed = optional_field<std::uint64_t>(j, "seed", problem.master_seed);
  problem.n_boot = optional_field<int>(j, "n_boot", problem.n_boot);
  if (j.contains("start_n") && !j.at("start_n").is_null()) {
    problem.start_n = j.at("start_n").get<std::int64_t>();
  }
  if (j.contains("bounds") && !j.at("bounds").is_null()) {
    const Json& b = j.at("bounds");
    problem.manual_bounds = Bounds{b.at(0).get<std::int64_t>(), b.at(1).get<std::int64_t>()};
  }
  return problem;
}

Json to_json(const TraceEntry& entry) {
  Json j;
  j["n"] = entry.n;
  j["phase"] = std::string(to_string(entry.phase));
  j["g_hat"] = number(entry.g_hat);
  j["se"] = number(entry.se);
  j["attempts"] = entry.attempts;
  j["redraws"] = entry.redraws;
  j["failed"] = entry.failed;
  j["error"] = entry.error;
  Json raw = Json::array();
  for (double v : entry.raw) raw.push_back(number(v));
  j["raw"] = raw;
  return j;
}

Json to_json(const SearchResult& result) {
  Json j;
  j["n_star"] = result.n_star;
  j["bounds"] = {{"n_min", result.bounds_used.n_min}, {"n_max", result.bounds_used.n_max}};
  j["engine"] = std::string(to_string(result.engine));
  j["evaluations_used"] = result.evaluations_used;
  j["wall_time"] = result.wall_time;
  j["seed"] = result.seed;
  j["fallback_flags"] = result.fallback_flags;
  Json trace = Json::array();
  for (const auto& e : result.trace.entries) trace.push_back(to_json(e));
  j["trace"] = trace;
  return j;
}

SearchResult result_from_json(const Json& j) {
  SearchResult result;
  result.n_star = required<std::int64_t>(j, "n_star");
  const Json& b = required<Json>(j, "bounds");
  result.bounds_used = {b.at("n_min").get<std::int64_t>(), b.at("n_max").get<std::int64_t>()};
  result.engine = parse_engine(required<std::string>(j, "engine"));
  result.evaluations_used = optional_field<int>(j, "evaluations_used", 0);
  result.wall_time = optional_field<double>(j, "wall_time", 0.0);
  result.seed = optional_field<std::uint64_t>(j, "seed", 0);
  result.fallback_flags =
      optional_field<std::vector<std::string>>(j, "fallback_flags", {});
  if (j.contains("trace")) {
    for (const Json& e : j.at("trace")) {
      TraceEntry entry;
      entry.n = e.at("n").get<std::int64_t>();
      entry.phase = parse_phase(e.at("phase").get<std::string>());
      entry.g_hat = number_or(e.at("g_hat"), -INFINITY);
      entry.se = number_or(e.at("se"), 0.0);
      entry.attempts = e.at("attempts").get<int>();
      entry.redraws = e.at("redraws").get<int>();
      entry.failed = e.at("failed").get<bool>();
      entry.error = e.at("error").get<std::string>();
      for (const Json& v : e.at("raw")) entry.raw.push_back(number_or(v, NAN));
      result.trace.entries.push_back(std::move(entry));
    }
  }
  return result;
}

}  // namespace simsize
