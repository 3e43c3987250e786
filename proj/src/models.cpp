#include "simsize/models.hpp"

#include "simsize/error.hpp"
#include "simsize/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace simsize {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

double softplus(double v) {
  return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

double logistic_ll(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = design * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

bool solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
               Eigen::VectorXd& out) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    out = llt.solve(b);
    if (out.allFinite()) return true;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
  out = ldlt.solve(b);
  return out.allFinite();
}

// Subjects grouped by distinct observed time, latest time first, so that risk
// sets can be accumulated in a single pass.
struct RiskOrder {
  std::vector<Eigen::Index> order;
  std::vector<std::size_t> group_end;  // exclusive end of each tie group
};

RiskOrder risk_order(const Eigen::VectorXd& time) {
  RiskOrder r;
  r.order.resize(static_cast<std::size_t>(time.size()));
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return time(a) > time(b); });
  for (std::size_t k = 1; k <= r.order.size(); ++k) {
    if (k == r.order.size() || time(r.order[k]) != time(r.order[k - 1])) {
      r.group_end.push_back(k);
    }
  }
  return r;
}

struct CoxState {
  double ll = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;  // negative Hessian
};

CoxState cox_state(const Eigen::MatrixXd& xc, const Eigen::VectorXd& event,
                   const RiskOrder& risk, const Eigen::VectorXd& beta,
                   bool derivatives) {
  const Eigen::Index p = xc.cols();
  const Eigen::VectorXd eta = xc * beta;
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;

  CoxState s;
  s.gradient = Eigen::VectorXd::Zero(p);
  s.information = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  // per-group scratch, allocated once
  Eigen::VectorXd death_x(p);
  Eigen::VectorXd mean(p);
  Eigen::VectorXd row(p);

  std::size_t begin = 0;
  for (std::size_t end : risk.group_end) {
    double deaths = 0.0;
    double death_eta = 0.0;
    if (derivatives) death_x.setZero();
    for (std::size_t k = begin; k < end; ++k) {
      const Eigen::Index i = risk.order[k];
      const double w = std::exp(eta(i) - shift);
      s0 += w;
      if (derivatives) {
        row = xc.row(i).transpose();
        s1.noalias() += w * row;
        s2.selfadjointView<Eigen::Lower>().rankUpdate(row, w);
      }
      if (event(i) > 0.5) {
        deaths += 1.0;
        death_eta += eta(i);
        if (derivatives) death_x += xc.row(i).transpose();
      }
    }
    if (deaths > 0.0) {
      s.ll += death_eta - deaths * (shift + std::log(s0));
      if (derivatives) {
        mean = s1 / s0;
        s.gradient.noalias() += death_x - deaths * mean;
        s.information.triangularView<Eigen::Lower>() += (deaths / s0) * s2;
        s.information.selfadjointView<Eigen::Lower>().rankUpdate(mean, -deaths);
      }
    }
    begin = end;
  }
  s.information = s.information.selfadjointView<Eigen::Lower>();
  return s;
}

}  // namespace

FittedModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DomainError("outcome length does not match predictors");
  if (n <= p + 1) throw FitError("least squares needs n > p + 1");

  const Eigen::MatrixXd design = with_intercept(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p + 1) throw FitError("rank-deficient design matrix");
  const Eigen::VectorXd beta = qr.solve(y);

  FittedModel model;
  model.family = OutcomeFamily::continuous;
  model.intercept = beta(0);
  model.coefficients = beta.tail(p);
  model.converged = true;
  model.iterations = 1;
  return model;
}

FittedModel fit_linear(const Dataset& data) {
  if (data.family() != OutcomeFamily::continuous) {
    throw DomainError("linear regression needs a continuous outcome");
  }
  return fit_linear(data.x, data.outcome.y);
}

double logistic_log_likelihood(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y, double intercept,
                               const Eigen::VectorXd& coefficients) {
  Eigen::VectorXd beta(coefficients.size() + 1);
  beta << intercept, coefficients;
  return logistic_ll(with_intercept(x), y, beta);
}

FittedModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw DomainError("outcome length does not match predictors");
  const double events = y.sum();
  if (events < 2.0 || static_cast<double>(n) - events < 2.0) {
    throw FitError("logistic regression needs at least 2 events and 2 non-events");
  }

  const Eigen::MatrixXd design = with_intercept(x);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  double ll = logistic_ll(design, y, beta);

  FittedModel model;
  model.family = OutcomeFamily::binary;
  model.log_likelihood_trace.push_back(ll);

  // the score is a sum over rows; once the likelihood stops moving, accept a
  // score at the roundoff floor of that sum
  const double stalled_tolerance = 1e-6 * std::max<double>(1.0, n);
  Eigen::VectorXd prob(n);
  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    const Eigen::VectorXd eta = design * beta;
    for (Eigen::Index i = 0; i < n; ++i) prob(i) = logistic(eta(i));
    const Eigen::VectorXd score = design.transpose() * (y - prob);
    if (score.lpNorm<Eigen::Infinity>() < kScoreTolerance) {
      model.converged = true;
      break;
    }
    const Eigen::VectorXd weights = prob.array() * (1.0 - prob.array());
    const Eigen::MatrixXd information =
        design.transpose() * weights.asDiagonal() * design;
    Eigen::VectorXd step;
    if (!solve_spd(information, score, step)) {
      model.diagnostics.singular = true;
      break;
    }

    double t = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double candidate_ll = logistic_ll(design, y, candidate);
    int halvings = 0;
    while (!(candidate_ll >= ll) && halvings < 30) {
      t *= 0.5;
      candidate = beta + t * step;
      candidate_ll = logistic_ll(design, y, candidate);
      ++halvings;
    }
    if (!(candidate_ll >= ll)) break;
    model.iterations = iter + 1;
    const bool stalled = candidate_ll - ll <= 1e-15 * std::max(1.0, std::abs(ll));
    beta = candidate;
    ll = candidate_ll;
    model.log_likelihood_trace.push_back(ll);
    if (stalled && score.lpNorm<Eigen::Infinity>() < stalled_tolerance) {
      model.converged = true;
      break;
    }
  }

  model.intercept = beta(0);
  model.coefficients = beta.tail(p);

  const Eigen::VectorXd eta = design * beta;
  double worst_residual = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    worst_residual = std::max(worst_residual, std::abs(y(i) - logistic(eta(i))));
  }
  if (beta.lpNorm<Eigen::Infinity>() > kDivergenceBound || worst_residual < 1e-6) {
    model.diagnostics.separation = true;
    model.diagnostics.message = "complete or quasi-complete separation";
  }
  if (!model.converged && !model.diagnostics.separation) {
    throw FitError(model.diagnostics.singular
                       ? "logistic regression: singular information matrix"
                       : "logistic regression did not converge");
  }
  if (!model.converged && model.diagnostics.message.empty()) {
    model.diagnostics.message = "iteration limit reached";
  }
  return model;
}

FittedModel fit_logistic(const Dataset& data) {
  if (data.family() != OutcomeFamily::binary) {
    throw DomainError("logistic regression needs a binary outcome");
  }
  return fit_logistic(data.x, data.outcome.y);
}

double cox_log_partial_likelihood(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& time,
                                  const Eigen::VectorXd& event,
                                  const Eigen::VectorXd& coefficients) {
  return cox_state(x, event, risk_order(time), coefficients, false).ll;
}

FittedModel fit_cox(const Eigen::MatrixXd& x, const Eigen::VectorXd& time,
                    const Eigen::VectorXd& event) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (time.size() != n || event.size() != n) {
    throw DomainError("outcome length does not match predictors");
  }
  const double deaths = event.sum();
  if (deaths < 2.0) throw FitError("Cox regression needs at least 2 events");

  bool varies = false;
  for (Eigen::Index j = 0; j < p && !varies; ++j) {
    double first = 0.0;
    bool seen = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (event(i) < 0.5) continue;
      if (!seen) {
        first = x(i, j);
        seen = true;
      } else if (x(i, j) != first) {
        varies = true;
        break;
      }
    }
  }
  if (!varies) throw FitError("no covariate varies among subjects with events");

  const RiskOrder risk = risk_order(time);
  if (risk.group_end.size() < 2) throw FitError("all observed times are tied");

  // Centring leaves the partial likelihood unchanged and keeps exp() tame.
  const Eigen::RowVectorXd centre = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - centre;

  FittedModel model;
  model.family = OutcomeFamily::survival;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  // the score is a sum over rows; once the likelihood stops moving, accept a
  // score at the roundoff floor of that sum
  const double stalled_tolerance = 1e-6 * std::max<double>(1.0, n);
  CoxState state = cox_state(xc, event, risk, beta, true);
  model.log_likelihood_trace.push_back(state.ll);

  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    if (state.gradient.lpNorm<Eigen::Infinity>() < kScoreTolerance) {
      model.converged = true;
      break;
    }
    Eigen::VectorXd step;
    if (!solve_spd(state.information, state.gradient, step)) {
      model.diagnostics.singular = true;
      break;
    }
    double t = 1.0;
    Eigen::VectorXd candidate = beta + step;
    CoxState next = cox_state(xc, event, risk, candidate, false);
    int halvings = 0;
    while (!(next.ll >= state.ll) && halvings < 30) {
      t *= 0.5;
      candidate = beta + t * step;
      next = cox_state(xc, event, risk, candidate, false);
      ++halvings;
    }
    if (!(next.ll >= state.ll)) break;
    model.iterations = iter + 1;
    const bool stalled =
        next.ll - state.ll <= 1e-15 * std::max(1.0, std::abs(state.ll));
    const double previous_gradient = state.gradient.lpNorm<Eigen::Infinity>();
    beta = candidate;
    state = cox_state(xc, event, risk, beta, true);
    model.log_likelihood_trace.push_back(state.ll);
    if (stalled && previous_gradient < stalled_tolerance) {
      model.converged = true;
      break;
    }
  }
  if (model.converged == false &&
      state.gradient.lpNorm<Eigen::Infinity>() < kScoreTolerance) {
    model.converged = true;
  }

  model.coefficients = beta;
  if (beta.norm() > kDivergenceBound) {
    model.diagnostics.monotone_likelihood = true;
    model.diagnostics.message = "monotone likelihood";
    throw FitError("Cox regression: monotone likelihood (coefficient norm > 20)");
  }
  if (!model.converged) {
    throw FitError(model.diagnostics.singular
                       ? "Cox regression: singular information matrix"
                       : "Cox regression did not converge");
  }
  return model;
}

FittedModel fit_cox(const Dataset& data) {
  if (data.family() != OutcomeFamily::survival) {
    throw DomainError("Cox regression needs a survival outcome");
  }
  return fit_cox(data.x, data.outcome.y, data.outcome.event);
}

FittedModel fit_model(const Dataset& data) {
  switch (data.family()) {
    case OutcomeFamily::binary: return fit_logistic(data);
    case OutcomeFamily::continuous: return fit_linear(data);
    case OutcomeFamily::survival: return fit_cox(data);
  }
  throw DomainError("unknown outcome family");
}

Eigen::VectorXd linear_predictor(const FittedModel& model,
                                 const Eigen::MatrixXd& x) {
  if (x.cols() != model.coefficients.size()) {
    throw DomainError("predictor matrix width does not match the model");
  }
  Eigen::VectorXd eta = x * model.coefficients;
  if (model.intercept) eta.array() += *model.intercept;
  return eta;
}

}  // namespace simsize
