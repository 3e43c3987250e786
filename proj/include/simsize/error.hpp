#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace simsize {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configuration is internally inconsistent (e.g. no signal predictors).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Generator tuning did not reach its objective tolerance.
class TuningError : public Error {
 public:
  TuningError(const std::string& what, std::vector<double> best_point,
              double best_objective)
      : Error(what),
        best_point_(std::move(best_point)),
        best_objective_(best_objective) {}

  const std::vector<double>& best_point() const { return best_point_; }
  double best_objective() const { return best_objective_; }

 private:
  std::vector<double> best_point_;
  double best_objective_;
};

/// A model could not be fitted to a (degenerate) training sample.
class FitError : public Error {
 public:
  using Error::Error;
};

/// A performance metric is undefined on its input.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// A candidate sample size could not be evaluated after the redraw cap.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace simsize
