#pragma once

#include <functional>
#include <vector>

namespace simsize {

struct NelderMeadOptions {
  int max_iterations = 500;
  /// Stop as soon as the best objective drops below this value.
  double target_value = -1e300;
  /// Stop when the simplex objective spread and diameter both fall below these.
  double f_tolerance = 1e-14;
  double x_tolerance = 1e-10;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Derivative-free minimisation. `step` sets the initial simplex offsets.
NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> start, const std::vector<double>& step,
    const NelderMeadOptions& options = {});

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for E[f(Z)], Z ~ N(0,1): sum_i w_i f(z_i) with sum w = 1.
/// Nodes come from the Golub-Welsch eigenproblem.
const QuadratureRule& gauss_hermite_normal(int order);

double logistic(double x);

}  // namespace simsize
