#include "simsize/optim.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace simsize {

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> start, const std::vector<double>& step,
    const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step[i];

  NelderMeadResult result;
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) {
    values[i] = objective(simplex[i]);
    ++result.evaluations;
  }

  std::vector<std::size_t> order(dim + 1);
  auto point = [dim](const std::vector<double>& a, const std::vector<double>& b,
                     double t) {
    std::vector<double> out(dim);
    for (std::size_t j = 0; j < dim; ++j) out[j] = a[j] + t * (b[j] - a[j]);
    return out;
  };

  for (result.iterations = 0; result.iterations < options.max_iterations;
       ++result.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - (dim > 0 ? 1 : 0)];

    if (values[best] < options.target_value) break;
    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
      }
    }
    if (values[worst] - values[best] <= options.f_tolerance &&
        diameter <= options.x_tolerance) {
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j] / dim;
    }

    auto reflected = point(centroid, simplex[worst], -1.0);
    const double f_reflected = objective(reflected);
    ++result.evaluations;
    if (f_reflected < values[best]) {
      auto expanded = point(centroid, simplex[worst], -2.0);
      const double f_expanded = objective(expanded);
      ++result.evaluations;
      if (f_expanded < f_reflected) {
        simplex[worst] = std::move(expanded);
        values[worst] = f_expanded;
      } else {
        simplex[worst] = std::move(reflected);
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second]) {
      simplex[worst] = std::move(reflected);
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    auto contracted = outside ? point(centroid, reflected, 0.5)
                              : point(centroid, simplex[worst], 0.5);
    const double f_contracted = objective(contracted);
    ++result.evaluations;
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = std::move(contracted);
      values[worst] = f_contracted;
      continue;
    }
    // shrink towards the best vertex
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      simplex[i] = point(simplex[best], simplex[i], 0.5);
      values[i] = objective(simplex[i]);
      ++result.evaluations;
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.value = *best_it;
  return result;
}

const QuadratureRule& gauss_hermite_normal(int order) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v = solver.eigenvectors()(0, i);
    rule.weights[i] = v * v;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace simsize
