#pragma once

// Slow, obviously-correct reference implementations used as test oracles.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// Case-control pair enumeration.
inline double auc_pairs(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0.0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Harrell's C by enumerating ordered pairs; returns NaN with no comparable pair.
inline double c_index_pairs(const std::vector<double>& s, const std::vector<double>& t,
                            const std::vector<double>& d) {
  double concordant = 0.0;
  double comparable = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!(t[i] < t[j]) || d[i] != 1.0) continue;
      comparable += 1.0;
      if (s[i] > s[j]) concordant += 1.0;
      else if (s[i] == s[j]) concordant += 0.5;
    }
  }
  return comparable > 0 ? concordant / comparable : std::nan("");
}

inline double r2_direct(const std::vector<double>& pred, const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v / n;
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - pred[i]) * (y[i] - pred[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  return 1.0 - (sse / n) / (sst / n);
}

// OLS via the normal equations (X'X) b = X'y with an intercept column.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Eigen::MatrixXd xtx = design.transpose() * design;
  const Eigen::VectorXd xty = design.transpose() * y;
  return xtx.inverse() * xty;
}

// Breslow log partial likelihood for one covariate, written out term by term.
inline double cox_loglik_1d(double beta, const std::vector<double>& x,
                            const std::vector<double>& t, const std::vector<double>& d) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (d[i] != 1.0) continue;
    double risk = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (t[j] >= t[i]) risk += std::exp(beta * x[j]);
    }
    ll += beta * x[i] - std::log(risk);
  }
  return ll;
}

// Quantile with linear interpolation at zero-based rank (n-1) q, on sorted input.
inline double quantile_sorted(const std::vector<double>& v, double q) {
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = lo + 1 < v.size() ? lo + 1 : lo;
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace oracle
