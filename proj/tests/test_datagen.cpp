#include "simsize/datagen.hpp"
#include "simsize/error.hpp"
#include "simsize/metrics.hpp"
#include "simsize/models.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace simsize;

namespace {

struct MonteCarlo {
  double rate = 0.0;
  double discrimination = 0.0;
};

// 10^6 draws in chunks; discrimination of the true linear predictor.
MonteCarlo monte_carlo(const GeneratorParams& params, int chunks = 10,
                       int chunk_size = 100000) {
  std::vector<double> eta;
  std::vector<double> y;
  std::vector<double> event;
  for (int c = 0; c < chunks; ++c) {
    const Dataset d = generate(params, chunk_size, SeedStream(99).child("mc", c));
    const Eigen::VectorXd e = true_linear_predictor(params, d.x);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      eta.push_back(e(i));
      y.push_back(d.outcome.y(i));
      if (params.family == OutcomeFamily::survival) event.push_back(d.outcome.event(i));
    }
  }
  MonteCarlo mc;
  const double n = static_cast<double>(y.size());
  if (params.family == OutcomeFamily::binary) {
    for (double v : y) mc.rate += v / n;
    mc.discrimination = auc(eta, y);
  } else {
    for (double v : event) mc.rate += v / n;
    mc.discrimination = c_index(eta, y, event);
  }
  return mc;
}

}  // namespace

TEST_CASE("continuous tuning closed form") {
  CHECK(tune_continuous(0.5, 1).beta_signal == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tune_continuous(0.2, 10).beta_signal == doctest::Approx(0.158114).epsilon(1e-6));
  CHECK(tune_continuous(0.7, 100).beta_signal == doctest::Approx(0.152753).epsilon(1e-6));
  const GeneratorParams g = tune_continuous(0.3, 10, 4);
  CHECK(g.p_signal == 6);
  CHECK(g.beta_signal == doctest::Approx(std::sqrt(0.3 / (6 * 0.7))));
  CHECK(g.residual_sd == 1.0);
  CHECK(g.achieved.performance_target == 0.3);
  CHECK_FALSE(g.achieved.prevalence_or_event_rate.has_value());
}

TEST_CASE("continuous tuning rejects bad inputs") {
  CHECK_THROWS_AS(tune_continuous(0.0, 10), DomainError);
  CHECK_THROWS_AS(tune_continuous(1.0, 10), DomainError);
  CHECK_THROWS_AS(tune_continuous(0.5, 10, 10), ConfigError);
}

TEST_CASE("continuous generator reaches its R2 out of sample") {
  const GeneratorParams g = tune_continuous(0.7, 10);
  const Dataset train = generate(g, 1000000, SeedStream(1).child("train"));
  const Dataset test = generate(g, 200000, SeedStream(1).child("test"));
  const FittedModel m = fit_linear(train);
  const Eigen::VectorXd pred = linear_predictor(m, test.x);
  CHECK(r2_oos({pred.data(), static_cast<std::size_t>(pred.size())},
               {test.outcome.y.data(), static_cast<std::size_t>(test.outcome.y.size())}) ==
        doctest::Approx(0.7).epsilon(0.005 / 0.7));
  for (Eigen::Index j = 0; j < m.coefficients.size(); ++j) {
    CHECK(std::abs(m.coefficients(j) - g.beta_signal) < 0.02);
  }
}

TEST_CASE("binary tuning rejects a C target of 0.5") {
  CHECK_THROWS_AS(tune_binary(0.5, 0.5, 10), DomainError);
  CHECK_THROWS_AS(tune_binary(1.2, 0.8, 10), DomainError);
}

TEST_CASE("binary tuning passes the Monte Carlo oracle (0.2, 0.8, p=10)") {
  const GeneratorParams g = tune_binary(0.2, 0.8, 10);
  CHECK(g.sigma == doctest::Approx(g.beta_signal * std::sqrt(10.0)));
  CHECK(g.beta0 == g.mu);
  const MonteCarlo mc = monte_carlo(g);
  CHECK(std::abs(mc.rate - 0.2) < 0.005);
  CHECK(std::abs(mc.discrimination - 0.8) < 0.005);
}

TEST_CASE("binary tuning passes the Monte Carlo oracle (0.05, 0.8, p=100)") {
  const GeneratorParams g = tune_binary(0.05, 0.8, 100);
  const MonteCarlo mc = monte_carlo(g, 20, 50000);
  CHECK(std::abs(mc.rate - 0.05) < 0.005);
  CHECK(std::abs(mc.discrimination - 0.8) < 0.005);
}

TEST_CASE("binary quadrature agrees with brute-force integration") {
  // midpoint rule over a wide grid, independent of the library's quadrature
  const double mu = -1.3;
  const double sigma = 1.1;
  double prevalence = 0.0;
  const int k = 200000;
  const double lo = -12.0;
  const double hi = 12.0;
  const double h = (hi - lo) / k;
  for (int i = 0; i < k; ++i) {
    const double z = lo + (i + 0.5) * h;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    prevalence += h * phi / (1.0 + std::exp(-(mu + sigma * z)));
  }
  CHECK(binary_prevalence(mu, sigma) == doctest::Approx(prevalence).epsilon(1e-9));
  CHECK(binary_concordance(mu, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("survival tuning with C = 0.5 inverts the event rate exactly") {
  const GeneratorParams g = tune_survival(0.8, 0.5, 10);
  CHECK(g.sigma == 0.0);
  CHECK(g.beta_signal == 0.0);
  CHECK(g.lambda0 == doctest::Approx(-std::log(0.2)).epsilon(1e-12));
  CHECK(g.lambda0 == doctest::Approx(1.60944).epsilon(1e-5));
  CHECK(g.t_c == 1.0);

  const Dataset d = generate(g, 1000000, SeedStream(3));
  CHECK(std::abs(d.outcome.event.mean() - 0.8) < 0.002);
}

TEST_CASE("survival tuning passes the Monte Carlo oracle (0.4, 0.8, p=10)") {
  const GeneratorParams g = tune_survival(0.4, 0.8, 10);
  const MonteCarlo mc = monte_carlo(g);
  CHECK(std::abs(mc.rate - 0.4) < 0.01);
  CHECK(std::abs(mc.discrimination - 0.8) < 0.01);
}

TEST_CASE("survival tuning passes the Monte Carlo oracle (0.8, 0.8, p=100)") {
  const GeneratorParams g = tune_survival(0.8, 0.8, 100);
  const MonteCarlo mc = monte_carlo(g, 20, 50000);
  CHECK(std::abs(mc.rate - 0.8) < 0.01);
  CHECK(std::abs(mc.discrimination - 0.8) < 0.01);
}

TEST_CASE("survival tuning is deterministic and honours the censoring time") {
  const GeneratorParams a = tune_survival(0.6, 0.75, 5, 0, 2.0);
  const GeneratorParams b = tune_survival(0.6, 0.75, 5, 0, 2.0);
  CHECK(a.lambda0 == b.lambda0);
  CHECK(a.sigma == b.sigma);
  CHECK(a.t_c == 2.0);
}

TEST_CASE("binary generator with no signal reproduces the intercept prevalence") {
  GeneratorParams g;
  g.family = OutcomeFamily::binary;
  g.p = 3;
  g.p_signal = 3;
  g.beta_signal = 0.0;
  g.beta0 = g.mu = std::log(0.2 / 0.8);
  g.sigma = 0.0;
  const Dataset d = generate(g, 1000000, SeedStream(11));
  CHECK(std::abs(d.outcome.y.mean() - 0.2) < 0.002);
}

TEST_CASE("generate is a pure function of (params, n, stream)") {
  const GeneratorParams g = tune_binary(0.3, 0.7, 4, 1);
  const Dataset a = generate(g, 500, SeedStream(8).child("x", 2));
  const Dataset b = generate(g, 500, SeedStream(8).child("x", 2));
  const Dataset c = generate(g, 500, SeedStream(8).child("x", 3));
  CHECK(a.x == b.x);
  CHECK(a.outcome.y == b.outcome.y);
  CHECK_FALSE(a.x == c.x);
  CHECK(a.rows() == 500);
  CHECK(a.x.cols() == 4);
  CHECK_THROWS_AS(generate(g, 0, SeedStream(1)), DomainError);
}

TEST_CASE("noise predictors carry zero coefficients") {
  const GeneratorParams g = tune_continuous(0.5, 5, 2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 5);
  x(0, 3) = 10.0;
  x(0, 4) = -7.0;
  CHECK(true_linear_predictor(g, x)(0) == 0.0);
  x(0, 0) = 1.0;
  CHECK(true_linear_predictor(g, x)(0) == doctest::Approx(g.beta_signal));
}

TEST_CASE("survival datasets respect administrative censoring") {
  const GeneratorParams g = tune_survival(0.5, 0.7, 6, 0, 1.5);
  const Dataset d = generate(g, 20000, SeedStream(4));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const double t = d.outcome.y(i);
    CHECK(t > 0.0);
    CHECK(t <= 1.5);
    if (d.outcome.event(i) == 0.0) CHECK(t == 1.5);
    else CHECK(t < 1.5);
  }
}

TEST_CASE("generator params invariants are enforced") {
  GeneratorParams g = tune_binary(0.2, 0.8, 10);
  g.sigma *= 2.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  GeneratorParams s = tune_survival(0.8, 0.5, 10);
  s.lambda0 = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(parse_family("survival") == OutcomeFamily::survival);
  CHECK_THROWS_AS(parse_family("poisson"), DomainError);
}
