#include "simsize/optim.hpp"
#include "simsize/seed.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace simsize;

TEST_CASE("identical paths give identical streams") {
  const SeedStream a = SeedStream(42).child("run", 3).child("rep", 7);
  const SeedStream b = SeedStream(42).child("run", 3).child("rep", 7);
  CHECK(a.key() == b.key());
  Rng ra = a.engine();
  Rng rb = b.engine();
  for (int i = 0; i < 100; ++i) CHECK(ra() == rb());
}

TEST_CASE("distinct paths give distinct keys") {
  std::set<std::uint64_t> keys;
  const SeedStream root(7);
  for (std::uint64_t run = 0; run < 50; ++run) {
    for (std::uint64_t rep = 0; rep < 50; ++rep) {
      keys.insert(root.child("run", run).child("rep", rep).key());
    }
  }
  CHECK(keys.size() == 2500);
  CHECK(root.child("a").child("b").key() != root.child("b").child("a").key());
  CHECK(SeedStream(1).child("x").key() != SeedStream(2).child("x").key());
  // label and index are not interchangeable
  CHECK(root.child("n", 12).key() != root.child("n1", 2).key());
}

TEST_CASE("sibling streams are uncorrelated") {
  Rng a = SeedStream(5).child("rep", 0).engine();
  Rng b = SeedStream(5).child("rep", 1).engine();
  std::normal_distribution<double> z;
  const int n = 20000;
  double sab = 0.0;
  for (int i = 0; i < n; ++i) sab += z(a) * z(b);
  CHECK(std::abs(sab / n) < 4.0 / std::sqrt(n));
}

TEST_CASE("describe shows the path") {
  CHECK(SeedStream(42).child("run", 3).child("eval", 7).describe() == "42/run:3/eval:7");
}

TEST_CASE("gauss-hermite rule integrates normal moments") {
  const QuadratureRule& rule = gauss_hermite_normal(64);
  double m0 = 0.0, m2 = 0.0, m4 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    m0 += rule.weights[i];
    m1 += rule.weights[i] * z;
    m2 += rule.weights[i] * z * z;
    m4 += rule.weights[i] * z * z * z * z;
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m1) < 1e-12);
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("nelder-mead minimises the rosenbrock function") {
  auto rosen = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions options;
  options.max_iterations = 5000;
  const NelderMeadResult r = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, options);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.value < 1e-8);
}

TEST_CASE("logistic is stable in both tails") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) >= 0.0);
  CHECK(logistic(-30.0) == doctest::Approx(std::exp(-30.0)).epsilon(1e-10));
}
