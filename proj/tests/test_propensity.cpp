#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tebounds/conditional_cdf.hpp"
#include "tebounds/error.hpp"

#include <cmath>
#include <random>

using namespace tebounds;

namespace {

ObservationTable logit_sample(Index n, double a, double b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd y(n);
  Eigen::VectorXi d(n);
  Eigen::MatrixXd x(n, 1);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = z(rng);
    const double p = 1.0 / (1.0 + std::exp(-(a + b * x(i, 0))));
    d(i) = u(rng) < p ? 1 : 0;
    y(i) = z(rng);
  }
  return ObservationTable(y, d, x);
}

}  // namespace

TEST_CASE("independent treatment gives a flat fit") {
  const auto t = logit_sample(100000, 0.0, 0.0, 1);
  const auto m = fit_propensity(t);
  CHECK(m.fitted);
  CHECK(std::abs(m.theta(0)) < 0.05);
  CHECK(std::abs(m.theta(1)) < 0.05);
}

TEST_CASE("recovers the generating index") {
  const auto t = logit_sample(10000, 0.0, 1.0, 2);
  const auto m = fit_propensity(t);
  CHECK(std::abs(m.theta(0)) < 0.1);
  CHECK(std::abs(m.theta(1) - 1.0) < 0.1);
  const Eigen::VectorXd p = m.predict(t.x());
  CHECK(p.minCoeff() > 0.0);
  CHECK(p.maxCoeff() < 1.0);
  CHECK(m(t.x().row(3).transpose()) == doctest::Approx(p(3)));
}

TEST_CASE("score vanishes at the optimum") {
  const auto t = logit_sample(2000, -0.5, 0.7, 3);
  const auto m = fit_propensity(t);
  const Eigen::VectorXd p = m.predict(t.x());
  const Eigen::VectorXd r = t.d().cast<double>() - p;
  CHECK(std::abs(r.mean()) < 1e-8);
  CHECK(std::abs(r.dot(t.x().col(0)) / 2000.0) < 1e-8);
}

TEST_CASE("perfect separation is an error") {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(50, 0, 1);
  Eigen::VectorXi d(50);
  Eigen::MatrixXd x(50, 1);
  for (Index i = 0; i < 50; ++i) {
    x(i, 0) = -1.0 + 2.0 * i / 49.0;
    d(i) = x(i, 0) > 0.0 ? 1 : 0;
  }
  try {
    fit_propensity(ObservationTable(y, d, x));
    FAIL("expected separation");
  } catch (const Error& e) {
    CHECK(e.code() == "perfect_separation");
  }
}
