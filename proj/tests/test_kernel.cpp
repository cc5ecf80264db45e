#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tebounds/error.hpp"
#include "tebounds/kernel.hpp"

#include <cmath>

using namespace tebounds;

TEST_CASE("kernel values") {
  const KernelSpec k1(KernelFamily::epanechnikov, 1);
  const KernelSpec k2(KernelFamily::epanechnikov, 2);
  CHECK(k1(Eigen::VectorXd::Zero(1)) == 0.75);
  CHECK(k1(Eigen::VectorXd::Constant(1, 2.0)) == 0.0);
  CHECK(k1(Eigen::VectorXd::Constant(1, 1.0)) == 0.0);
  CHECK(k2(Eigen::VectorXd::Zero(2)) == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK_THROWS_AS(k2(Eigen::VectorXd::Zero(1)), Error);
}

TEST_CASE("moments by quadrature, symmetry") {
  // second moments 1/5, 1/7, 1/9 (scipy.integrate.quad)
  const double k2[] = {0.2, 1.0 / 7.0, 1.0 / 9.0};
  int i = 0;
  for (const auto fam : {KernelFamily::epanechnikov, KernelFamily::biweight, KernelFamily::triweight}) {
    const auto m = kernel_moments(fam);
    CHECK(m.mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(m.first) < 1e-12);
    CHECK(m.second == doctest::Approx(k2[i]).epsilon(1e-6));
    CHECK(KernelSpec(fam).second_moment() == doctest::Approx(k2[i]).epsilon(1e-6));
    for (double u = -1.2; u <= 1.2; u += 0.05) {
      CHECK(univariate_kernel(fam, u) == univariate_kernel(fam, -u));
      CHECK(univariate_kernel(fam, u) >= 0.0);
    }
    CHECK(parse_kernel_family(to_string(fam)) == fam);
    ++i;
  }
  CHECK_THROWS_AS(parse_kernel_family("gaussian"), Error);
}

TEST_CASE("kernel weights scale with the bandwidth") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 0.1, 0.3, -0.25;
  const auto w = kernel_weights(KernelSpec(), x, Eigen::VectorXd::Zero(1), 0.2);
  CHECK(w(0) == 0.75);
  CHECK(w(1) == doctest::Approx(0.75 * (1 - 0.25)));
  CHECK(w(2) == 0.0);
  CHECK(w(3) == 0.0);
  CHECK_THROWS_AS(kernel_weights(KernelSpec(), x, Eigen::VectorXd::Zero(1), 0.0), Error);
}

TEST_CASE("bandwidth rules") {
  SUBCASE("mc_rule on a covariate with known sd") {
    // two-point design with sample sd exactly s: values +-a with a = s sqrt((n-1)/n)
    const Index n = 500;
    const double s = 0.5774;
    const double a = s * std::sqrt((n - 1.0) / n);
    Eigen::MatrixXd x(n, 1);
    for (Index i = 0; i < n; ++i) x(i, 0) = i % 2 ? a : -a;
    // 1.06 * 0.5774 * 500^(-1/6) = 0.217247...
    CHECK(bandwidth({BandwidthKind::mc_rule, 0.0}, x) == doctest::Approx(0.21724726153834387).epsilon(1e-12));
  }
  SUBCASE("app_rule") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(9712, 1);
    CHECK(bandwidth({BandwidthKind::app_rule, 0.0}, x) == doctest::Approx(0.22948506127298843).epsilon(1e-12));
  }
  SUBCASE("manual passthrough and errors") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    CHECK(bandwidth(parse_bandwidth_rule("manual", 0.3), x) == 0.3);
    CHECK_THROWS_AS(bandwidth({BandwidthKind::mc_rule, 0.0}, x), Error);
    CHECK_THROWS_AS(parse_bandwidth_rule("manual", 0.0), Error);
  }
  SUBCASE("decreasing in n") {
    double prev = 1e9;
    for (Index n : {50, 100, 500, 1000}) {
      Eigen::MatrixXd x(n, 1);
      for (Index i = 0; i < n; ++i) x(i, 0) = i % 2 ? 0.5 : -0.5;
      const double h = bandwidth({BandwidthKind::app_rule, 0.0}, x);
      CHECK(h < prev);
      prev = h;
    }
  }
}

TEST_CASE("tuning sequences") {
  // n h = 108.4; values from numpy
  const Index n = 500;
  const double h = 108.4 / 500.0;
  CHECK(tuning_a_n({TuningRate::loglog, 0.2}, n, h, 1) == doctest::Approx(0.029669843847402934).epsilon(1e-12));
  CHECK(tuning_a_n({TuningRate::sqrtlog, 0.2}, n, h, 1) == doctest::Approx(0.04158230219362083).epsilon(1e-12));
  CHECK(tuning_a_n({TuningRate::power16, 0.2}, n, h, 1) == doctest::Approx(0.041945647380543565).epsilon(1e-12));
  CHECK_THROWS_AS(tuning_a_n({TuningRate::loglog, 0.0}, n, h, 1), Error);
  CHECK_THROWS_AS(tuning_a_n({TuningRate::loglog, 0.2}, 10, 0.2, 1), Error);  // n h = 2 < e
  CHECK(rate_r_n(500, h, 1) == doctest::Approx(std::sqrt(108.4)));

  // decreasing in n h once past the threshold
  for (const auto rate : {TuningRate::loglog, TuningRate::sqrtlog, TuningRate::power16}) {
    double prev = 1e9;
    for (Index m : {100, 1000, 10000, 100000}) {
      const double a = tuning_a_n({rate, 0.2}, m, 1.0, 1);
      CHECK(a < prev);
      CHECK(a * std::sqrt(static_cast<double>(m)) > 0.0);
      prev = a;
    }
    CHECK(parse_tuning_rate(to_string(rate)) == rate);
  }
}
