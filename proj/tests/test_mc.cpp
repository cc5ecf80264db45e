#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tebounds/error.hpp"
#include "tebounds/mc_sim.hpp"

#include <cmath>
#include <sstream>

using namespace tebounds;

TEST_CASE("sample draws") {
  DgpSpec s;
  s.n = 100000;
  const auto t = draw_sample(s, 1);
  CHECK(t.size() == 100000);
  CHECK(std::abs(t.d().cast<double>().mean() - 0.5) < 0.02);
  CHECK(t.x().minCoeff() >= -1.0);
  CHECK(t.x().maxCoeff() <= 1.0);

  s.n = 300;
  const auto a = draw_sample(s, 5);
  const auto b = draw_sample(s, 5);
  CHECK(a.y() == b.y());
  CHECK(a.d() == b.d());
  CHECK(a.x() == b.x());
  CHECK(a.y() != draw_sample(s, 6).y());

  SUBCASE("zeroed index and scale") {
    DgpSpec z;
    z.n = 200;
    z.beta1 = z.beta0 = z.gamma1 = z.gamma0 = 0.0;
    z.phi1 = z.phi0 = 0.0;
    z.mu1 = 2.0;
    z.mu0 = -1.0;
    const auto t0 = draw_sample(z, 3);
    for (Index i = 0; i < t0.size(); ++i) CHECK(t0.y()(i) == (t0.d()(i) ? 2.0 : -1.0));
  }
}

TEST_CASE("specification checks") {
  DgpSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.scale_on_boundary());  // 1 + x at x = -1
  s.gamma1 = 0.5;
  s.gamma0 = 0.5;
  CHECK_FALSE(s.scale_on_boundary());
  s.gamma1 = 2.0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(2 * normal_cdf(1.0) - 1 == doctest::Approx(0.6826894921370859).epsilon(1e-14));
  Eigen::VectorXd d(4);
  d << -1.0, 0.0, 2.0, 4.0;
  const auto n = null_lower_curve(d);
  CHECK(n(0) == 0.0);
  CHECK(n(1) == 0.0);
  CHECK(n(2) == doctest::Approx(0.6826894921370859));
  CHECK(n(3) == doctest::Approx(2 * normal_cdf(2.0) - 1));
}

TEST_CASE("true Makarov interval at x = 0 has the closed form") {
  // both arms N(0, 1) at x = 0
  DgpSpec s;
  for (const double delta : {-2.0, -0.5, 0.0, 1.0, 2.0, 3.0}) {
    const auto iv = true_makarov_interval(s, 0.0, delta);
    const double lo = delta >= 0 ? 2 * normal_cdf(delta / 2) - 1 : 0.0;
    const double hi = delta <= 0 ? 2 * normal_cdf(delta / 2) : 1.0;
    CHECK(iv.first == doctest::Approx(lo).epsilon(1e-5));
    CHECK(iv.second == doctest::Approx(hi).epsilon(1e-5));
  }
  // shifted means move the interval
  s.mu1 = 1.0;
  const auto iv = true_makarov_interval(s, 0.0, 1.0);
  CHECK(iv.first == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(iv.second == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("small size and power run") {
  Table1Options o;
  o.reps = 50;
  o.n = 300;
  o.m_boot = 100;
  o.c_values = {0.2, 0.5};
  o.rates = {TuningRate::loglog};
  o.m_y = 81;
  o.m_delta = 41;
  const auto r = run_table1(o);
  CHECK(r.cells.size() == 2 * 1 * 3);
  CHECK(r.seeds.size() == 3);
  CHECK(r.seeds[0].size() == 50);
  const auto& c = r.cell(0.2, TuningRate::loglog, "mu=-1");
  CHECK(c.valid_reps + r.failed_reps >= 50);
  CHECK(c.rejection_rate() >= 0.0);
  CHECK(c.rejection_rate() <= 1.0);
  CHECK(r.cell(0.2, TuningRate::loglog, "mu=-1").rejection_rate() > 0.8);

  std::ostringstream csv;
  r.write_csv(csv);
  CHECK(csv.str().rfind("c,", 0) == 0);
  CHECK(r.to_json().find("seeds") != std::string::npos);

  o.workers = 1;
  const auto again = run_table1(o);
  for (std::size_t i = 0; i < r.cells.size(); ++i) CHECK(again.cells[i].rejections == r.cells[i].rejections);

  o.reps = 10;
  CHECK_THROWS_AS(run_table1(o), Error);
}
