#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "tebounds/error.hpp"

#include <sstream>

using namespace tebounds;

namespace {

std::string code_of(const std::string& csv) {
  std::istringstream in(csv);
  ColumnMap cols;
  cols.x = {"x"};
  try {
    parse_csv(in, cols);
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

}  // namespace

TEST_CASE("three-row file parses") {
  std::istringstream in("y,d,x\n1,1,0\n2,1,0\n3,0,0\n");
  ColumnMap cols;
  cols.x = {"x"};
  const auto t = parse_csv(in, cols);
  CHECK(t.size() == 3);
  CHECK(t.dim() == 1);
  CHECK(t.y()(2) == 3.0);
  CHECK(t.d()(2) == 0);
}

TEST_CASE("validation errors") {
  CHECK(code_of("y,d,x\n1,2,0\n2,0,0\n3,1,0\n") == "non_binary_treatment");
  CHECK(code_of("y,d,x\n1,1,0\n") == "insufficient_sample");
  CHECK(code_of("") == "insufficient_sample");
  CHECK(code_of("y,t,x\n1,1,0\n2,0,0\n") == "missing_column");
  CHECK(code_of("y,d,x\n1,1,abc\n2,0,0\n") == "non_numeric_cell");
  CHECK(code_of("y,d,x\n1,1,0\n2,1,0\n") == "single_arm");
}

TEST_CASE("missing cells drop the row and are counted") {
  std::istringstream in("y,d,x\n1,1,0\nNA,0,0\n2,0,\n3,0,1\n4,1,2\n");
  ColumnMap cols;
  cols.x = {"x"};
  LoadReport rep;
  const auto t = parse_csv(in, cols, &rep);
  CHECK(t.size() == 3);
  CHECK(rep.rows_read == 5);
  CHECK(rep.rows_dropped == 2);
}

TEST_CASE("columns are found by name in any order") {
  std::istringstream in("x2,out,treat,x1\n5,1.5,1,0.1\n6,2.5,0,0.2\n");
  ColumnMap cols{"out", "treat", {"x1", "x2"}};
  const auto t = parse_csv(in, cols);
  CHECK(t.x()(1, 0) == doctest::Approx(0.2));
  CHECK(t.x()(1, 1) == 6.0);
  CHECK(t.y()(0) == 1.5);
}

TEST_CASE("write then parse round-trips exactly") {
  std::mt19937_64 rng(3);
  const auto t = testing::random_sample(rng, 40, 2);
  ColumnMap cols{"y", "d", {"x", "x2"}};
  std::stringstream buf;
  write_csv(buf, t, cols);
  const auto back = parse_csv(buf, cols);
  CHECK(back.y() == t.y());
  CHECK(back.d() == t.d());
  CHECK(back.x() == t.x());
}

TEST_CASE("grid construction") {
  Eigen::VectorXd y(3);
  y << 0.0, 0.3, 1.0;
  Eigen::VectorXi d(3);
  d << 1, 0, 1;
  const ObservationTable t(y, d, Eigen::MatrixXd::Zero(3, 1));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);

  SUBCASE("equal spacing, no pad") {
    const auto g = make_grids(t, x0, 3, 5, 0.0);
    CHECK(g.y_grid(0) == 0.0);
    CHECK(g.y_grid(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.y_grid(2) == 1.0);
    CHECK(g.delta_grid(0) == doctest::Approx(-1.0));
    CHECK(g.delta_grid(4) == doctest::Approx(1.0));
  }
  SUBCASE("padded range") {
    Eigen::VectorXd y2(2);
    y2 << -2.0, 2.0;
    Eigen::VectorXi d2(2);
    d2 << 0, 1;
    const ObservationTable t2(y2, d2, Eigen::MatrixXd::Zero(2, 1));
    const auto g = make_grids(t2, x0, 5, 3, 0.1);
    const double expect[] = {-2.4, -1.2, 0.0, 1.2, 2.4};
    for (int k = 0; k < 5; ++k) CHECK(g.y_grid(k) == doctest::Approx(expect[k]).epsilon(1e-14));
    CHECK(g.delta_grid(2) == doctest::Approx(4.8));
  }
  SUBCASE("strictly increasing and deterministic") {
    const auto a = make_grids(t, x0, 101, 51, 0.2);
    const auto b = make_grids(t, x0, 101, 51, 0.2);
    CHECK(a.y_grid == b.y_grid);
    for (Index k = 1; k < a.y_grid.size(); ++k) CHECK(a.y_grid(k) > a.y_grid(k - 1));
    CHECK(a.y_grid(0) <= y.minCoeff());
    CHECK(a.y_grid(100) >= y.maxCoeff());
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(make_grids(t, x0, 2, 5, 0.0), Error);
    CHECK_THROWS_AS(make_grids(t, x0, 5, 5, -0.1), Error);
    CHECK_THROWS_AS(make_grids(t, Eigen::VectorXd::Zero(2), 5, 5, 0.0), Error);
    const ObservationTable flat(Eigen::VectorXd::Constant(3, 2.0), d, Eigen::MatrixXd::Zero(3, 1));
    try {
      make_grids(flat, x0, 5, 5, 0.0);
      FAIL("expected degenerate outcome");
    } catch (const Error& e) {
      CHECK(e.code() == "degenerate_outcome");
    }
  }
}

TEST_CASE("covariate quantile follows the interpolation rule") {
  // numpy.quantile reference values for x = (3, -1, 2.5, 0, 7, 4)
  Eigen::MatrixXd x(6, 1);
  x << 3.0, -1.0, 2.5, 0.0, 7.0, 4.0;
  Eigen::VectorXi d(6);
  d << 1, 0, 1, 0, 1, 0;
  const ObservationTable t(Eigen::VectorXd::LinSpaced(6, 0, 1), d, x);
  CHECK(covariate_quantile(t, 0, 0.2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(covariate_quantile(t, 0, 0.5) == doctest::Approx(2.75));
  CHECK(covariate_quantile(t, 0, 0.9) == doctest::Approx(5.5));
  CHECK(covariate_quantile(t, 0, 0.0) == -1.0);
  CHECK(covariate_quantile(t, 0, 1.0) == 7.0);
}
