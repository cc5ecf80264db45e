#pragma once

#include "tebounds/bounds.hpp"
#include "tebounds/mc_sim.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

namespace testing {

using namespace tebounds;

inline std::shared_ptr<const Eigen::VectorXd> share(const Eigen::VectorXd& g) {
  return std::make_shared<const Eigen::VectorXd>(g);
}

// Standard-normal CDF sampled on the grid.
inline CdfCurve normal_curve(const std::shared_ptr<const Eigen::VectorXd>& grid, double mean = 0.0,
                             double sd = 1.0) {
  return CdfCurve(grid, grid->unaryExpr([&](double y) { return normal_cdf((y - mean) / sd); }));
}

inline EvalGrids grids_of(const Eigen::VectorXd& y, const Eigen::VectorXd& delta) {
  EvalGrids g;
  g.y_grid = y;
  g.delta_grid = delta;
  g.x0 = Eigen::VectorXd::Zero(1);
  return g;
}

inline MarginalBounds point_bounds(const CdfCurve& f1, const CdfCurve& f0) {
  MarginalInputs in;
  in.f1 = f1;
  in.f0 = f0;
  return assemble_marginal_bounds(Regime::point_id, in);
}

// Random sample with a covariate, a selection rule and continuous outcomes.
inline ObservationTable random_sample(std::mt19937_64& rng, Index n, Index dims = 1) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd y(n);
  Eigen::VectorXi d(n);
  Eigen::MatrixXd x(n, dims);
  const double shift = 2.0 * u(rng);
  const double slope = u(rng);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < dims; ++j) x(i, j) = u(rng);
    d(i) = (0.8 * x(i, 0) + 0.5 * z(rng) > 0.0) ? 1 : 0;
    y(i) = (d(i) ? shift : 0.0) + slope * x(i, 0) + (1.0 + 0.5 * d(i)) * z(rng);
  }
  d(0) = 1;
  d(1) = 0;
  return ObservationTable(y, d, x);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tebounds_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_table(const std::filesystem::path& p, const ObservationTable& t) {
  std::ofstream out(p);
  ColumnMap cols;
  for (Index j = 0; j < t.dim(); ++j) cols.x.push_back(j == 0 ? "x" : "x" + std::to_string(j + 1));
  write_csv(out, t, cols);
}

}  // namespace testing
