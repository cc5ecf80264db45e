#pragma once

#include "tebounds/data.hpp"
#include "tebounds/kernel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tebounds {

/// Y_d = mu_d + X beta_d + (phi_d + X gamma_d) U_d,  D = 1(X alpha >= V),
/// X = 2 Xtilde - 1 with Xtilde ~ U(0, 1).
struct DgpSpec {
  double mu1 = 0.0, mu0 = 0.0;
  double beta1 = 1.0, beta0 = 0.9;
  double phi1 = 1.0, phi0 = 1.0;
  double gamma1 = 1.0, gamma0 = 0.9;
  double alpha = 1.0;
  Index n = 500;

  /// Throws unless phi + x gamma >= 0 on [-1, 1] for both arms.
  void validate() const;
  /// True when a scale function hits 0 at an endpoint of [-1, 1].
  bool scale_on_boundary() const;
};

ObservationTable draw_sample(const DgpSpec& spec, std::uint64_t seed);

/// (2 Phi(delta / 2) - 1) 1(delta >= 0).
Eigen::VectorXd null_lower_curve(const Eigen::VectorXd& delta_grid);

double normal_cdf(double z);

/// Makarov interval of the DGP at covariate value x, from exact normal CDFs
/// scanned on a fine outcome grid.
std::pair<double, double> true_makarov_interval(const DgpSpec& spec, double x, double delta,
                                                Index points = 20001);

struct McScenario {
  std::string label;
  double mu1 = 0.0;
  double mu0 = 0.0;
};

std::vector<McScenario> default_scenarios();

struct Table1Options {
  Index reps = 500;
  Index n = 500;
  Index m_boot = 500;
  double alpha = 0.05;
  std::vector<double> c_values{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<TuningRate> rates{TuningRate::loglog, TuningRate::sqrtlog, TuningRate::power16};
  std::vector<McScenario> scenarios = default_scenarios();
  std::uint64_t base_seed = 20240101;
  Index m_y = 401;
  Index m_delta = 201;
  double pad = 0.1;
  /// Extra (m_y, m_delta) pairs rerun for the first scenario as a grid
  /// sensitivity check.
  std::vector<std::pair<Index, Index>> sensitivity_grids;
  KernelFamily kernel = KernelFamily::epanechnikov;
  std::size_t workers = 0;
};

struct McCell {
  double c = 0.0;
  TuningRate rate = TuningRate::loglog;
  std::string scenario;
  Index m_y = 0;
  Index m_delta = 0;
  Index rejections = 0;
  Index valid_reps = 0;
  double rejection_rate() const {
    return valid_reps > 0 ? static_cast<double>(rejections) / static_cast<double>(valid_reps) : 0.0;
  }
};

struct McReport {
  Table1Options options;
  std::vector<McCell> cells;
  std::vector<std::vector<std::uint64_t>> seeds;  // per scenario, per replication
  Index failed_reps = 0;

  const McCell& cell(double c, TuningRate rate, const std::string& scenario) const;
  /// Rows c, column groups rate x scenario, primary grid only.
  void write_csv(std::ostream& out) const;
  std::string to_json() const;
};

McReport run_table1(const Table1Options& opt);

struct CoverageOptions {
  Index reps = 200;
  DgpSpec dgp;
  Index m_boot = 500;
  double alpha = 0.05;
  double c = 0.2;
  TuningRate rate = TuningRate::loglog;
  std::vector<double> deltas{0.0, 1.0, 2.0};
  std::uint64_t base_seed = 7;
  Index m_y = 401;
  Index m_delta = 201;
  std::size_t workers = 0;
};

struct CoverageReport {
  std::vector<double> deltas;
  std::vector<Index> covered;  // per delta
  Index joint_covered = 0;
  Index reps = 0;
  double rate(std::size_t i) const { return static_cast<double>(covered[i]) / static_cast<double>(reps); }
};

/// Share of replications whose identified-set CI contains the true Makarov
/// interval at the sample-median covariate value.
CoverageReport run_coverage(const CoverageOptions& opt);

}  // namespace tebounds
