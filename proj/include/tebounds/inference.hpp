#pragma once

#include "tebounds/bounds.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace tebounds {

/// Multiplier bootstrap settings. Weights are standard normal.
struct BootstrapConfig {
  Index m = 500;
  double alpha = 0.05;
  std::uint64_t seed = 20240101;
  std::size_t workers = 0;  // 0: worker_count()

  void validate() const;
};

/// One bootstrap iteration: the four curves r_n sum_i B_i psi_i(y_grid).
struct SimulatedProcess {
  std::array<Eigen::VectorXd, 4> h;
};

/// All m iterations, stored column-wise: h[c](k, b) is component c at y_k in
/// iteration b.
struct ProcessDraws {
  std::array<Eigen::MatrixXd, 4> h;

  Index iterations() const { return h[0].cols(); }
  SimulatedProcess iteration(Index b) const;
};

/// Weight vector of iteration b; a pure function of (seed, stream, b).
Eigen::VectorXd bootstrap_weights(std::uint64_t seed, std::uint64_t stream, Index b, Index n);

ProcessDraws simulate_processes(const MarginalInfluence& infl, const BootstrapConfig& cfg, double r_n,
                                std::uint64_t stream = 0);

/// Evaluates the estimated directional derivatives for many processes with
/// fixed eps-argmax sets. Interpolation stencils for y - delta are built once.
class HddEvaluator {
 public:
  HddEvaluator(const IndexSets& sets, const Eigen::VectorXd& y_grid, const Eigen::VectorXd& delta_grid);

  /// max{ max_d max_{y in L} (h1(y) - h4(y-d)), max_d min_{y in L} -(h2(y) - h3(y-d)) }
  template <class V>
  double lower(const V& h1, const V& h2, const V& h3, const V& h4) const;
  /// max{ max_d max_{y in L} -(h1(y) - h4(y-d)), max_d min_{y in L} (h2(y) - h3(y-d)) }
  template <class V>
  double upper(const V& h1, const V& h2, const V& h3, const V& h4) const;
  /// Per delta: max_{y in L} (h1(y) - h4(y-d)).
  template <class V>
  Eigen::VectorXd directional_sup(const V& h1, const V& h4) const;

 private:
  template <class V>
  double shifted(const V& h, std::size_t e) const;

  Index m_y_ = 0;
  std::vector<std::size_t> offsets_;  // per delta into the flat arrays
  std::vector<Index> node_;
  std::vector<GridStencil> stencil_;
};

double hdd_lower(const IndexSets& argsup, const SimulatedProcess& p, const EvalGrids& grids);
double hdd_upper(const IndexSets& arginf, const SimulatedProcess& p, const EvalGrids& grids);
/// Variants that first form the eps-argmax sets of the surface with eps = a_n.
double hdd_lower(const ObjectiveSurface& lower_surface, const SimulatedProcess& p, double a_n,
                 const EvalGrids& grids);
double hdd_upper(const ObjectiveSurface& upper_surface, const SimulatedProcess& p, double a_n,
                 const EvalGrids& grids);

struct HddDraws {
  std::vector<double> lower;
  std::vector<double> upper;
};

HddDraws hdd_draws(const BoundsCurve& bc, const ProcessDraws& draws, const EvalGrids& grids,
                   std::size_t workers = 0);

/// Type-7 quantile: x_(floor g) + frac(g) (x_(ceil g) - x_(floor g)), g = (m-1) prob + 1.
double empirical_quantile(std::vector<double> draws, double prob);

struct BandResult {
  double c_lower = 0.0;
  double c_upper = 0.0;
  double r_n = 0.0;
  // bands around the lower and upper bound curves
  Eigen::VectorXd lower_lo, lower_hi, upper_lo, upper_hi;
  Eigen::VectorXd raw_lower_lo, raw_lower_hi, raw_upper_lo, raw_upper_hi;
  // confidence interval for the identified set, clipped to [0, 1]
  Eigen::VectorXd idset_lo, idset_hi;
  HddDraws draws;
};

BandResult confidence_bands(const BoundsCurve& bc, const HddDraws& draws, const BootstrapConfig& cfg,
                            double r_n);
BandResult confidence_bands(const BoundsCurve& bc, const ProcessDraws& processes, const EvalGrids& grids,
                            const BootstrapConfig& cfg, double r_n);

enum class Side { lower, upper };
Side parse_side(std::string_view name);
std::string to_string(Side side);

struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  std::vector<double> bootstrap_draws;
  bool reject = false;
  double p_value = 1.0;
};

/// statistic, draws -> critical value, rejection and p-value at level alpha.
TestResult finish_test(double statistic, std::vector<double> draws, double alpha);

TestResult ks_test(const BoundsCurve& bc, const Eigen::VectorXd& null_curve, Side side,
                   const HddDraws& draws, const BootstrapConfig& cfg, double r_n);
TestResult ks_test(const BoundsCurve& bc, const Eigen::VectorXd& null_curve, Side side,
                   const ProcessDraws& processes, const EvalGrids& grids, const BootstrapConfig& cfg,
                   double r_n);

/// (trapezoid integral of |f|^p over the grid)^(1/p).
double lp_norm(const Eigen::VectorXd& f, const Eigen::VectorXd& grid, double p);

/// Two-group test of equal (unclipped) lower bounds. Each group's processes
/// must come from independent weight streams.
TestResult equality_test(const BoundsCurve& a, const BoundsCurve& b, double p, const ProcessDraws& proc_a,
                         const ProcessDraws& proc_b, const EvalGrids& grids_a, const EvalGrids& grids_b,
                         const BootstrapConfig& cfg, double r_n);

// --- template definitions

template <class V>
double HddEvaluator::shifted(const V& h, std::size_t e) const {
  const GridStencil& s = stencil_[e];
  if (s.left < 0 || s.left >= m_y_ - 1) return 0.0;
  return h(s.left) + s.weight * (h(s.left + 1) - h(s.left));
}

template <class V>
double HddEvaluator::lower(const V& h1, const V& h2, const V& h3, const V& h4) const {
  double a = -std::numeric_limits<double>::infinity();
  double b = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < offsets_.size(); ++j) {
    double inner = std::numeric_limits<double>::infinity();
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) {
      const Index k = node_[e];
      a = std::max(a, h1(k) - shifted(h4, e));
      inner = std::min(inner, -(h2(k) - shifted(h3, e)));
    }
    b = std::max(b, inner);
  }
  return std::max(a, b);
}

template <class V>
double HddEvaluator::upper(const V& h1, const V& h2, const V& h3, const V& h4) const {
  double a = -std::numeric_limits<double>::infinity();
  double b = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < offsets_.size(); ++j) {
    double inner = std::numeric_limits<double>::infinity();
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) {
      const Index k = node_[e];
      a = std::max(a, -(h1(k) - shifted(h4, e)));
      inner = std::min(inner, h2(k) - shifted(h3, e));
    }
    b = std::max(b, inner);
  }
  return std::max(a, b);
}

template <class V>
Eigen::VectorXd HddEvaluator::directional_sup(const V& h1, const V& h4) const {
  Eigen::VectorXd out(static_cast<Index>(offsets_.size()) - 1);
  for (std::size_t j = 0; j + 1 < offsets_.size(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) {
      best = std::max(best, h1(node_[e]) - shifted(h4, e));
    }
    out(static_cast<Index>(j)) = best;
  }
  return out;
}

}  // namespace tebounds
