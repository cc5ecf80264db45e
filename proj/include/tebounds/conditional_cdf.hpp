#pragma once

#include "tebounds/data.hpp"
#include "tebounds/kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <memory>
#include <vector>

namespace tebounds {

/// Locates t on a strictly increasing grid. Returns the left node index and
/// the linear weight of the right node; index -1 / size-1 flag the tails.
struct GridStencil {
  Index left;
  double weight;
};

template <typename Derived>
GridStencil locate(const Eigen::DenseBase<Derived>& grid, double t) {
  const Index m = grid.size();
  if (t < grid(0)) return {-1, 0.0};
  if (t > grid(m - 1)) return {m - 1, 0.0};
  if (t == grid(m - 1)) return {m - 2, 1.0};
  const auto* first = grid.derived().data();
  const auto* it = std::upper_bound(first, first + m, t);
  const Index right = static_cast<Index>(it - first);
  const Index left = right - 1;
  return {left, (t - grid(left)) / (grid(right) - grid(left))};
}

/// Value of a grid function at a stencil; `below` / `above` extend the tails.
template <typename Derived>
typename Derived::Scalar evaluate(const Eigen::DenseBase<Derived>& values, const GridStencil& s,
                                  typename Derived::Scalar below, typename Derived::Scalar above) {
  const Index m = values.size();
  if (s.left < 0) return below;
  if (s.left >= m - 1) return above;
  return values(s.left) + s.weight * (values(s.left + 1) - values(s.left));
}

/// Monotone CDF on a shared outcome grid. Linear between nodes, 0 left of the
/// grid and 1 right of it.
class CdfCurve {
 public:
  CdfCurve() = default;
  CdfCurve(std::shared_ptr<const Eigen::VectorXd> grid, Eigen::VectorXd values);

  double operator()(double y) const;

  const Eigen::VectorXd& grid() const { return *grid_; }
  const std::shared_ptr<const Eigen::VectorXd>& shared_grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  Index size() const { return values_.size(); }

  /// Nondecreasing with every value in [0, 1] (up to `slack`).
  bool is_valid_cdf(double slack = 1e-12) const;

 private:
  std::shared_ptr<const Eigen::VectorXd> grid_;
  Eigen::VectorXd values_;
};

/// Per-observation influence values psi_i(y_grid). Only rows with positive
/// kernel weight are stored; all other rows are identically zero.
struct InfluenceTable {
  Index n = 0;
  std::vector<Index> rows;
  Eigen::MatrixXd values;  // rows.size() x M_y

  Eigen::RowVectorXd column_sums() const { return values.colwise().sum(); }
  /// Full n x M_y matrix.
  Eigen::MatrixXd dense() const;
};

struct LocalDiagnostics {
  double local_propensity = 0.0;
  double effective_n1 = 0.0;
  double effective_n0 = 0.0;
  bool propensity_warning = false;
};

struct UnconfoundedEstimate {
  CdfCurve f1;
  CdfCurve f0;
  InfluenceTable psi1;
  InfluenceTable psi0;
  LocalDiagnostics diag;
};

/// Arm-specific and pooled local CDFs plus the kernel means
/// m1(y) = E[1(Y<=y) D | x], m0(y) = E[1(Y<=y)(1-D) | x] and the local
/// propensity, which together span every marginal-bound regime.
struct EndogenousEstimate {
  CdfCurve f11;
  CdfCurve f00;
  CdfCurve fy;
  InfluenceTable psi11;
  InfluenceTable psi00;
  InfluenceTable psiy;
  CdfCurve m1;
  CdfCurve m0;
  InfluenceTable psi_m1;
  InfluenceTable psi_m0;
  Eigen::VectorXd psi_p;  // aligned with psi11.rows
  LocalDiagnostics diag;
};

inline constexpr double kDefaultTrim = 0.01;

UnconfoundedEstimate estimate_cdf_unconfounded(const ObservationTable& table, const EvalGrids& grids,
                                               const KernelSpec& kernel, double h,
                                               double trim = kDefaultTrim);

EndogenousEstimate estimate_cdf_endogenous(const ObservationTable& table, const EvalGrids& grids,
                                           const KernelSpec& kernel, double h,
                                           double trim = kDefaultTrim);

/// Logit propensity p(x; theta) = 1 / (1 + exp(-(theta_0 + x' theta_1))).
struct PropensityModel {
  Eigen::VectorXd theta;  // length d_x + 1, intercept first
  bool fitted = false;
  int iterations = 0;

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

/// Damped-Newton maximum likelihood; stops when the sup-norm of the mean
/// score drops below 1e-8 or after 100 iterations.
PropensityModel fit_propensity(const ObservationTable& table);

struct SubsetEstimate {
  CdfCurve f1;  // clipped to [0,1] and running-max monotonized
  CdfCurve f0;
  Eigen::VectorXd raw_f1;
  Eigen::VectorXd raw_f0;
  InfluenceTable psi11;
  InfluenceTable psi10;
  Index flagged_rows = 0;  // weighted rows with fitted propensity outside [trim, 1-trim]
  double kernel_mass = 0.0;
};

/// Inverse-propensity-weighted local CDFs on the covariate subset
/// `sub_index`; `sub_grids.x0` lives in that subset.
SubsetEstimate estimate_cdf_subset(const ObservationTable& table, const EvalGrids& sub_grids,
                                   const std::vector<Index>& sub_index, const PropensityModel& model,
                                   const KernelSpec& kernel, double h1, double trim = kDefaultTrim);

}  // namespace tebounds
