#include "tebounds/conditional_cdf.hpp"

#include "tebounds/error.hpp"

#include <cmath>
#include <numeric>

namespace tebounds {

CdfCurve::CdfCurve(std::shared_ptr<const Eigen::VectorXd> grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_ || grid_->size() != values_.size()) {
    throw Error("dimension_mismatch", "CDF values must match the outcome grid");
  }
}

double CdfCurve::operator()(double y) const {
  return evaluate(values_, locate(*grid_, y), 0.0, 1.0);
}

bool CdfCurve::is_valid_cdf(double slack) const {
  for (Index k = 0; k < values_.size(); ++k) {
    if (values_(k) < -slack || values_(k) > 1.0 + slack) return false;
    if (k > 0 && values_(k) < values_(k - 1) - slack) return false;
  }
  return true;
}

Eigen::MatrixXd InfluenceTable::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(rows[r]) = values.row(static_cast<Index>(r));
  return out;
}

namespace {

struct LocalMean {
  Eigen::VectorXd values;
  InfluenceTable influence;
  double mass = 0.0;
};

// F(y_k) = sum_r c_r w_r 1(y_r <= y_k) / sum_r w_r with influence
// (c_r 1(y_r <= y_k) - F(y_k)) w_r / sum_r w_r over the supplied rows.
LocalMean local_mean(const std::vector<Index>& rows, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& coef, const Eigen::VectorXd& weight,
                     const Eigen::VectorXd& grid, Index n) {
  const auto count = static_cast<Index>(rows.size());
  std::vector<Index> order(rows.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return y(rows[a]) < y(rows[b]); });

  double mass = 0.0;
  for (const auto r : order) mass += weight(r);

  LocalMean out;
  out.mass = mass;
  out.values.resize(grid.size());
  double running = 0.0;
  std::size_t next = 0;
  for (Index k = 0; k < grid.size(); ++k) {
    while (next < order.size() && y(rows[order[next]]) <= grid(k)) {
      running += coef(order[next]) * weight(order[next]);
      ++next;
    }
    out.values(k) = mass > 0.0 ? running / mass : 0.0;
  }

  out.influence.n = n;
  out.influence.rows = rows;
  out.influence.values.resize(count, grid.size());
  if (mass > 0.0) {
    for (Index k = 0; k < grid.size(); ++k) {
      const double g = grid(k);
      const double f = out.values(k);
      for (Index r = 0; r < count; ++r) {
        const double indicator = y(rows[static_cast<std::size_t>(r)]) <= g ? coef(r) : 0.0;
        out.influence.values(r, k) = (indicator - f) * weight(r) / mass;
      }
    }
  } else {
    out.influence.values.setZero();
  }
  return out;
}

std::vector<Index> positive_rows(const Eigen::VectorXd& w) {
  std::vector<Index> rows;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) rows.push_back(i);
  }
  return rows;
}

struct ArmWeights {
  std::vector<Index> rows;
  Eigen::VectorXd w;        // kernel weight per active row
  Eigen::VectorXd treated;  // D per active row
  double mass1 = 0.0;
  double mass0 = 0.0;
};

ArmWeights arm_weights(const ObservationTable& table, const EvalGrids& grids, const KernelSpec& kernel,
                       double h) {
  const Eigen::VectorXd all = kernel_weights(kernel, table.x(), grids.x0, h);
  ArmWeights a;
  a.rows = positive_rows(all);
  const auto count = static_cast<Index>(a.rows.size());
  a.w.resize(count);
  a.treated.resize(count);
  for (Index r = 0; r < count; ++r) {
    const Index i = a.rows[static_cast<std::size_t>(r)];
    a.w(r) = all(i);
    a.treated(r) = table.d()(i);
    (table.d()(i) == 1 ? a.mass1 : a.mass0) += all(i);
  }
  if (!(a.mass1 > 0.0) || !(a.mass0 > 0.0)) {
    throw Error("empty_local_arm",
                "empty local arm: no treated or no control observation carries kernel weight at x0");
  }
  return a;
}

LocalDiagnostics diagnostics(const ArmWeights& a, double trim) {
  LocalDiagnostics d;
  d.effective_n1 = a.mass1;
  d.effective_n0 = a.mass0;
  d.local_propensity = a.mass1 / (a.mass1 + a.mass0);
  d.propensity_warning = d.local_propensity < trim || d.local_propensity > 1.0 - trim;
  return d;
}

}  // namespace

UnconfoundedEstimate estimate_cdf_unconfounded(const ObservationTable& table, const EvalGrids& grids,
                                               const KernelSpec& kernel, double h, double trim) {
  const ArmWeights a = arm_weights(table, grids, kernel, h);
  const auto grid = std::make_shared<const Eigen::VectorXd>(grids.y_grid);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(a.w.size());
  const Eigen::VectorXd w1 = a.w.cwiseProduct(a.treated);
  const Eigen::VectorXd w0 = a.w - w1;

  auto m1 = local_mean(a.rows, table.y(), ones, w1, grids.y_grid, table.size());
  auto m0 = local_mean(a.rows, table.y(), ones, w0, grids.y_grid, table.size());
  return UnconfoundedEstimate{CdfCurve(grid, std::move(m1.values)),
                              CdfCurve(grid, std::move(m0.values)), std::move(m1.influence),
                              std::move(m0.influence), diagnostics(a, trim)};
}

EndogenousEstimate estimate_cdf_endogenous(const ObservationTable& table, const EvalGrids& grids,
                                           const KernelSpec& kernel, double h, double trim) {
  const ArmWeights a = arm_weights(table, grids, kernel, h);
  const auto grid = std::make_shared<const Eigen::VectorXd>(grids.y_grid);
  const auto n = table.size();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(a.w.size());
  const Eigen::VectorXd control = ones - a.treated;
  const Eigen::VectorXd w1 = a.w.cwiseProduct(a.treated);
  const Eigen::VectorXd w0 = a.w - w1;

  auto f11 = local_mean(a.rows, table.y(), ones, w1, grids.y_grid, n);
  auto f00 = local_mean(a.rows, table.y(), ones, w0, grids.y_grid, n);
  auto fy = local_mean(a.rows, table.y(), ones, a.w, grids.y_grid, n);
  auto m1 = local_mean(a.rows, table.y(), a.treated, a.w, grids.y_grid, n);
  auto m0 = local_mean(a.rows, table.y(), control, a.w, grids.y_grid, n);

  EndogenousEstimate e;
  e.diag = diagnostics(a, trim);
  const double total = fy.mass;
  e.psi_p = (a.treated.array() - e.diag.local_propensity).matrix().cwiseProduct(a.w) / total;
  e.f11 = CdfCurve(grid, std::move(f11.values));
  e.f00 = CdfCurve(grid, std::move(f00.values));
  e.fy = CdfCurve(grid, std::move(fy.values));
  e.m1 = CdfCurve(grid, std::move(m1.values));
  e.m0 = CdfCurve(grid, std::move(m0.values));
  e.psi11 = std::move(f11.influence);
  e.psi00 = std::move(f00.influence);
  e.psiy = std::move(fy.influence);
  e.psi_m1 = std::move(m1.influence);
  e.psi_m0 = std::move(m0.influence);
  return e;
}

SubsetEstimate estimate_cdf_subset(const ObservationTable& table, const EvalGrids& sub_grids,
                                   const std::vector<Index>& sub_index, const PropensityModel& model,
                                   const KernelSpec& kernel, double h1, double trim) {
  if (!model.fitted) throw Error("invalid_argument", "propensity model is not fitted");
  if (model.theta.size() != table.dim() + 1) {
    throw Error("dimension_mismatch", "propensity model does not match the covariates");
  }
  const ObservationTable sub = table.project(sub_index);
  const Eigen::VectorXd all = kernel_weights(kernel, sub.x(), sub_grids.x0, h1);
  const std::vector<Index> rows = positive_rows(all);
  if (rows.empty()) throw Error("empty_local_arm", "zero kernel mass at x1");

  const auto count = static_cast<Index>(rows.size());
  Eigen::VectorXd w(count), c1(count), c0(count);
  SubsetEstimate out;
  for (Index r = 0; r < count; ++r) {
    const Index i = rows[static_cast<std::size_t>(r)];
    const double p = model(table.x().row(i).transpose());
    if (!(p > 0.0 && p < 1.0)) {
      throw Error("propensity_out_of_range", "fitted propensity outside (0,1) at a weighted row");
    }
    if (p < trim || p > 1.0 - trim) ++out.flagged_rows;
    w(r) = all(i);
    c1(r) = table.d()(i) == 1 ? 1.0 / p : 0.0;
    c0(r) = table.d()(i) == 0 ? 1.0 / (1.0 - p) : 0.0;
  }
  const auto grid = std::make_shared<const Eigen::VectorXd>(sub_grids.y_grid);
  auto f1 = local_mean(rows, table.y(), c1, w, sub_grids.y_grid, table.size());
  auto f0 = local_mean(rows, table.y(), c0, w, sub_grids.y_grid, table.size());
  out.kernel_mass = f1.mass;

  const auto rearrange = [](const Eigen::VectorXd& raw) {
    Eigen::VectorXd v = raw.cwiseMax(0.0).cwiseMin(1.0);
    for (Index k = 1; k < v.size(); ++k) v(k) = std::max(v(k), v(k - 1));
    return v;
  };
  out.raw_f1 = f1.values;
  out.raw_f0 = f0.values;
  out.f1 = CdfCurve(grid, rearrange(f1.values));
  out.f0 = CdfCurve(grid, rearrange(f0.values));
  out.psi11 = std::move(f1.influence);
  out.psi10 = std::move(f0.influence);
  return out;
}

}  // namespace tebounds
