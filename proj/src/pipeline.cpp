#include "tebounds/pipeline.hpp"

#include "tebounds/error.hpp"

namespace tebounds {

LocalAnalysis analyze_at(const ObservationTable& table, const Eigen::VectorXd& x0,
                         const AnalysisSettings& s) {
  LocalAnalysis a;
  if (s.regime == Regime::subset) {
    if (s.subset_columns.empty()) throw Error("config_error", "subset regime needs subset columns");
    const ObservationTable sub = table.project(s.subset_columns);
    a.d_x = sub.dim();
    a.grids = make_grids(sub, x0, s.m_y, s.m_delta, s.pad, s.delta_range);
    a.h = bandwidth(s.bandwidth, sub);
    const PropensityModel model = fit_propensity(table);
    const SubsetEstimate est = estimate_cdf_subset(table, a.grids, s.subset_columns, model,
                                                   KernelSpec(s.kernel, a.d_x), a.h, s.trim);
    a.marginals = assemble_marginal_bounds(s.regime, inputs_from(est));
    a.influence = assemble_marginal_influence(est);
    a.flagged_rows = est.flagged_rows;
    a.diag.effective_n1 = est.kernel_mass;
    a.diag.effective_n0 = est.kernel_mass;
    a.diag.propensity_warning = a.flagged_rows > 0;
  } else {
    a.d_x = table.dim();
    a.grids = make_grids(table, x0, s.m_y, s.m_delta, s.pad, s.delta_range);
    a.h = bandwidth(s.bandwidth, table);
    const KernelSpec kernel(s.kernel, a.d_x);
    if (s.regime == Regime::point_id) {
      const UnconfoundedEstimate est = estimate_cdf_unconfounded(table, a.grids, kernel, a.h, s.trim);
      a.marginals = assemble_marginal_bounds(s.regime, inputs_from(est));
      a.influence = assemble_marginal_influence(est);
      a.diag = est.diag;
    } else {
      const EndogenousEstimate est = estimate_cdf_endogenous(table, a.grids, kernel, a.h, s.trim);
      a.marginals = assemble_marginal_bounds(s.regime, inputs_from(est));
      a.influence = assemble_marginal_influence(s.regime, est);
      a.diag = est.diag;
    }
  }
  a.r_n = rate_r_n(table.size(), a.h, a.d_x);
  a.a_n = tuning_a_n(s.tuning, table.size(), a.h, a.d_x);
  a.makarov = makarov_bounds(a.marginals, a.grids, a.a_n);
  return a;
}

BoundsCurve with_tuning(const LocalAnalysis& a, double a_n) {
  if (!(a_n >= 0.0)) throw Error("invalid_argument", "a_n must be nonnegative");
  BoundsCurve c = a.makarov.curve;
  c.a_n = a_n;
  c.argsup_sets = epsilon_argmax(a.makarov.lower_surface, a_n);
  c.arginf_sets = epsilon_argmin(a.makarov.upper_surface, a_n);
  return c;
}

}  // namespace tebounds
