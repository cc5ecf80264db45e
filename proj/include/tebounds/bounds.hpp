#pragma once

#include "tebounds/conditional_cdf.hpp"
#include "tebounds/data.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tebounds {

/// Identification regime for the marginal CDFs of Y1 and Y0 given X = x.
enum class Regime { point_id, manski, fsd1, fsd2, fsd_both, subset };

Regime parse_regime(std::string_view name);
std::string to_string(Regime regime);

/// (LB_1, UB_1, LB_0, UB_0): bounds housing the marginal CDFs at x.
struct MarginalBounds {
  CdfCurve lb1;
  CdfCurve ub1;
  CdfCurve lb0;
  CdfCurve ub0;
  Regime regime = Regime::point_id;
};

/// Influence tables aligned component by component with MarginalBounds.
struct MarginalInfluence {
  InfluenceTable lb1;
  InfluenceTable ub1;
  InfluenceTable lb0;
  InfluenceTable ub0;
};

/// Curves a regime may draw on. point_id / subset use f1, f0; the endogenous
/// regimes use f11, f00, fy and the local propensity p.
struct MarginalInputs {
  std::optional<CdfCurve> f1;
  std::optional<CdfCurve> f0;
  std::optional<CdfCurve> f11;
  std::optional<CdfCurve> f00;
  std::optional<CdfCurve> fy;
  std::optional<double> p;
};

MarginalBounds assemble_marginal_bounds(Regime regime, const MarginalInputs& inputs);

MarginalInputs inputs_from(const UnconfoundedEstimate& est);
MarginalInputs inputs_from(const EndogenousEstimate& est);
MarginalInputs inputs_from(const SubsetEstimate& est);

/// Influence of each marginal-bound component. The Manski-type curves are
/// kernel means, so their influence is a linear combination of the kernel
/// mean and local-propensity influences.
MarginalInfluence assemble_marginal_influence(Regime regime, const EndogenousEstimate& est);
MarginalInfluence assemble_marginal_influence(const UnconfoundedEstimate& est);
MarginalInfluence assemble_marginal_influence(const SubsetEstimate& est);

/// Pi_L(y, delta) = LB_1(y) - UB_0(y - delta) or Pi_U = UB_1(y) - LB_0(y - delta),
/// stored as an M_delta x M_y matrix.
struct ObjectiveSurface {
  Eigen::MatrixXd values;
};

ObjectiveSurface lower_surface(const MarginalBounds& mb, const EvalGrids& grids);
ObjectiveSurface upper_surface(const MarginalBounds& mb, const EvalGrids& grids);

using IndexSets = std::vector<std::vector<Index>>;

/// Per row (delta): grid indices y with f(delta, y) >= max_y f - eps.
IndexSets epsilon_argmax(const ObjectiveSurface& surface, double eps);
/// Per row (delta): grid indices y with f(delta, y) <= min_y f + eps.
IndexSets epsilon_argmin(const ObjectiveSurface& surface, double eps);

/// Makarov bounds over the delta grid with the eps-argmax / eps-argmin sets.
struct BoundsCurve {
  Eigen::VectorXd lower;      // max(sup_y Pi_L, 0)
  Eigen::VectorXd upper;      // min(inf_y Pi_U, 0) + 1
  Eigen::VectorXd lower_sup;  // sup_y Pi_L, unclipped
  Eigen::VectorXd upper_inf;  // inf_y Pi_U, unclipped
  IndexSets argsup_sets;
  IndexSets arginf_sets;
  double a_n = 0.0;
  Index crossings = 0;      // marginal grid points with lb > ub
  Index empty_intervals = 0;  // delta points with lower > upper
};

struct MakarovResult {
  BoundsCurve curve;
  ObjectiveSurface lower_surface;
  ObjectiveSurface upper_surface;
};

MakarovResult makarov_bounds(const MarginalBounds& mb, const EvalGrids& grids, double a_n);

/// Single-delta evaluation; identical to makarov_bounds for grid deltas.
std::pair<double, double> makarov_distribution_at(const MarginalBounds& mb, const EvalGrids& grids,
                                                  double delta);

/// Number of grid points where a marginal lower bound exceeds its upper bound.
Index count_crossings(const MarginalBounds& mb);

}  // namespace tebounds
