#include "tebounds/bounds.hpp"

#include "tebounds/error.hpp"

#include <algorithm>
#include <limits>

namespace tebounds {

Regime parse_regime(std::string_view name) {
  if (name == "point_id") return Regime::point_id;
  if (name == "manski") return Regime::manski;
  if (name == "fsd1") return Regime::fsd1;
  if (name == "fsd2") return Regime::fsd2;
  if (name == "fsd_both") return Regime::fsd_both;
  if (name == "subset") return Regime::subset;
  throw Error("config_error", "unknown regime '" + std::string(name) + "'");
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::point_id: return "point_id";
    case Regime::manski: return "manski";
    case Regime::fsd1: return "fsd1";
    case Regime::fsd2: return "fsd2";
    case Regime::fsd_both: return "fsd_both";
    case Regime::subset: return "subset";
  }
  return "unknown";
}

namespace {

const CdfCurve& require(const std::optional<CdfCurve>& c, const char* name) {
  if (!c) throw Error("missing_input_curve", std::string("missing input curve ") + name);
  return *c;
}

CdfCurve affine(const CdfCurve& c, double scale, double shift) {
  return CdfCurve(c.shared_grid(), (scale * c.values().array() + shift).matrix());
}

InfluenceTable add_column(const InfluenceTable& t, const Eigen::VectorXd& col, double sign) {
  InfluenceTable out = t;
  out.values.colwise() += sign * col;
  return out;
}

}  // namespace

MarginalBounds assemble_marginal_bounds(Regime regime, const MarginalInputs& in) {
  MarginalBounds mb;
  mb.regime = regime;
  if (regime == Regime::point_id || regime == Regime::subset) {
    const auto& f1 = require(in.f1, "F1");
    const auto& f0 = require(in.f0, "F0");
    mb.lb1 = f1;
    mb.ub1 = f1;
    mb.lb0 = f0;
    mb.ub0 = f0;
    return mb;
  }
  const auto& f11 = require(in.f11, "F11");
  const auto& f00 = require(in.f00, "F00");
  if (!in.p) throw Error("missing_input_curve", "missing local propensity");
  const double p = *in.p;
  if (!(p > 0.0 && p < 1.0)) throw Error("propensity_out_of_range", "local propensity outside (0,1)");

  const CdfCurve lb1_manski = affine(f11, p, 0.0);
  const CdfCurve ub1_manski = affine(f11, p, 1.0 - p);
  const CdfCurve lb0_manski = affine(f00, 1.0 - p, 0.0);
  const CdfCurve ub0_manski = affine(f00, 1.0 - p, p);
  switch (regime) {
    case Regime::manski:
      mb.lb1 = lb1_manski;
      mb.ub1 = ub1_manski;
      mb.lb0 = lb0_manski;
      mb.ub0 = ub0_manski;
      break;
    case Regime::fsd1:
      mb.lb1 = f11;
      mb.ub1 = ub1_manski;
      mb.lb0 = lb0_manski;
      mb.ub0 = f00;
      break;
    case Regime::fsd2: {
      const auto& fy = require(in.fy, "FY");
      mb.lb1 = lb1_manski;
      mb.ub1 = fy;
      mb.lb0 = fy;
      mb.ub0 = ub0_manski;
      break;
    }
    case Regime::fsd_both: {
      const auto& fy = require(in.fy, "FY");
      mb.lb1 = f11;
      mb.ub1 = fy;
      mb.lb0 = fy;
      mb.ub0 = f00;
      break;
    }
    default:
      break;
  }
  return mb;
}

MarginalInputs inputs_from(const UnconfoundedEstimate& est) {
  MarginalInputs in;
  in.f1 = est.f1;
  in.f0 = est.f0;
  return in;
}

MarginalInputs inputs_from(const EndogenousEstimate& est) {
  MarginalInputs in;
  in.f1 = est.f11;
  in.f0 = est.f00;
  in.f11 = est.f11;
  in.f00 = est.f00;
  in.fy = est.fy;
  in.p = est.diag.local_propensity;
  return in;
}

MarginalInputs inputs_from(const SubsetEstimate& est) {
  MarginalInputs in;
  in.f1 = est.f1;
  in.f0 = est.f0;
  return in;
}

MarginalInfluence assemble_marginal_influence(Regime regime, const EndogenousEstimate& est) {
  const InfluenceTable ub1_manski = add_column(est.psi_m1, est.psi_p, -1.0);
  const InfluenceTable ub0_manski = add_column(est.psi_m0, est.psi_p, +1.0);
  switch (regime) {
    case Regime::point_id:
      return {est.psi11, est.psi11, est.psi00, est.psi00};
    case Regime::manski:
      return {est.psi_m1, ub1_manski, est.psi_m0, ub0_manski};
    case Regime::fsd1:
      return {est.psi11, ub1_manski, est.psi_m0, est.psi00};
    case Regime::fsd2:
      return {est.psi_m1, est.psiy, est.psiy, ub0_manski};
    case Regime::fsd_both:
      return {est.psi11, est.psiy, est.psiy, est.psi00};
    case Regime::subset:
      break;
  }
  throw Error("invalid_argument", "subset regime needs the subset estimator");
}

MarginalInfluence assemble_marginal_influence(const UnconfoundedEstimate& est) {
  return {est.psi1, est.psi1, est.psi0, est.psi0};
}

MarginalInfluence assemble_marginal_influence(const SubsetEstimate& est) {
  return {est.psi11, est.psi11, est.psi10, est.psi10};
}

namespace {

void check_grids(const MarginalBounds& mb, const EvalGrids& grids) {
  for (const CdfCurve* c : {&mb.lb1, &mb.ub1, &mb.lb0, &mb.ub0}) {
    if (c->size() != grids.y_grid.size()) {
      throw Error("grid_mismatch", "marginal curves do not live on the outcome grid");
    }
  }
}

// f1(y_k) - f0(y_k - delta_j) for every grid pair.
ObjectiveSurface difference_surface(const CdfCurve& f1, const CdfCurve& f0, const EvalGrids& grids) {
  const Index md = grids.delta_grid.size();
  const Index my = grids.y_grid.size();
  ObjectiveSurface s;
  s.values.resize(md, my);
  for (Index k = 0; k < my; ++k) {
    const double a = f1.values()(k);
    for (Index j = 0; j < md; ++j) s.values(j, k) = a - f0(grids.y_grid(k) - grids.delta_grid(j));
  }
  return s;
}

}  // namespace

ObjectiveSurface lower_surface(const MarginalBounds& mb, const EvalGrids& grids) {
  check_grids(mb, grids);
  return difference_surface(mb.lb1, mb.ub0, grids);
}

ObjectiveSurface upper_surface(const MarginalBounds& mb, const EvalGrids& grids) {
  check_grids(mb, grids);
  return difference_surface(mb.ub1, mb.lb0, grids);
}

IndexSets epsilon_argmax(const ObjectiveSurface& surface, double eps) {
  const auto& v = surface.values;
  IndexSets sets(static_cast<std::size_t>(v.rows()));
  for (Index j = 0; j < v.rows(); ++j) {
    const double cut = v.row(j).maxCoeff() - eps;
    auto& set = sets[static_cast<std::size_t>(j)];
    for (Index k = 0; k < v.cols(); ++k) {
      if (v(j, k) >= cut) set.push_back(k);
    }
  }
  return sets;
}

IndexSets epsilon_argmin(const ObjectiveSurface& surface, double eps) {
  const auto& v = surface.values;
  IndexSets sets(static_cast<std::size_t>(v.rows()));
  for (Index j = 0; j < v.rows(); ++j) {
    const double cut = v.row(j).minCoeff() + eps;
    auto& set = sets[static_cast<std::size_t>(j)];
    for (Index k = 0; k < v.cols(); ++k) {
      if (v(j, k) <= cut) set.push_back(k);
    }
  }
  return sets;
}

Index count_crossings(const MarginalBounds& mb) {
  // rounding ties (p F + 1 - p vs F at F = 1) are not crossings
  constexpr double tol = 1e-12;
  const auto c1 = (mb.lb1.values().array() > mb.ub1.values().array() + tol).count();
  const auto c0 = (mb.lb0.values().array() > mb.ub0.values().array() + tol).count();
  return static_cast<Index>(c1 + c0);
}

MakarovResult makarov_bounds(const MarginalBounds& mb, const EvalGrids& grids, double a_n) {
  if (!(a_n >= 0.0)) throw Error("invalid_argument", "a_n must be nonnegative");
  MakarovResult r;
  r.lower_surface = lower_surface(mb, grids);
  r.upper_surface = upper_surface(mb, grids);

  auto& c = r.curve;
  c.a_n = a_n;
  c.lower_sup = r.lower_surface.values.rowwise().maxCoeff();
  c.upper_inf = r.upper_surface.values.rowwise().minCoeff();
  c.lower = c.lower_sup.cwiseMax(0.0);
  c.upper = c.upper_inf.cwiseMin(0.0).array() + 1.0;
  c.argsup_sets = epsilon_argmax(r.lower_surface, a_n);
  c.arginf_sets = epsilon_argmin(r.upper_surface, a_n);
  c.crossings = count_crossings(mb);
  c.empty_intervals = (c.lower.array() > c.upper.array()).count();
  return r;
}

std::pair<double, double> makarov_distribution_at(const MarginalBounds& mb, const EvalGrids& grids,
                                                  double delta) {
  check_grids(mb, grids);
  double sup_lower = -std::numeric_limits<double>::infinity();
  double inf_upper = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < grids.y_grid.size(); ++k) {
    const double y = grids.y_grid(k);
    sup_lower = std::max(sup_lower, mb.lb1.values()(k) - mb.ub0(y - delta));
    inf_upper = std::min(inf_upper, mb.ub1.values()(k) - mb.lb0(y - delta));
  }
  return {std::max(sup_lower, 0.0), std::min(inf_upper, 0.0) + 1.0};
}

}  // namespace tebounds
