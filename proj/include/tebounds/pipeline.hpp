#pragma once

#include "tebounds/bounds.hpp"
#include "tebounds/inference.hpp"
#include "tebounds/kernel.hpp"

#include <optional>
#include <vector>

namespace tebounds {

/// Everything needed to go from a sample and a conditioning point to bounds.
struct AnalysisSettings {
  Regime regime = Regime::point_id;
  KernelFamily kernel = KernelFamily::epanechnikov;
  BandwidthRule bandwidth;
  TuningSequence tuning;
  double trim = kDefaultTrim;
  Index m_y = 401;
  Index m_delta = 201;
  double pad = 0.1;
  std::optional<std::pair<double, double>> delta_range;
  std::vector<Index> subset_columns;  // subset regime: covariates of X1
};

struct LocalAnalysis {
  EvalGrids grids;
  double h = 0.0;
  double r_n = 0.0;
  double a_n = 0.0;
  Index d_x = 0;  // dimension the kernel runs over
  MarginalBounds marginals;
  MarginalInfluence influence;
  MakarovResult makarov;
  LocalDiagnostics diag;
  Index flagged_rows = 0;  // subset regime only
};

/// Estimates the marginal bounds at x0, their influence functions and the
/// Makarov bounds. For the subset regime x0 lives in the X1 coordinates.
LocalAnalysis analyze_at(const ObservationTable& table, const Eigen::VectorXd& x0,
                         const AnalysisSettings& settings);

/// Recomputes the eps-argmax sets of an analysis for a different a_n.
BoundsCurve with_tuning(const LocalAnalysis& a, double a_n);

}  // namespace tebounds
