#include "tebounds/inference.hpp"

#include "tebounds/error.hpp"
#include "tebounds/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tebounds {

void BootstrapConfig::validate() const {
  if (m < 100) throw Error("config_error", "bootstrap iterations m must be at least 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("config_error", "alpha must lie in (0,1)");
}

SimulatedProcess ProcessDraws::iteration(Index b) const {
  SimulatedProcess p;
  for (std::size_t c = 0; c < 4; ++c) p.h[c] = h[c].col(b);
  return p;
}

Eigen::VectorXd bootstrap_weights(std::uint64_t seed, std::uint64_t stream, Index b, Index n) {
  std::mt19937_64 rng(derive_seed(seed, stream, static_cast<std::uint64_t>(b)));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(n);
  for (Index i = 0; i < n; ++i) w(i) = normal(rng);
  return w;
}

ProcessDraws simulate_processes(const MarginalInfluence& infl, const BootstrapConfig& cfg, double r_n,
                                std::uint64_t stream) {
  cfg.validate();
  const std::array<const InfluenceTable*, 4> tables{&infl.lb1, &infl.ub1, &infl.lb0, &infl.ub0};
  const Index n = tables[0]->n;
  const Index my = tables[0]->values.cols();
  for (const auto* t : tables) {
    if (t->n != n || t->values.cols() != my || static_cast<Index>(t->rows.size()) != t->values.rows()) {
      throw Error("dimension_mismatch", "influence tables do not share n and the outcome grid");
    }
  }

  // weights restricted to the union of active rows
  std::vector<Index> active;
  for (const auto* t : tables) active.insert(active.end(), t->rows.begin(), t->rows.end());
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (std::size_t r = 0; r < active.size(); ++r) slot[static_cast<std::size_t>(active[r])] = static_cast<Index>(r);

  const auto na = static_cast<Index>(active.size());
  const Index m = cfg.m;
  Eigen::MatrixXd weights(na, m);
  parallel_for(
      static_cast<std::size_t>(m),
      [&](std::size_t b) {
        const Eigen::VectorXd w = bootstrap_weights(cfg.seed, stream, static_cast<Index>(b), n);
        for (Index r = 0; r < na; ++r) weights(r, static_cast<Index>(b)) = w(active[static_cast<std::size_t>(r)]);
      },
      cfg.workers ? cfg.workers : worker_count());

  ProcessDraws out;
  for (std::size_t c = 0; c < 4; ++c) {
    const InfluenceTable& t = *tables[c];
    Eigen::MatrixXd wt(static_cast<Index>(t.rows.size()), m);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      wt.row(static_cast<Index>(r)) = weights.row(slot[static_cast<std::size_t>(t.rows[r])]);
    }
    out.h[c].noalias() = r_n * (t.values.transpose() * wt);
  }
  return out;
}

HddEvaluator::HddEvaluator(const IndexSets& sets, const Eigen::VectorXd& y_grid,
                           const Eigen::VectorXd& delta_grid)
    : m_y_(y_grid.size()) {
  if (static_cast<Index>(sets.size()) != delta_grid.size()) {
    throw Error("dimension_mismatch", "one eps-argmax set per delta is required");
  }
  offsets_.reserve(sets.size() + 1);
  offsets_.push_back(0);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    if (sets[j].empty()) throw Error("empty_argmax_set", "empty eps-argmax set");
    const double delta = delta_grid(static_cast<Index>(j));
    for (const Index k : sets[j]) {
      if (k < 0 || k >= m_y_) throw Error("dimension_mismatch", "eps-argmax index outside the grid");
      node_.push_back(k);
      stencil_.push_back(locate(y_grid, y_grid(k) - delta));
    }
    offsets_.push_back(node_.size());
  }
}

double hdd_lower(const IndexSets& argsup, const SimulatedProcess& p, const EvalGrids& grids) {
  const HddEvaluator ev(argsup, grids.y_grid, grids.delta_grid);
  return ev.lower(p.h[0], p.h[1], p.h[2], p.h[3]);
}

double hdd_upper(const IndexSets& arginf, const SimulatedProcess& p, const EvalGrids& grids) {
  const HddEvaluator ev(arginf, grids.y_grid, grids.delta_grid);
  return ev.upper(p.h[0], p.h[1], p.h[2], p.h[3]);
}

double hdd_lower(const ObjectiveSurface& lower_surface, const SimulatedProcess& p, double a_n,
                 const EvalGrids& grids) {
  return hdd_lower(epsilon_argmax(lower_surface, a_n), p, grids);
}

double hdd_upper(const ObjectiveSurface& upper_surface, const SimulatedProcess& p, double a_n,
                 const EvalGrids& grids) {
  return hdd_upper(epsilon_argmin(upper_surface, a_n), p, grids);
}

HddDraws hdd_draws(const BoundsCurve& bc, const ProcessDraws& draws, const EvalGrids& grids,
                   std::size_t workers) {
  const HddEvaluator lo(bc.argsup_sets, grids.y_grid, grids.delta_grid);
  const HddEvaluator up(bc.arginf_sets, grids.y_grid, grids.delta_grid);
  const Index m = draws.iterations();
  HddDraws out;
  out.lower.resize(static_cast<std::size_t>(m));
  out.upper.resize(static_cast<std::size_t>(m));
  parallel_for(
      static_cast<std::size_t>(m),
      [&](std::size_t b) {
        const auto i = static_cast<Index>(b);
        const auto h1 = draws.h[0].col(i);
        const auto h2 = draws.h[1].col(i);
        const auto h3 = draws.h[2].col(i);
        const auto h4 = draws.h[3].col(i);
        out.lower[b] = lo.lower(h1, h2, h3, h4);
        out.upper[b] = up.upper(h1, h2, h3, h4);
      },
      workers ? workers : worker_count());
  return out;
}

double empirical_quantile(std::vector<double> draws, double prob) {
  if (draws.empty()) throw Error("invalid_argument", "quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw Error("invalid_argument", "quantile level outside [0,1]");
  std::sort(draws.begin(), draws.end());
  const double g = static_cast<double>(draws.size() - 1) * prob + 1.0;
  const auto lo = static_cast<std::size_t>(std::floor(g));
  const auto hi = static_cast<std::size_t>(std::ceil(g));
  const double a = draws[lo - 1];
  const double b = draws[hi - 1];
  return a + (g - std::floor(g)) * (b - a);
}

namespace {

Eigen::VectorXd clip01(const Eigen::VectorXd& v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace

BandResult confidence_bands(const BoundsCurve& bc, const HddDraws& draws, const BootstrapConfig& cfg,
                            double r_n) {
  const auto m = static_cast<double>(draws.lower.size());
  if (m * cfg.alpha / 2.0 < 1.0) {
    throw Error("invalid_argument", "too few bootstrap draws for the requested quantile");
  }
  if (!(r_n > 0.0)) throw Error("invalid_argument", "r_n must be positive");
  BandResult r;
  r.r_n = r_n;
  r.draws = draws;
  r.c_lower = empirical_quantile(draws.lower, 1.0 - cfg.alpha / 2.0);
  r.c_upper = empirical_quantile(draws.upper, 1.0 - cfg.alpha / 2.0);
  const double wl = r.c_lower / r_n;
  const double wu = r.c_upper / r_n;
  r.raw_lower_lo = bc.lower.array() - wl;
  r.raw_lower_hi = bc.lower.array() + wl;
  r.raw_upper_lo = bc.upper.array() - wu;
  r.raw_upper_hi = bc.upper.array() + wu;
  r.lower_lo = clip01(r.raw_lower_lo);
  r.lower_hi = clip01(r.raw_lower_hi);
  r.upper_lo = clip01(r.raw_upper_lo);
  r.upper_hi = clip01(r.raw_upper_hi);
  r.idset_lo = r.lower_lo;
  r.idset_hi = r.upper_hi;
  return r;
}

BandResult confidence_bands(const BoundsCurve& bc, const ProcessDraws& processes, const EvalGrids& grids,
                            const BootstrapConfig& cfg, double r_n) {
  return confidence_bands(bc, hdd_draws(bc, processes, grids, cfg.workers), cfg, r_n);
}

Side parse_side(std::string_view name) {
  if (name == "lower") return Side::lower;
  if (name == "upper") return Side::upper;
  throw Error("config_error", "side must be lower or upper");
}

std::string to_string(Side side) { return side == Side::lower ? "lower" : "upper"; }

TestResult finish_test(double statistic, std::vector<double> draws, double alpha) {
  if (draws.empty()) throw Error("invalid_argument", "no bootstrap draws");
  TestResult t;
  t.statistic = statistic;
  t.critical_value = empirical_quantile(draws, 1.0 - alpha);
  t.reject = statistic > t.critical_value;
  const auto exceed = std::count_if(draws.begin(), draws.end(), [&](double v) { return v >= statistic; });
  t.p_value = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(draws.size()) + 1.0);
  t.bootstrap_draws = std::move(draws);
  return t;
}

TestResult ks_test(const BoundsCurve& bc, const Eigen::VectorXd& null_curve, Side side,
                   const HddDraws& draws, const BootstrapConfig& cfg, double r_n) {
  const Eigen::VectorXd& est = side == Side::lower ? bc.lower : bc.upper;
  if (null_curve.size() != est.size()) {
    throw Error("dimension_mismatch", "null curve does not match the delta grid");
  }
  const double stat = r_n * (est - null_curve).cwiseAbs().maxCoeff();
  return finish_test(stat, side == Side::lower ? draws.lower : draws.upper, cfg.alpha);
}

TestResult ks_test(const BoundsCurve& bc, const Eigen::VectorXd& null_curve, Side side,
                   const ProcessDraws& processes, const EvalGrids& grids, const BootstrapConfig& cfg,
                   double r_n) {
  return ks_test(bc, null_curve, side, hdd_draws(bc, processes, grids, cfg.workers), cfg, r_n);
}

double lp_norm(const Eigen::VectorXd& f, const Eigen::VectorXd& grid, double p) {
  if (!(p >= 1.0)) throw Error("invalid_argument", "norm order p must be at least 1");
  if (f.size() != grid.size() || f.size() < 2) throw Error("dimension_mismatch", "mismatched grids");
  double acc = 0.0;
  for (Index j = 1; j < f.size(); ++j) {
    acc += 0.5 * (std::pow(std::abs(f(j - 1)), p) + std::pow(std::abs(f(j)), p)) * (grid(j) - grid(j - 1));
  }
  return std::pow(acc, 1.0 / p);
}

TestResult equality_test(const BoundsCurve& a, const BoundsCurve& b, double p, const ProcessDraws& proc_a,
                         const ProcessDraws& proc_b, const EvalGrids& grids_a, const EvalGrids& grids_b,
                         const BootstrapConfig& cfg, double r_n) {
  if (!(p >= 1.0)) throw Error("invalid_argument", "norm order p must be at least 1");
  if (grids_a.delta_grid.size() != grids_b.delta_grid.size() ||
      (grids_a.delta_grid - grids_b.delta_grid).cwiseAbs().maxCoeff() > 0.0) {
    throw Error("dimension_mismatch", "groups must share the delta grid");
  }
  if (proc_a.iterations() != proc_b.iterations()) {
    throw Error("dimension_mismatch", "groups need the same number of bootstrap iterations");
  }
  const Eigen::VectorXd& grid = grids_a.delta_grid;
  const double stat = r_n * lp_norm(a.lower_sup - b.lower_sup, grid, p);

  const HddEvaluator ev_a(a.argsup_sets, grids_a.y_grid, grid);
  const HddEvaluator ev_b(b.argsup_sets, grids_b.y_grid, grid);
  const Index m = proc_a.iterations();
  std::vector<double> draws(static_cast<std::size_t>(m));
  parallel_for(
      static_cast<std::size_t>(m),
      [&](std::size_t s) {
        const auto i = static_cast<Index>(s);
        const Eigen::VectorXd ra = ev_a.directional_sup(proc_a.h[0].col(i), proc_a.h[3].col(i));
        const Eigen::VectorXd rb = ev_b.directional_sup(proc_b.h[0].col(i), proc_b.h[3].col(i));
        draws[s] = lp_norm(ra - rb, grid, p);
      },
      cfg.workers ? cfg.workers : worker_count());
  return finish_test(stat, std::move(draws), cfg.alpha);
}

}  // namespace tebounds
