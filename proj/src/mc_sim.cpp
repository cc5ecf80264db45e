#include "tebounds/mc_sim.hpp"

#include "tebounds/error.hpp"
#include "tebounds/inference.hpp"
#include "tebounds/parallel.hpp"
#include "tebounds/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace tebounds {

void DgpSpec::validate() const {
  if (n < 2) throw Error("insufficient_sample", "insufficient sample: n must be at least 2");
  const double lo1 = std::min(phi1 - gamma1, phi1 + gamma1);
  const double lo0 = std::min(phi0 - gamma0, phi0 + gamma0);
  if (lo1 < 0.0 || lo0 < 0.0) throw Error("config_error", "scale function phi + x gamma negative on [-1,1]");
}

bool DgpSpec::scale_on_boundary() const {
  return std::min(phi1 - gamma1, phi1 + gamma1) == 0.0 || std::min(phi0 - gamma0, phi0 + gamma0) == 0.0;
}

ObservationTable draw_sample(const DgpSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd y(spec.n);
  Eigen::VectorXi d(spec.n);
  Eigen::MatrixXd x(spec.n, 1);
  for (Index i = 0; i < spec.n; ++i) {
    const double xi = 2.0 * unif(rng) - 1.0;
    const double u1 = normal(rng);
    const double u0 = normal(rng);
    const double v = normal(rng);
    const double y1 = spec.mu1 + xi * spec.beta1 + (spec.phi1 + xi * spec.gamma1) * u1;
    const double y0 = spec.mu0 + xi * spec.beta0 + (spec.phi0 + xi * spec.gamma0) * u0;
    x(i, 0) = xi;
    d(i) = xi * spec.alpha >= v ? 1 : 0;
    y(i) = d(i) == 1 ? y1 : y0;
  }
  return ObservationTable(std::move(y), std::move(d), std::move(x));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Eigen::VectorXd null_lower_curve(const Eigen::VectorXd& delta_grid) {
  return delta_grid.unaryExpr([](double t) { return t >= 0.0 ? 2.0 * normal_cdf(t / 2.0) - 1.0 : 0.0; });
}

std::pair<double, double> true_makarov_interval(const DgpSpec& spec, double x, double delta, Index points) {
  const double m1 = spec.mu1 + x * spec.beta1, s1 = spec.phi1 + x * spec.gamma1;
  const double m0 = spec.mu0 + x * spec.beta0, s0 = spec.phi0 + x * spec.gamma0;
  if (!(s1 > 0.0 && s0 > 0.0)) throw Error("invalid_argument", "degenerate scale at x");
  const double lo = std::min(m1 - 12.0 * s1, m0 + delta - 12.0 * s0);
  const double hi = std::max(m1 + 12.0 * s1, m0 + delta + 12.0 * s0);
  const Eigen::VectorXd ys = linspace(lo, hi, points);
  double sup = -1.0, inf = 1.0;
  for (Index k = 0; k < ys.size(); ++k) {
    const double v = normal_cdf((ys(k) - m1) / s1) - normal_cdf((ys(k) - delta - m0) / s0);
    sup = std::max(sup, v);
    inf = std::min(inf, v);
  }
  return {std::max(sup, 0.0), 1.0 + std::min(inf, 0.0)};
}

std::vector<McScenario> default_scenarios() {
  return {{"mu=0", 0.0, 0.0}, {"mu=-1", -1.0, 0.0}, {"mu1=1", 1.0, 0.0}};
}

const McCell& McReport::cell(double c, TuningRate rate, const std::string& scenario) const {
  for (const auto& k : cells) {
    if (k.c == c && k.rate == rate && k.scenario == scenario && k.m_y == options.m_y &&
        k.m_delta == options.m_delta) {
      return k;
    }
  }
  throw Error("invalid_argument", "no such Monte Carlo cell");
}

void McReport::write_csv(std::ostream& out) const {
  out << "c";
  for (const auto rate : options.rates) {
    for (const auto& s : options.scenarios) out << ',' << to_string(rate) << ':' << s.label;
  }
  out << '\n';
  for (const double c : options.c_values) {
    out << std::setprecision(10) << c;
    for (const auto rate : options.rates) {
      for (const auto& s : options.scenarios) out << ',' << std::setprecision(10) << cell(c, rate, s.label).rejection_rate();
    }
    out << '\n';
  }
}

std::string McReport::to_json() const {
  nlohmann::json j;
  j["reps"] = options.reps;
  j["n"] = options.n;
  j["m_boot"] = options.m_boot;
  j["alpha"] = options.alpha;
  j["base_seed"] = options.base_seed;
  j["m_y"] = options.m_y;
  j["m_delta"] = options.m_delta;
  j["pad"] = options.pad;
  j["failed_reps"] = failed_reps;
  auto& jc = j["cells"] = nlohmann::json::array();
  for (const auto& k : cells) {
    jc.push_back({{"c", k.c},
                  {"rate", to_string(k.rate)},
                  {"scenario", k.scenario},
                  {"m_y", k.m_y},
                  {"m_delta", k.m_delta},
                  {"rejections", k.rejections},
                  {"valid_reps", k.valid_reps},
                  {"rejection_rate", k.rejection_rate()}});
  }
  auto& js = j["seeds"] = nlohmann::json::object();
  for (std::size_t s = 0; s < seeds.size(); ++s) js[options.scenarios[s].label] = seeds[s];
  return j.dump(2);
}

namespace {

struct GridChoice {
  Index m_y;
  Index m_delta;
};

// One replication: rejection flags for every (grid, rate, c) in that order.
std::vector<char> table1_replication(const Table1Options& opt, const DgpSpec& spec, std::uint64_t seed,
                                     const std::vector<GridChoice>& grids) {
  const ObservationTable table = draw_sample(spec, seed);
  Eigen::VectorXd x0(1);
  x0(0) = covariate_quantile(table, 0, 0.5);

  BootstrapConfig cfg;
  cfg.m = opt.m_boot;
  cfg.alpha = opt.alpha;
  cfg.seed = derive_seed(seed, 0xB0075);
  cfg.workers = 1;

  std::vector<char> flags;
  for (const auto& g : grids) {
    AnalysisSettings s;
    s.regime = Regime::point_id;
    s.kernel = opt.kernel;
    s.m_y = g.m_y;
    s.m_delta = g.m_delta;
    s.pad = opt.pad;
    const LocalAnalysis a = analyze_at(table, x0, s);
    const ProcessDraws proc = simulate_processes(a.influence, cfg, a.r_n);
    const Eigen::VectorXd null = null_lower_curve(a.grids.delta_grid);
    const double stat = a.r_n * (a.makarov.curve.lower - null).cwiseAbs().maxCoeff();

    for (const auto rate : opt.rates) {
      for (const double c : opt.c_values) {
        const double a_n = tuning_a_n({rate, c}, table.size(), a.h, a.d_x);
        const HddEvaluator ev(epsilon_argmax(a.makarov.lower_surface, a_n), a.grids.y_grid,
                              a.grids.delta_grid);
        std::vector<double> draws(static_cast<std::size_t>(cfg.m));
        for (Index b = 0; b < cfg.m; ++b) {
          draws[static_cast<std::size_t>(b)] =
              ev.lower(proc.h[0].col(b), proc.h[1].col(b), proc.h[2].col(b), proc.h[3].col(b));
        }
        flags.push_back(finish_test(stat, std::move(draws), opt.alpha).reject ? 1 : 0);
      }
    }
  }
  return flags;
}

}  // namespace

McReport run_table1(const Table1Options& opt) {
  if (opt.reps < 50) throw Error("config_error", "Monte Carlo needs at least 50 replications");
  if (opt.c_values.empty() || opt.rates.empty() || opt.scenarios.empty()) {
    throw Error("config_error", "empty Monte Carlo design");
  }
  McReport report;
  report.options = opt;
  const std::size_t workers = opt.workers ? opt.workers : worker_count();

  for (std::size_t s = 0; s < opt.scenarios.size(); ++s) {
    DgpSpec spec;
    spec.mu1 = opt.scenarios[s].mu1;
    spec.mu0 = opt.scenarios[s].mu0;
    spec.n = opt.n;

    std::vector<GridChoice> grids{{opt.m_y, opt.m_delta}};
    if (s == 0) {
      for (const auto& g : opt.sensitivity_grids) grids.push_back({g.first, g.second});
    }
    const auto reps = static_cast<std::size_t>(opt.reps);
    std::vector<std::uint64_t> seeds(reps);
    std::vector<std::vector<char>> flags(reps);
    std::vector<char> failed(reps, 0);
    for (std::size_t r = 0; r < reps; ++r) seeds[r] = derive_seed(opt.base_seed, s, r);
    parallel_for(
        reps,
        [&](std::size_t r) {
          try {
            flags[r] = table1_replication(opt, spec, seeds[r], grids);
          } catch (const Error&) {
            failed[r] = 1;
          }
        },
        workers);

    std::size_t slot = 0;
    for (const auto& g : grids) {
      for (const auto rate : opt.rates) {
        for (const double c : opt.c_values) {
          McCell cell;
          cell.c = c;
          cell.rate = rate;
          cell.scenario = opt.scenarios[s].label;
          cell.m_y = g.m_y;
          cell.m_delta = g.m_delta;
          for (std::size_t r = 0; r < reps; ++r) {
            if (failed[r]) continue;
            ++cell.valid_reps;
            cell.rejections += flags[r][slot];
          }
          report.cells.push_back(cell);
          ++slot;
        }
      }
    }
    for (const char f : failed) report.failed_reps += f;
    report.seeds.push_back(std::move(seeds));
  }
  return report;
}

CoverageReport run_coverage(const CoverageOptions& opt) {
  const auto reps = static_cast<std::size_t>(opt.reps);
  const std::size_t nd = opt.deltas.size();
  std::vector<std::vector<char>> hit(reps, std::vector<char>(nd, 0));
  parallel_for(
      reps,
      [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(opt.base_seed, 0xC0FE, r);
        const ObservationTable table = draw_sample(opt.dgp, seed);
        Eigen::VectorXd x0(1);
        x0(0) = covariate_quantile(table, 0, 0.5);

        AnalysisSettings s;
        s.regime = Regime::point_id;
        s.tuning = {opt.rate, opt.c};
        s.m_y = opt.m_y;
        s.m_delta = opt.m_delta;
        s.delta_range = std::make_pair(-5.0, 5.0);
        const LocalAnalysis a = analyze_at(table, x0, s);

        BootstrapConfig cfg;
        cfg.m = opt.m_boot;
        cfg.alpha = opt.alpha;
        cfg.seed = derive_seed(seed, 0xB0075);
        cfg.workers = 1;
        const ProcessDraws proc = simulate_processes(a.influence, cfg, a.r_n);
        const BandResult band = confidence_bands(a.makarov.curve, proc, a.grids, cfg, a.r_n);

        const Eigen::VectorXd& dg = a.grids.delta_grid;
        for (std::size_t i = 0; i < nd; ++i) {
          Index j = 0;
          (dg.array() - opt.deltas[i]).abs().minCoeff(&j);
          const auto truth = true_makarov_interval(opt.dgp, x0(0), dg(j));
          hit[r][i] = band.idset_lo(j) <= truth.first && band.idset_hi(j) >= truth.second;
        }
      },
      opt.workers ? opt.workers : worker_count());

  CoverageReport rep;
  rep.deltas = opt.deltas;
  rep.reps = opt.reps;
  rep.covered.assign(nd, 0);
  for (const auto& h : hit) {
    bool all = true;
    for (std::size_t i = 0; i < nd; ++i) {
      rep.covered[i] += h[i];
      all = all && h[i];
    }
    rep.joint_covered += all;
  }
  return rep;
}

}  // namespace tebounds
