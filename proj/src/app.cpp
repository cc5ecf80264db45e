#include "tebounds/app.hpp"

#include "tebounds/error.hpp"
#include "tebounds/inference.hpp"
#include "tebounds/mc_sim.hpp"
#include "tebounds/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tebounds {

using nlohmann::json;

namespace {

template <class T>
void take(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

double parse_number(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("config_error", std::string("cannot parse ") + what + " '" + s + "'");
  }
}

Eigen::VectorXd resolve_point(const std::string& spec, const ObservationTable& table) {
  const auto parts = split(spec, ',');
  if (static_cast<Index>(parts.size()) != table.dim()) {
    throw Error("dimension_mismatch", "x0 has " + std::to_string(parts.size()) + " entries, covariates have " +
                                          std::to_string(table.dim()));
  }
  Eigen::VectorXd x0(table.dim());
  for (Index j = 0; j < table.dim(); ++j) {
    const std::string& p = parts[static_cast<std::size_t>(j)];
    if (p.rfind("q:", 0) == 0) {
      x0(j) = covariate_quantile(table, j, parse_number(p.substr(2), "quantile level"));
    } else {
      x0(j) = parse_number(p, "x0");
    }
  }
  return x0;
}

std::string format_csv(const std::vector<std::string>& header, const std::vector<const Eigen::VectorXd*>& cols) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const Index rows = cols.front()->size();
  for (Index i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << (*cols[c])(i);
    out << '\n';
  }
  return out.str();
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

struct Loaded {
  ObservationTable table;
  LoadReport report;
  std::vector<Index> subset;
};

Loaded load(const RunConfig& cfg) {
  if (cfg.data.empty()) throw Error("config_error", "--data is required");
  Loaded l;
  ColumnMap cols = cfg.columns;
  if (cols.x.empty()) cols.x = {"x"};
  l.table = load_csv(cfg.data, cols, &l.report);
  for (const auto& name : cfg.subset) {
    const auto it = std::find(cols.x.begin(), cols.x.end(), name);
    if (it == cols.x.end()) throw Error("missing_column", "missing column '" + name + "' for the subset regime");
    l.subset.push_back(static_cast<Index>(it - cols.x.begin()));
  }
  return l;
}

AnalysisSettings settings_from(const RunConfig& cfg, Index kernel_dim) {
  AnalysisSettings s;
  s.regime = parse_regime(cfg.regime);
  s.kernel = parse_kernel_family(cfg.kernel);
  if (cfg.bandwidth == "auto") {
    s.bandwidth = parse_bandwidth_rule(kernel_dim == 1 ? "mc_rule" : "app_rule");
  } else {
    s.bandwidth = parse_bandwidth_rule(cfg.bandwidth, cfg.h);
  }
  s.tuning = {parse_tuning_rate(cfg.rate), cfg.c};
  s.trim = cfg.trim;
  s.m_y = cfg.m_y;
  s.m_delta = cfg.m_delta;
  s.pad = cfg.pad;
  return s;
}

struct Prepared {
  Loaded data;
  AnalysisSettings settings;
  Eigen::VectorXd x0;
  LocalAnalysis analysis;
};

Prepared prepare(const RunConfig& cfg, const std::string& point) {
  Prepared p;
  p.data = load(cfg);
  const Regime regime = parse_regime(cfg.regime);
  if (regime == Regime::subset && p.data.subset.empty()) {
    throw Error("config_error", "subset regime needs the subset covariate list");
  }
  const ObservationTable point_space =
      regime == Regime::subset ? p.data.table.project(p.data.subset) : p.data.table;
  p.settings = settings_from(cfg, point_space.dim());
  p.settings.subset_columns = p.data.subset;
  p.x0 = resolve_point(point, point_space);
  p.analysis = analyze_at(p.data.table, p.x0, p.settings);
  return p;
}

BootstrapConfig boot_from(const RunConfig& cfg) {
  BootstrapConfig b;
  b.m = cfg.boot_m;
  b.alpha = cfg.alpha;
  b.seed = cfg.seed;
  b.validate();
  return b;
}

json diagnostics(const RunConfig& cfg, const Prepared& p) {
  const LocalAnalysis& a = p.analysis;
  json j;
  j["regime"] = cfg.regime;
  j["n"] = p.data.table.size();
  j["rows_read"] = p.data.report.rows_read;
  j["rows_dropped"] = p.data.report.rows_dropped;
  j["x0"] = to_json(p.x0);
  j["kernel"] = cfg.kernel;
  j["bandwidth_rule"] = to_string(p.settings.bandwidth.kind);
  j["h"] = a.h;
  j["r_n"] = a.r_n;
  j["a_n"] = a.a_n;
  j["tuning_rate"] = cfg.rate;
  j["tuning_c"] = cfg.c;
  j["m_y"] = a.grids.y_grid.size();
  j["m_delta"] = a.grids.delta_grid.size();
  j["local_propensity"] = a.diag.local_propensity;
  j["effective_n1"] = a.diag.effective_n1;
  j["effective_n0"] = a.diag.effective_n0;
  j["propensity_warning"] = a.diag.propensity_warning;
  j["marginal_crossings"] = a.makarov.curve.crossings;
  j["empty_intervals"] = a.makarov.curve.empty_intervals;
  j["flagged_rows"] = a.flagged_rows;
  return j;
}

std::string argsets_json(const BoundsCurve& c) {
  json j;
  j["a_n"] = c.a_n;
  j["argsup_sets"] = c.argsup_sets;
  j["arginf_sets"] = c.arginf_sets;
  return j.dump();
}

std::string bounds_csv(const LocalAnalysis& a) {
  const auto& c = a.makarov.curve;
  return format_csv({"delta", "lower", "upper"}, {&a.grids.delta_grid, &c.lower, &c.upper});
}

// Accepts a "null" column, or a column named after the tested side (so a
// bounds.csv from estimate works as a null file).
Eigen::VectorXd read_null_curve(const std::string& spec, const std::string& side,
                                const Eigen::VectorXd& delta_grid) {
  if (spec == "normal") return null_lower_curve(delta_grid);
  std::ifstream in(spec);
  if (!in) throw Error("io_error", "cannot open null curve file " + spec);
  std::string line;
  if (!std::getline(in, line)) throw Error("config_error", "empty null curve file");
  const auto header = split(line, ',');
  const auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("missing_column", "missing column '" + name + "' in null curve file");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id = find("delta");
  const bool has_null = std::find(header.begin(), header.end(), "null") != header.end();
  const std::size_t iv = find(has_null ? "null" : side);
  std::vector<double> deltas, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() <= std::max(id, iv)) throw Error("non_numeric_cell", "short row in null curve file");
    deltas.push_back(parse_number(cells[id], "delta"));
    values.push_back(parse_number(cells[iv], "null value"));
  }
  if (static_cast<Index>(values.size()) != delta_grid.size()) {
    throw Error("dimension_mismatch", "null curve length does not match the delta grid");
  }
  Eigen::VectorXd out(delta_grid.size());
  for (Index j = 0; j < delta_grid.size(); ++j) {
    const double tol = 1e-8 * std::max(1.0, std::abs(delta_grid(j)));
    if (std::abs(deltas[static_cast<std::size_t>(j)] - delta_grid(j)) > tol) {
      throw Error("dimension_mismatch", "null curve deltas do not match the delta grid");
    }
    out(j) = values[static_cast<std::size_t>(j)];
  }
  return out;
}

json test_json(const TestResult& t, const std::string& kind) {
  json j;
  j["test"] = kind;
  j["statistic"] = t.statistic;
  j["critical_value"] = t.critical_value;
  j["reject"] = t.reject;
  j["p_value"] = t.p_value;
  j["bootstrap_draws"] = t.bootstrap_draws;
  return j;
}

}  // namespace

void apply_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config_error", std::string("invalid config JSON: ") + e.what());
  }
  try {
    take(j, "command", cfg.command);
    take(j, "data", cfg.data);
    take(j, "y", cfg.columns.y);
    take(j, "d", cfg.columns.d);
    take(j, "x", cfg.columns.x);
    take(j, "regime", cfg.regime);
    if (j.contains("x0") && j["x0"].is_number()) {
      std::ostringstream s;
      s << std::setprecision(17) << j["x0"].get<double>();
      cfg.x0 = s.str();
    } else {
      take(j, "x0", cfg.x0);
    }
    take(j, "x0_b", cfg.x0_b);
    take(j, "subset", cfg.subset);
    take(j, "kernel", cfg.kernel);
    take(j, "bandwidth", cfg.bandwidth);
    take(j, "h", cfg.h);
    take(j, "rate", cfg.rate);
    take(j, "c", cfg.c);
    take(j, "trim", cfg.trim);
    take(j, "m_y", cfg.m_y);
    take(j, "m_delta", cfg.m_delta);
    take(j, "pad", cfg.pad);
    take(j, "alpha", cfg.alpha);
    take(j, "boot_m", cfg.boot_m);
    take(j, "seed", cfg.seed);
    take(j, "out", cfg.out);
    take(j, "null", cfg.null_curve);
    take(j, "side", cfg.side);
    take(j, "p", cfg.p);
    take(j, "reps", cfg.reps);
    take(j, "n", cfg.n);
    take(j, "c_values", cfg.c_values);
    take(j, "rates", cfg.rates);
  } catch (const json::exception& e) {
    throw Error("config_error", std::string("bad config value: ") + e.what());
  }
}

std::map<std::string, std::string> execute(const RunConfig& cfg, std::ostream& summary) {
  std::map<std::string, std::string> files;
  summary << std::fixed << std::setprecision(4);
  const std::string& cmd = cfg.command;

  if (cmd == "estimate" || cmd == "bands" || cmd == "test") {
    const Prepared p = prepare(cfg, cfg.x0);
    const LocalAnalysis& a = p.analysis;
    files["bounds.csv"] = bounds_csv(a);
    files["diagnostics.json"] = diagnostics(cfg, p).dump(2);
    files["argsets.json"] = argsets_json(a.makarov.curve);
    summary << "regime " << cfg.regime << "  n " << p.data.table.size() << "  h " << a.h << "  r_n " << a.r_n
            << "  a_n " << a.a_n << '\n';
    if (cmd == "estimate") return files;

    const BootstrapConfig boot = boot_from(cfg);
    const ProcessDraws proc = simulate_processes(a.influence, boot, a.r_n);
    const HddDraws draws = hdd_draws(a.makarov.curve, proc, a.grids, boot.workers);
    if (cmd == "bands") {
      const BandResult b = confidence_bands(a.makarov.curve, draws, boot, a.r_n);
      const auto& c = a.makarov.curve;
      files["bands.csv"] = format_csv(
          {"delta", "lower", "upper", "lower_lo", "lower_hi", "upper_lo", "upper_hi", "raw_lower_lo", "raw_lower_hi",
           "raw_upper_lo", "raw_upper_hi", "idset_lo", "idset_hi"},
          {&a.grids.delta_grid, &c.lower, &c.upper, &b.lower_lo, &b.lower_hi, &b.upper_lo, &b.upper_hi,
           &b.raw_lower_lo, &b.raw_lower_hi, &b.raw_upper_lo, &b.raw_upper_hi, &b.idset_lo, &b.idset_hi});
      json q;
      q["c_lower"] = b.c_lower;
      q["c_upper"] = b.c_upper;
      q["r_n"] = b.r_n;
      q["a_n"] = a.a_n;
      q["alpha"] = boot.alpha;
      q["m"] = boot.m;
      q["seed"] = boot.seed;
      files["quantiles.json"] = q.dump(2);
      summary << "c_L " << b.c_lower << "  c_U " << b.c_upper << '\n';
      return files;
    }
    const Side side = parse_side(cfg.side);
    const Eigen::VectorXd null = read_null_curve(cfg.null_curve, cfg.side, a.grids.delta_grid);
    const TestResult t = ks_test(a.makarov.curve, null, side, draws, boot, a.r_n);
    json j = test_json(t, "ks_" + to_string(side));
    j["alpha"] = boot.alpha;
    files["test.json"] = j.dump(2);
    summary << "KS " << t.statistic << "  crit " << t.critical_value << "  p " << t.p_value
            << (t.reject ? "  reject" : "  accept") << '\n';
    return files;
  }

  if (cmd == "compare") {
    if (cfg.x0_b.empty()) throw Error("config_error", "compare needs x0_b");
    const Prepared pa = prepare(cfg, cfg.x0);
    const Prepared pb = prepare(cfg, cfg.x0_b);
    const BootstrapConfig boot = boot_from(cfg);
    const ProcessDraws proc_a = simulate_processes(pa.analysis.influence, boot, pa.analysis.r_n, 1);
    const ProcessDraws proc_b = simulate_processes(pb.analysis.influence, boot, pb.analysis.r_n, 2);
    const TestResult t = equality_test(pa.analysis.makarov.curve, pb.analysis.makarov.curve, cfg.p, proc_a, proc_b,
                                       pa.analysis.grids, pb.analysis.grids, boot, pa.analysis.r_n);
    json j = test_json(t, "equality_lower");
    j["p"] = cfg.p;
    j["alpha"] = boot.alpha;
    j["x0_a"] = to_json(pa.x0);
    j["x0_b"] = to_json(pb.x0);
    files["compare.json"] = j.dump(2);
    summary << "L^p " << t.statistic << "  crit " << t.critical_value << "  p " << t.p_value
            << (t.reject ? "  reject" : "  accept") << '\n';
    return files;
  }

  if (cmd == "simulate") {
    Table1Options opt;
    opt.reps = cfg.reps;
    opt.n = cfg.n;
    opt.m_boot = cfg.boot_m;
    opt.alpha = cfg.alpha;
    opt.c_values = cfg.c_values;
    opt.rates.clear();
    for (const auto& r : cfg.rates) opt.rates.push_back(parse_tuning_rate(r));
    opt.base_seed = cfg.seed;
    opt.m_y = cfg.m_y;
    opt.m_delta = cfg.m_delta;
    opt.pad = cfg.pad;
    opt.kernel = parse_kernel_family(cfg.kernel);
    const McReport rep = run_table1(opt);
    std::ostringstream csv;
    rep.write_csv(csv);
    files["table1.csv"] = csv.str();
    files["table1.json"] = rep.to_json();
    summary << csv.str();
    return files;
  }

  throw Error("config_error", "unknown command '" + cmd + "'");
}

void write_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io_error", "cannot create output directory " + dir.string());
  for (const auto& [name, content] : files) {
    const auto target = dir / name;
    const auto tmp = dir / ("." + name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.flush();
      if (!out) throw Error("io_error", "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      throw Error("io_error", "cannot move output into place: " + target.string());
    }
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string config_path;
  std::string x_cols;
  std::string subset_cols;

  CLI::App app{"Bounds on the conditional distribution of treatment effects"};
  app.set_help_flag("--help", "print this help");
  app.add_option("--command", cfg.command, "estimate | bands | test | compare | simulate");
  app.add_option("--data", cfg.data, "CSV file with outcome, treatment and covariates");
  app.add_option("--config", config_path, "JSON config; its keys override flags");
  app.add_option("--regime", cfg.regime, "point_id | manski | fsd1 | fsd2 | fsd_both | subset");
  app.add_option("--x0", cfg.x0, "conditioning point, e.g. 0.3 or q:0.2");
  app.add_option("--x0-b", cfg.x0_b, "second conditioning point for compare");
  app.add_option("--alpha", cfg.alpha, "significance level");
  app.add_option("--boot-m", cfg.boot_m, "bootstrap iterations");
  app.add_option("--seed", cfg.seed, "bootstrap / simulation seed");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--y", cfg.columns.y, "outcome column");
  app.add_option("--d", cfg.columns.d, "treatment column");
  app.add_option("--x", x_cols, "covariate columns, comma separated");
  app.add_option("--subset", subset_cols, "covariates of X1 for the subset regime");
  app.add_option("--kernel", cfg.kernel, "epanechnikov | biweight | triweight");
  app.add_option("--bandwidth", cfg.bandwidth, "auto | mc_rule | app_rule | manual");
  app.add_option("--h", cfg.h, "manual bandwidth");
  app.add_option("--rate", cfg.rate, "loglog | sqrtlog | power16");
  app.add_option("--c", cfg.c, "tuning constant");
  app.add_option("--m-y", cfg.m_y, "outcome grid size");
  app.add_option("--m-delta", cfg.m_delta, "treatment-effect grid size");
  app.add_option("--null", cfg.null_curve, "null curve CSV (delta,null) or 'normal'");
  app.add_option("--side", cfg.side, "lower | upper");
  app.add_option("--p", cfg.p, "norm order for compare");
  app.add_option("--reps", cfg.reps, "Monte Carlo replications");
  app.add_option("--n", cfg.n, "Monte Carlo sample size");

  const auto fail = [&](const std::string& code, const std::string& message) {
    err << json{{"error", code}, {"message", message}}.dump() << '\n';
    return 1;
  };

  std::vector<const char*> argv{"tebounds"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("config_error", e.what());
  }

  try {
    if (!x_cols.empty()) cfg.columns.x = split(x_cols, ',');
    if (!subset_cols.empty()) cfg.subset = split(subset_cols, ',');
    if (!config_path.empty()) apply_config_file(config_path, cfg);
    if (cfg.command.empty()) throw Error("config_error", "--command is required");
    const auto files = execute(cfg, out);
    write_outputs(cfg.out, files);
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal_error", e.what());
  }
  return 0;
}

}  // namespace tebounds
