#include "tebounds/data.hpp"

#include "tebounds/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unordered_map>

namespace tebounds {

ObservationTable::ObservationTable(Eigen::VectorXd y, Eigen::VectorXi d, Eigen::MatrixXd x)
    : y_(std::move(y)), d_(std::move(d)), x_(std::move(x)) {
  const Index n = y_.size();
  if (d_.size() != n || x_.rows() != n) {
    throw Error("dimension_mismatch", "y, d and x must share the same number of rows");
  }
  if (n < 2) throw Error("insufficient_sample", "insufficient sample: need at least 2 rows");
  for (Index i = 0; i < n; ++i) {
    if (d_(i) != 0 && d_(i) != 1) {
      throw Error("non_binary_treatment", "non-binary treatment value at row " + std::to_string(i));
    }
  }
  const Index treated = d_.sum();
  if (treated == 0 || treated == n) {
    throw Error("single_arm", "treatment must take both values 0 and 1");
  }
  if (!y_.allFinite() || !x_.allFinite()) {
    throw Error("non_finite", "outcome and covariates must be finite");
  }
}

ObservationTable ObservationTable::project(const std::vector<Index>& columns) const {
  Eigen::MatrixXd sub(size(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] < 0 || columns[j] >= dim()) {
      throw Error("dimension_mismatch", "covariate index out of range");
    }
    sub.col(static_cast<Index>(j)) = x_.col(columns[j]);
  }
  return ObservationTable(y_, d_, std::move(sub));
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

bool is_missing(const std::string& cell) {
  std::string lower(cell);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.empty() || lower == "na" || lower == "nan" || lower == "null";
}

// Returns nullopt for a missing (droppable) cell; throws on garbage.
std::optional<double> parse_number(const std::string& cell, std::size_t line_no) {
  if (is_missing(cell)) return std::nullopt;
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error("non_numeric_cell",
                "non-numeric cell '" + cell + "' on line " + std::to_string(line_no));
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

ObservationTable parse_csv(std::istream& in, const ColumnMap& columns, LoadReport* report) {
  std::string header_line;
  if (!std::getline(in, header_line) || trim(header_line).empty()) {
    throw Error("insufficient_sample", "insufficient sample: data file is empty");
  }
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  std::unordered_map<std::string, std::size_t> position;
  const auto header = split_row(header_line);
  for (std::size_t j = 0; j < header.size(); ++j) position.emplace(trim(header[j]), j);

  const auto locate = [&](const std::string& name) {
    const auto it = position.find(name);
    if (it == position.end()) throw Error("missing_column", "missing column '" + name + "'");
    return it->second;
  };
  const std::size_t y_col = locate(columns.y);
  const std::size_t d_col = locate(columns.d);
  std::vector<std::size_t> x_cols;
  for (const auto& name : columns.x) x_cols.push_back(locate(name));

  std::vector<double> ys;
  std::vector<int> ds;
  std::vector<double> xs;
  LoadReport local;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++local.rows_read;
    const auto cells = split_row(line);
    const auto cell = [&](std::size_t j) { return j < cells.size() ? trim(cells[j]) : std::string(); };

    const auto y = parse_number(cell(y_col), line_no);
    const auto d = parse_number(cell(d_col), line_no);
    if (d && *d != 0.0 && *d != 1.0) {
      throw Error("non_binary_treatment",
                  "non-binary treatment value '" + cell(d_col) + "' on line " + std::to_string(line_no));
    }
    bool missing = !y || !d;
    std::vector<double> row;
    for (const auto j : x_cols) {
      const auto v = parse_number(cell(j), line_no);
      if (!v) missing = true;
      row.push_back(v.value_or(0.0));
    }
    if (missing) {
      ++local.rows_dropped;
      continue;
    }
    ys.push_back(*y);
    ds.push_back(static_cast<int>(*d));
    xs.insert(xs.end(), row.begin(), row.end());
  }
  if (local.rows_dropped > 0) {
    std::cerr << "warning: dropped " << local.rows_dropped << " of " << local.rows_read
              << " rows with missing fields\n";
  }
  if (report) *report = local;
  if (ys.size() < 2) {
    throw Error("insufficient_sample", "insufficient sample: " + std::to_string(ys.size()) +
                                           " usable rows, need at least 2");
  }
  const auto n = static_cast<Index>(ys.size());
  const auto k = static_cast<Index>(x_cols.size());
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  Eigen::VectorXi d = Eigen::Map<Eigen::VectorXi>(ds.data(), n);
  Eigen::MatrixXd x(n, k);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) x(i, j) = xs[static_cast<std::size_t>(i * k + j)];
  }
  return ObservationTable(std::move(y), std::move(d), std::move(x));
}

ObservationTable load_csv(const std::filesystem::path& path, const ColumnMap& columns,
                          LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open data file " + path.string());
  return parse_csv(in, columns, report);
}

void write_csv(std::ostream& out, const ObservationTable& table, const ColumnMap& columns) {
  out << columns.y << ',' << columns.d;
  for (const auto& name : columns.x) out << ',' << name;
  out << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < table.size(); ++i) {
    out << table.y()(i) << ',' << table.d()(i);
    for (Index j = 0; j < table.dim(); ++j) out << ',' << table.x()(i, j);
    out << '\n';
  }
}

Eigen::VectorXd linspace(double lo, double hi, Index count) {
  Eigen::VectorXd out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (Index k = 0; k < count; ++k) out(k) = lo + step * static_cast<double>(k);
  out(count - 1) = hi;
  return out;
}

EvalGrids make_grids(const ObservationTable& table, const Eigen::VectorXd& x0, Index m_y,
                     Index m_delta, double pad,
                     std::optional<std::pair<double, double>> delta_range) {
  if (m_y < 3 || m_delta < 3) throw Error("invalid_argument", "grid sizes must be at least 3");
  if (!(pad >= 0.0)) throw Error("invalid_argument", "pad must be nonnegative");
  if (x0.size() != table.dim()) {
    throw Error("dimension_mismatch", "conditioning point has dimension " +
                                          std::to_string(x0.size()) + ", expected " +
                                          std::to_string(table.dim()));
  }
  const double lo = table.y().minCoeff();
  const double hi = table.y().maxCoeff();
  const double range = hi - lo;
  if (!(range > 0.0)) throw Error("degenerate_outcome", "degenerate outcome: range(y) = 0");

  EvalGrids grids;
  grids.y_grid = linspace(lo - pad * range, hi + pad * range, m_y);
  if (delta_range) {
    if (!(delta_range->second > delta_range->first)) {
      throw Error("invalid_argument", "delta range must be increasing");
    }
    grids.delta_grid = linspace(delta_range->first, delta_range->second, m_delta);
  } else {
    const double span = (1.0 + 2.0 * pad) * range;
    grids.delta_grid = linspace(-span, span, m_delta);
  }
  grids.x0 = x0;
  return grids;
}

double covariate_quantile(const ObservationTable& table, Index column, double tau) {
  if (column < 0 || column >= table.dim()) throw Error("dimension_mismatch", "no such covariate");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error("invalid_argument", "quantile level outside [0,1]");
  std::vector<double> v(table.x().col(column).data(), table.x().col(column).data() + table.size());
  std::sort(v.begin(), v.end());
  const double g = static_cast<double>(v.size() - 1) * tau;
  const auto lo = static_cast<std::size_t>(std::floor(g));
  const auto hi = static_cast<std::size_t>(std::ceil(g));
  return v[lo] + (g - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace tebounds
