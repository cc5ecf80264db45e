#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tebounds {

using Index = Eigen::Index;

/// The observed sample {(Y_i, D_i, X_i)}: outcome, binary treatment, covariates.
class ObservationTable {
 public:
  ObservationTable() = default;

  /// Validating constructor: equal lengths, n >= 2, both arms present,
  /// finite y and x.
  ObservationTable(Eigen::VectorXd y, Eigen::VectorXi d, Eigen::MatrixXd x);

  Index size() const { return y_.size(); }
  Index dim() const { return x_.cols(); }

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXi& d() const { return d_; }
  const Eigen::MatrixXd& x() const { return x_; }

  /// Same rows, covariates restricted to `columns`.
  ObservationTable project(const std::vector<Index>& columns) const;

 private:
  Eigen::VectorXd y_;
  Eigen::VectorXi d_;
  Eigen::MatrixXd x_;
};

struct ColumnMap {
  std::string y = "y";
  std::string d = "d";
  std::vector<std::string> x;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

/// Parses a headered CSV. Rows with an empty / NA / non-finite field are
/// dropped and counted; anything else unparsable is an error.
ObservationTable parse_csv(std::istream& in, const ColumnMap& columns, LoadReport* report = nullptr);
ObservationTable load_csv(const std::filesystem::path& path, const ColumnMap& columns,
                          LoadReport* report = nullptr);
void write_csv(std::ostream& out, const ObservationTable& table, const ColumnMap& columns);

/// Outcome grid, treatment-effect grid and the conditioning point.
struct EvalGrids {
  Eigen::VectorXd y_grid;
  Eigen::VectorXd delta_grid;
  Eigen::VectorXd x0;
};

EvalGrids make_grids(const ObservationTable& table, const Eigen::VectorXd& x0, Index m_y,
                     Index m_delta, double pad,
                     std::optional<std::pair<double, double>> delta_range = std::nullopt);

/// Equally spaced points on [lo, hi].
Eigen::VectorXd linspace(double lo, double hi, Index count);

/// Type-7 sample quantile of one covariate column.
double covariate_quantile(const ObservationTable& table, Index column, double tau);

}  // namespace tebounds
