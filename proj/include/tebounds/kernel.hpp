#pragma once

#include "tebounds/data.hpp"
#include "tebounds/error.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace tebounds {

enum class KernelFamily { epanechnikov, biweight, triweight };

KernelFamily parse_kernel_family(std::string_view name);
std::string to_string(KernelFamily family);

/// Univariate compactly supported polynomial kernel on [-1, 1].
template <typename Scalar>
Scalar univariate_kernel(KernelFamily family, Scalar u) {
  const Scalar a = u < Scalar(0) ? -u : u;
  if (a >= Scalar(1)) return Scalar(0);
  const Scalar q = Scalar(1) - u * u;
  switch (family) {
    case KernelFamily::epanechnikov:
      return Scalar(0.75) * q;
    case KernelFamily::biweight:
      return Scalar(15) / Scalar(16) * q * q;
    case KernelFamily::triweight:
      return Scalar(35) / Scalar(32) * q * q * q;
  }
  return Scalar(0);
}

/// Product kernel K(u) = prod_j k(u_j) of dimension `dim`.
class KernelSpec {
 public:
  /// Checks the moment conditions of the univariate member by quadrature.
  explicit KernelSpec(KernelFamily family = KernelFamily::epanechnikov, Index dim = 1);

  KernelFamily family() const { return family_; }
  Index dim() const { return dim_; }
  /// Second moment k2 of the univariate member.
  double second_moment() const { return k2_; }

  double univariate(double u) const { return univariate_kernel(family_, u); }

  template <typename Derived>
  typename Derived::Scalar operator()(const Eigen::MatrixBase<Derived>& u) const {
    using Scalar = typename Derived::Scalar;
    if (u.size() != dim_) {
      throw Error("dimension_mismatch", "kernel argument has dimension " +
                                            std::to_string(u.size()) + ", expected " +
                                            std::to_string(dim_));
    }
    Scalar w(1);
    for (Index j = 0; j < u.size() && w != Scalar(0); ++j) w *= univariate_kernel(family_, u(j));
    return w;
  }

 private:
  KernelFamily family_;
  Index dim_;
  double k2_ = 0.0;
};

/// Product-kernel weights K((X_i - x0) / h) for every row of `x`.
Eigen::VectorXd kernel_weights(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& x0, double h);

/// Composite Simpson quadrature of k, u k, u^2 k over [-1, 1].
struct KernelMoments {
  double mass;
  double first;
  double second;
};
KernelMoments kernel_moments(KernelFamily family, int intervals = 2000);

enum class BandwidthKind { mc_rule, app_rule, manual };

/// mc_rule: 1.06 sd(X) n^{-1/6}; app_rule: 1.06 n^{-1/(5+d_x)}; manual: fixed h.
struct BandwidthRule {
  BandwidthKind kind = BandwidthKind::mc_rule;
  double h = 0.0;
};

BandwidthRule parse_bandwidth_rule(std::string_view name, double manual_h = 0.0);
std::string to_string(BandwidthKind kind);

double bandwidth(const BandwidthRule& rule, const Eigen::MatrixXd& covariates);
inline double bandwidth(const BandwidthRule& rule, const ObservationTable& table) {
  return bandwidth(rule, table.x());
}

enum class TuningRate { loglog, sqrtlog, power16 };

TuningRate parse_tuning_rate(std::string_view name);
std::string to_string(TuningRate rate);

/// a_n = c * g(n h^{d_x}) / sqrt(n h^{d_x}) with g = log log, sqrt log or (.)^{1/6}.
struct TuningSequence {
  TuningRate rate = TuningRate::loglog;
  double c = 0.2;
};

double tuning_a_n(const TuningSequence& seq, Index n, double h, Index d_x);

/// sqrt(n h^{d_x}), the convergence rate of the local estimators.
double rate_r_n(Index n, double h, Index d_x);

}  // namespace tebounds
