#include "tebounds/kernel.hpp"

#include <cmath>

namespace tebounds {

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "epanechnikov") return KernelFamily::epanechnikov;
  if (name == "biweight") return KernelFamily::biweight;
  if (name == "triweight") return KernelFamily::triweight;
  throw Error("config_error", "unknown kernel family '" + std::string(name) + "'");
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::biweight: return "biweight";
    case KernelFamily::triweight: return "triweight";
  }
  return "unknown";
}

KernelMoments kernel_moments(KernelFamily family, int intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double step = 2.0 / intervals;
  KernelMoments m{0.0, 0.0, 0.0};
  for (int i = 0; i <= intervals; ++i) {
    const double u = -1.0 + step * i;
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double k = univariate_kernel(family, u);
    m.mass += w * k;
    m.first += w * u * k;
    m.second += w * u * u * k;
  }
  m.mass *= step / 3.0;
  m.first *= step / 3.0;
  m.second *= step / 3.0;
  return m;
}

KernelSpec::KernelSpec(KernelFamily family, Index dim) : family_(family), dim_(dim) {
  if (dim < 1) throw Error("invalid_argument", "kernel dimension must be positive");
  const auto m = kernel_moments(family);
  if (std::abs(m.mass - 1.0) > 1e-6 || std::abs(m.first) > 1e-6 || !std::isfinite(m.second)) {
    throw Error("invalid_kernel", "kernel " + to_string(family) + " fails its moment conditions");
  }
  k2_ = m.second;
}

Eigen::VectorXd kernel_weights(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& x0, double h) {
  if (x.cols() != x0.size() || x.cols() != kernel.dim()) {
    throw Error("dimension_mismatch", "covariates, conditioning point and kernel disagree in dimension");
  }
  if (!(h > 0.0)) throw Error("invalid_argument", "bandwidth must be positive");
  Eigen::VectorXd w(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    w(i) = kernel((x.row(i).transpose() - x0) / h);
  }
  return w;
}

BandwidthRule parse_bandwidth_rule(std::string_view name, double manual_h) {
  if (name == "mc_rule") return {BandwidthKind::mc_rule, 0.0};
  if (name == "app_rule") return {BandwidthKind::app_rule, 0.0};
  if (name == "manual") {
    if (!(manual_h > 0.0)) throw Error("config_error", "manual bandwidth must be positive");
    return {BandwidthKind::manual, manual_h};
  }
  throw Error("config_error", "unknown bandwidth rule '" + std::string(name) + "'");
}

std::string to_string(BandwidthKind kind) {
  switch (kind) {
    case BandwidthKind::mc_rule: return "mc_rule";
    case BandwidthKind::app_rule: return "app_rule";
    case BandwidthKind::manual: return "manual";
  }
  return "unknown";
}

double bandwidth(const BandwidthRule& rule, const Eigen::MatrixXd& covariates) {
  const auto n = static_cast<double>(covariates.rows());
  if (covariates.rows() < 2) throw Error("insufficient_sample", "insufficient sample for bandwidth");
  switch (rule.kind) {
    case BandwidthKind::manual:
      if (!(rule.h > 0.0)) throw Error("invalid_argument", "manual bandwidth must be positive");
      return rule.h;
    case BandwidthKind::app_rule:
      return 1.06 * std::pow(n, -1.0 / (5.0 + static_cast<double>(covariates.cols())));
    case BandwidthKind::mc_rule: {
      if (covariates.cols() != 1) {
        throw Error("invalid_argument", "mc_rule bandwidth needs a single covariate");
      }
      const auto col = covariates.col(0);
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
      const double h = 1.06 * sd * std::pow(n, -1.0 / 6.0);
      if (!(h > 0.0)) throw Error("degenerate_covariate", "covariate has zero spread");
      return h;
    }
  }
  throw Error("invalid_argument", "unknown bandwidth rule");
}

TuningRate parse_tuning_rate(std::string_view name) {
  if (name == "loglog") return TuningRate::loglog;
  if (name == "sqrtlog") return TuningRate::sqrtlog;
  if (name == "power16") return TuningRate::power16;
  throw Error("config_error", "unknown tuning rate '" + std::string(name) + "'");
}

std::string to_string(TuningRate rate) {
  switch (rate) {
    case TuningRate::loglog: return "loglog";
    case TuningRate::sqrtlog: return "sqrtlog";
    case TuningRate::power16: return "power16";
  }
  return "unknown";
}

double rate_r_n(Index n, double h, Index d_x) {
  return std::sqrt(static_cast<double>(n) * std::pow(h, static_cast<double>(d_x)));
}

double tuning_a_n(const TuningSequence& seq, Index n, double h, Index d_x) {
  if (!(seq.c > 0.0)) throw Error("invalid_argument", "tuning scale c must be positive");
  if (!(h > 0.0) || n < 1) throw Error("invalid_argument", "need n >= 1 and h > 0");
  const double nh = static_cast<double>(n) * std::pow(h, static_cast<double>(d_x));
  double g = 0.0;
  switch (seq.rate) {
    case TuningRate::loglog:
      if (!(nh > std::exp(1.0))) {
        throw Error("invalid_argument", "loglog tuning needs n h^d > e");
      }
      g = std::log(std::log(nh));
      break;
    case TuningRate::sqrtlog:
      if (!(nh > 1.0)) throw Error("invalid_argument", "sqrtlog tuning needs n h^d > 1");
      g = std::sqrt(std::log(nh));
      break;
    case TuningRate::power16:
      g = std::pow(nh, 1.0 / 6.0);
      break;
  }
  return seq.c * g / std::sqrt(nh);
}

}  // namespace tebounds
