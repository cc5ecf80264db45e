#include "tebounds/conditional_cdf.hpp"
#include "tebounds/error.hpp"

#include <cmath>

namespace tebounds {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Eigen::MatrixXd design(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

double mean_loglik(const Eigen::MatrixXd& z, const Eigen::VectorXd& d, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd eta = z * theta;
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) ll += d(i) * eta(i) - softplus(eta(i));
  return ll / static_cast<double>(eta.size());
}

constexpr double kSeparationIndex = 30.0;

}  // namespace

double PropensityModel::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() + 1 != theta.size()) throw Error("dimension_mismatch", "propensity input dimension");
  return sigmoid(theta(0) + x.dot(theta.tail(x.size())));
}

Eigen::VectorXd PropensityModel::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() + 1 != theta.size()) throw Error("dimension_mismatch", "propensity input dimension");
  const Eigen::VectorXd eta = design(x) * theta;
  return eta.unaryExpr([](double e) { return sigmoid(e); });
}

PropensityModel fit_propensity(const ObservationTable& table) {
  const Eigen::MatrixXd z = design(table.x());
  const Eigen::VectorXd d = table.d().cast<double>();
  const auto n = static_cast<double>(table.size());

  PropensityModel model;
  model.theta = Eigen::VectorXd::Zero(z.cols());
  const double share = d.mean();
  model.theta(0) = std::log(share / (1.0 - share));

  double ll = mean_loglik(z, d, model.theta);
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd eta = z * model.theta;
    const Eigen::VectorXd p = eta.unaryExpr([](double e) { return sigmoid(e); });
    const Eigen::VectorXd score = z.transpose() * (d - p) / n;
    model.iterations = it;
    if (score.lpNorm<Eigen::Infinity>() < 1e-8) {
      converged = true;
      break;
    }
    if (eta.cwiseAbs().maxCoeff() > kSeparationIndex) break;
    const Eigen::VectorXd v = p.cwiseProduct(Eigen::VectorXd::Ones(p.size()) - p);
    const Eigen::MatrixXd info = z.transpose() * v.asDiagonal() * z / n;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd step = ldlt.solve(score);

    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      const Eigen::VectorXd candidate = model.theta + scale * step;
      const double cand_ll = mean_loglik(z, d, candidate);
      if (std::isfinite(cand_ll) && cand_ll >= ll) {
        model.theta = candidate;
        ll = cand_ll;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  const Eigen::VectorXd eta = z * model.theta;
  if (eta.cwiseAbs().maxCoeff() > kSeparationIndex) {
    throw Error("perfect_separation", "perfect separation: the logit index diverges");
  }
  if (!converged) {
    throw Error("no_convergence", "propensity fit did not converge in 100 iterations");
  }
  model.fitted = true;
  return model;
}

}  // namespace tebounds
