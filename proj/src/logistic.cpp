#include "causalwr/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "causalwr/errors.hpp"

namespace causalwr {

double expit(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogisticFit::predict(const double* features, std::size_t count) const {
  double eta = coefficients(0);
  for (std::size_t k = 0; k < count; ++k) eta += coefficients(static_cast<Eigen::Index>(k + 1)) * features[k];
  return expit(eta);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double mean_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double total) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) s += w(i) * (y(i) * eta(i) - softplus(eta(i)));
  return s / total;
}

}  // namespace

LogisticFit fit_logistic(const RowMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                         const LogisticOptions& options) {
  const Eigen::Index n = x.rows();
  if (n == 0) throw InvalidInput("logistic fit on an empty sample");
  if (y.size() != n) throw InvalidInput("logistic response length does not match the design");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(y(i) >= 0.0 && y(i) <= 1.0)) throw InvalidInput("logistic response must lie in [0, 1] (row " + std::to_string(i) + ")");
  Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(n) : weights;
  if (w.size() != n) throw InvalidInput("logistic weights length does not match the design");
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidInput("logistic weights sum to zero");

  const Eigen::Index p = x.cols() + 1;
  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;

  LogisticFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  // Start the intercept at the weighted log-odds of the response.
  const double ybar = std::clamp(w.dot(y) / total, 1e-6, 1 - 1e-6);
  fit.coefficients(0) = std::log(ybar / (1 - ybar));

  Eigen::VectorXd eta = design * fit.coefficients;
  double objective = mean_loglik(eta, y, w, total);
  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    Eigen::VectorXd mu(n), curvature(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = expit(eta(i));
      curvature(i) = w(i) * mu(i) * (1 - mu(i));
    }
    const Eigen::VectorXd gradient = design.transpose() * (w.cwiseProduct(y - mu)) / total;
    fit.gradient_norm = gradient.norm();
    if (fit.gradient_norm <= options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    Eigen::MatrixXd hessian = design.transpose() * curvature.asDiagonal() * design / total;
    hessian.diagonal().array() += 1e-12 * (1.0 + hessian.diagonal().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    Eigen::VectorXd step = ldlt.solve(gradient);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = gradient;

    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving, scale *= 0.5) {
      const Eigen::VectorXd candidate = fit.coefficients + scale * step;
      const Eigen::VectorXd candidate_eta = design * candidate;
      const double value = mean_loglik(candidate_eta, y, w, total);
      if (std::isfinite(value) && value >= objective) {
        fit.coefficients = candidate;
        eta = candidate_eta;
        objective = value;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!fit.converged && fit.gradient_norm <= options.gradient_tolerance) fit.converged = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = expit(eta(i));
    if (w(i) > 0 && (mu < 1e-10 || mu > 1 - 1e-10)) {
      fit.separation = true;
      break;
    }
  }
  return fit;
}

}  // namespace causalwr
