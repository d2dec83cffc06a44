#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "causalwr/dataset.hpp"

namespace causalwr {

double expit(double z) noexcept;

struct LogisticOptions {
  std::size_t max_iterations = 100;
  double gradient_tolerance = 1e-8;  // on the mean log-likelihood gradient
};

struct LogisticFit {
  Eigen::VectorXd coefficients;  // intercept first
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  // Fitted probabilities reached 0 or 1 numerically: the data are (quasi)
  // separable and the coefficients diverge. Predictions remain usable.
  bool separation = false;

  double predict(const double* features, std::size_t count) const;
};

// Bernoulli maximum likelihood of y on (1, X) by iteratively reweighted least
// squares with step halving. Responses may be fractional in [0, 1]; optional
// non-negative case weights.
LogisticFit fit_logistic(const RowMatrix& x, const Eigen::VectorXd& y, const Eigen::VectorXd& weights = {},
                         const LogisticOptions& options = {});

}  // namespace causalwr
