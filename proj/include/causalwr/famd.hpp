#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "causalwr/dataset.hpp"

namespace causalwr {

// Factor analysis of mixed data, reduced to its core: numeric columns are
// standardised, categorical columns become centred indicators scaled by
// 1/sqrt(level frequency), and the resulting matrix goes through a PCA.
struct FamdProjection {
  std::vector<CovariateColumn> schema;
  // Per schema column; only meaningful for numeric columns.
  std::vector<double> means;
  std::vector<double> sds;
  // Per schema column; training frequency of each level (categorical only).
  std::vector<std::vector<double>> level_frequencies;

  // Principal axes (columns) sorted by decreasing eigenvalue.
  Eigen::MatrixXd axes;
  Eigen::VectorXd eigenvalues;
  std::size_t components = 0;
  double explained_variance = 0.0;  // cumulative share of the retained prefix
  double variance_kept = 0.95;

  // Preprocessed (standardised / scaled indicator) matrix before projection.
  RowMatrix preprocess(const Dataset& d) const;
};

// Keeps the minimal prefix of axes whose cumulative explained variance
// reaches `variance_kept` (in (0, 1]).
FamdProjection famd_fit(const Dataset& d, double variance_kept = 0.95);

// Scores of `d` on the retained axes. Categorical levels are matched by
// label; a level absent from the training data raises InvalidInput.
RowMatrix famd_apply(const FamdProjection& projection, const Dataset& d);

}  // namespace causalwr
