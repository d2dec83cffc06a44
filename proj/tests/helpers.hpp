#pragma once

#include <random>
#include <vector>

#include "causalwr/dataset.hpp"

namespace testing {

using causalwr::Dataset;
using causalwr::RowMatrix;

// Six patients: four men (X=0), two women (X=1); treated units 0, 2, 4.
inline Dataset example_one_table() {
  Eigen::MatrixXd x(6, 1);
  x << 0, 0, 0, 0, 1, 1;
  RowMatrix y(6, 1);
  y << 2, 1, 2, 1, 0, 3;
  return Dataset::numeric(x, {1, 0, 1, 0, 1, 0}, y);
}

// Random dataset with both arms present; outcomes on a small integer grid so
// that ties occur.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p, std::size_t d, int levels = 3) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> value(0, levels - 1);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
  std::vector<int> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = i < 2 ? static_cast<int>(i) : std::bernoulli_distribution(0.5)(rng);
  RowMatrix y(n, d);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index k = 0; k < y.cols(); ++k) y(i, k) = value(rng);
  return Dataset::numeric(x, t, y);
}

}  // namespace testing
