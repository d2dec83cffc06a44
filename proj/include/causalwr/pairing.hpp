#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "causalwr/dataset.hpp"
#include "causalwr/famd.hpp"
#include "causalwr/model.hpp"

namespace causalwr {

enum class MetricKind { Euclidean, Mahalanobis, LatentEuclidean };

// Covariate distance. Every kind is realised as a map into a space where the
// plain Euclidean distance applies (embed), which keeps the neighbour scans
// and assignment costs metric-agnostic.
class Metric {
 public:
  // Euclidean on distance_features(), optionally with per-feature weights
  // (distance^2 = sum_k w_k (a_k - b_k)^2).
  static Metric euclidean(std::vector<double> weights = {});
  // (a-b)' M (a-b) with M symmetric positive definite.
  static Metric mahalanobis(const Eigen::MatrixXd& precision);
  static Metric latent(FamdProjection projection);

  MetricKind kind() const noexcept { return kind_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const Eigen::MatrixXd& precision() const noexcept { return precision_; }
  const std::optional<FamdProjection>& projection() const noexcept { return projection_; }

  RowMatrix embed(const Dataset& d) const;

  // Distance between two rows of distance_features() (Euclidean and
  // Mahalanobis kinds only).
  double distance(std::span<const double> a, std::span<const double> b) const;

 private:
  MetricKind kind_ = MetricKind::Euclidean;
  std::vector<double> weights_;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd factor_;  // upper Cholesky factor U with U'U = precision
  std::optional<FamdProjection> projection_;
};

// Mahalanobis metric from the sample covariance of distance_features(),
// regularised as Sigma + ridge * trace(Sigma)/p * I before inversion.
Metric mahalanobis_metric(const Dataset& d, double ridge = 1e-6);
// Mahalanobis metric with precision (cov + absolute_ridge * I)^-1.
Metric mahalanobis_from_covariance(const Eigen::MatrixXd& cov, double absolute_ridge = 0.0);

// Cartesian product controls x treated, control-major.
PairSet complete_pairs(const Dataset& d);

// For every query unit, the k candidate units with the smallest Euclidean
// distance in `points`. Exact distance ties at the k-th position are broken
// uniformly at random from a stream derived from (seed, query index), so the
// result does not depend on scheduling. Each inner vector is sorted by
// (distance, candidate index).
std::vector<std::vector<std::uint32_t>> nearest_neighbors(const RowMatrix& points,
                                                          std::span<const std::size_t> queries,
                                                          std::span<const std::size_t> candidates, std::size_t k,
                                                          std::uint64_t seed);

// Each control paired with its k nearest treated units (with replacement).
PairSet knn_pairs(const Dataset& d, const Metric& m, std::size_t k = 1, std::uint64_t seed = 0);

// sigma maps used by the augmented estimator: for arm t, the nearest unit in
// the opposite arm of every unit of arm t (indexed by dataset row; entries
// for units of the other arm are unused).
std::vector<std::uint32_t> nearest_opposite_map(const Dataset& d, const RowMatrix& points, int from_arm,
                                                std::uint64_t seed);

struct StratifiedPairs {
  PairSet pairs;
  // Labels of strata lacking one of the arms; they contribute no pairs.
  std::vector<std::int64_t> degenerate_strata;
};

// Union over strata of (controls in s) x (treated in s), strata in ascending
// label order, control-major within a stratum.
StratifiedPairs stratified_pairs(const Dataset& d, std::span<const std::int64_t> labels);

struct QuantileStrata {
  std::vector<std::int64_t> labels;
  std::vector<double> cutpoints;
  bool single_stratum = false;  // set when the column is constant
};

// Labels by q-quantile bins (type-7 cut points) of a numeric covariate; a
// value equal to a cut point goes to the lower bin. q=2 is the median split.
QuantileStrata quantile_strata(const Dataset& d, std::size_t column, std::size_t q);

// Injective matching of the smaller arm into the larger one minimising the
// total squared metric distance (exact assignment).
PairSet optimal_match_pairs(const Dataset& d, const Metric& m);

// Sum of squared embedded distances over the pairs.
double matching_cost(const RowMatrix& points, const PairSet& pairs);

// Min-cost assignment of every row to a distinct column, rows <= cols.
// Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace causalwr
