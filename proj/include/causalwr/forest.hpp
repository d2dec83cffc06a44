#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "causalwr/dataset.hpp"

namespace causalwr {

struct ForestOptions {
  std::size_t trees = 500;
  std::size_t min_leaf = 5;
  double sample_fraction = 0.5;  // subsample drawn without replacement per tree
  std::size_t mtry = 0;          // candidate features per split; 0 means all
  std::size_t max_depth = 0;     // 0 means unlimited
  bool honesty = true;           // grow on half the subsample, fill leaves with the other half

  void validate() const;
};

// Leaf weights ω_i(x) over a training sample.
using SparseWeights = std::vector<std::pair<std::uint32_t, double>>;

// Ensemble of axis-aligned regression trees grown on a multi-output response
// with the summed variance-reduction criterion. Predictions are expressed as
// leaf co-membership weights: ω_i(x) = (1/B) Σ_b 1{i ∈ leaf_b(x)} / |leaf_b(x)|.
class Forest {
 public:
  static Forest fit(const RowMatrix& x, const RowMatrix& y, const ForestOptions& options, std::uint64_t seed);

  std::size_t tree_count() const noexcept { return trees_.size(); }
  std::size_t training_size() const noexcept { return n_; }
  std::size_t feature_count() const noexcept { return p_; }
  const ForestOptions& options() const noexcept { return options_; }

  // Non-negative weights summing to one, sorted by training index. Trees whose
  // leaf holds no estimation units are skipped.
  SparseWeights weights(const double* features) const;

  // Average over trees of the leaf mean of response column `column`.
  double predict_mean(const double* features, std::size_t column = 0) const;
  // Same, restricted to trees whose subsample excludes training row `row`;
  // falls back to all trees when no such tree exists.
  double predict_oob_mean(std::size_t row, std::size_t column = 0) const;

 private:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t begin = 0;  // leaf members in [begin, end) of Tree::members
    std::uint32_t end = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<std::uint32_t> members;
    std::vector<bool> in_sample;
  };

  const Node& leaf_for(const Tree& tree, const double* features) const;
  double leaf_mean(const Tree& tree, const Node& leaf, std::size_t column) const;

  ForestOptions options_;
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  RowMatrix x_;
  RowMatrix y_;
  std::vector<Tree> trees_;
};

}  // namespace causalwr
