#include "causalwr/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "causalwr/errors.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

void ForestOptions::validate() const {
  if (trees == 0) throw InvalidInput("forest needs at least one tree");
  if (min_leaf == 0) throw InvalidInput("min_leaf must be >= 1");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) throw InvalidInput("sample_fraction must lie in (0, 1]");
}

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const RowMatrix& x, const RowMatrix& y, const ForestOptions& options, Rng& rng)
      : x_(x), y_(y), options_(options), rng_(rng), features_(static_cast<std::size_t>(x.cols())) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Split best_split(std::vector<std::uint32_t>& idx, std::size_t lo, std::size_t hi) {
    const std::size_t m = hi - lo;
    const auto dy = static_cast<std::size_t>(y_.cols());
    std::vector<double> total(dy, 0.0);
    for (std::size_t r = lo; r < hi; ++r)
      for (std::size_t k = 0; k < dy; ++k) total[k] += y_(idx[r], k);
    double parent = 0.0;
    for (double s : total) parent += s * s;
    parent /= static_cast<double>(m);

    const std::size_t p = features_.size();
    const std::size_t mtry = options_.mtry == 0 ? p : std::min(options_.mtry, p);
    for (std::size_t f = 0; f < mtry; ++f) {
      std::uniform_int_distribution<std::size_t> pick(f, p - 1);
      std::swap(features_[f], features_[pick(rng_)]);
    }

    Split best;
    best.score = parent + 1e-12 * std::max(1.0, std::abs(parent));
    std::vector<std::uint32_t> order(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                     idx.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<double> left(dy);
    for (std::size_t c = 0; c < mtry; ++c) {
      const auto f = static_cast<Eigen::Index>(features_[c]);
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return x_(a, f) < x_(b, f) || (x_(a, f) == x_(b, f) && a < b);
      });
      std::fill(left.begin(), left.end(), 0.0);
      for (std::size_t s = 1; s < m; ++s) {
        for (std::size_t k = 0; k < dy; ++k) left[k] += y_(order[s - 1], k);
        if (s < options_.min_leaf || m - s < options_.min_leaf) continue;
        const double a = x_(order[s - 1], f);
        const double b = x_(order[s], f);
        if (!(a < b)) continue;
        double score_l = 0.0, score_r = 0.0;
        for (std::size_t k = 0; k < dy; ++k) {
          score_l += left[k] * left[k];
          const double right = total[k] - left[k];
          score_r += right * right;
        }
        const double score = score_l / static_cast<double>(s) + score_r / static_cast<double>(m - s);
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = a + 0.5 * (b - a);
          if (!(best.threshold < b)) best.threshold = a;
        }
      }
    }
    return best;
  }

 private:
  const RowMatrix& x_;
  const RowMatrix& y_;
  const ForestOptions& options_;
  Rng& rng_;
  std::vector<std::size_t> features_;
};

}  // namespace

Forest Forest::fit(const RowMatrix& x, const RowMatrix& y, const ForestOptions& options, std::uint64_t seed) {
  options.validate();
  if (x.rows() != y.rows()) throw InvalidInput("forest features and responses have different row counts");
  if (y.cols() == 0) throw InvalidInput("forest response has no columns");
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < options.min_leaf)
    throw InvalidInput("forest training sample has " + std::to_string(n) + " units, fewer than min_leaf=" +
                       std::to_string(options.min_leaf));
  if (!x.allFinite() || !y.allFinite()) throw InvalidInput("forest inputs must be finite");

  Forest forest;
  forest.options_ = options;
  forest.n_ = n;
  forest.p_ = static_cast<std::size_t>(x.cols());
  forest.x_ = x;
  forest.y_ = y;
  forest.trees_.resize(options.trees);
  const std::size_t sample =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(options.sample_fraction * static_cast<double>(n))),
                              std::min(n, options.min_leaf), n);

  parallel_for(options.trees, [&](std::size_t b) {
    Rng rng = make_rng(derive_seed(seed, b));
    Tree& tree = forest.trees_[b];
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0u);
    for (std::size_t r = 0; r < sample; ++r) {
      std::uniform_int_distribution<std::size_t> pick(r, n - 1);
      std::swap(all[r], all[pick(rng)]);
    }
    tree.in_sample.assign(n, false);
    for (std::size_t r = 0; r < sample; ++r) tree.in_sample[all[r]] = true;
    const bool honest = options.honesty && sample >= 2 * std::max<std::size_t>(options.min_leaf, 1) && sample >= 4;
    const std::size_t grow = honest ? sample / 2 : sample;
    std::vector<std::uint32_t> idx(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(grow));
    std::vector<std::uint32_t> fill(all.begin() + static_cast<std::ptrdiff_t>(grow),
                                    all.begin() + static_cast<std::ptrdiff_t>(sample));
    std::sort(idx.begin(), idx.end());
    std::sort(fill.begin(), fill.end());

    TreeBuilder builder(x, y, options, rng);
    struct Task {
      std::uint32_t node;
      std::size_t lo, hi, depth;
    };
    tree.nodes.emplace_back();
    std::vector<Task> stack{{0, 0, grow, 0}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      const std::size_t m = task.hi - task.lo;
      Split split;
      const bool depth_ok = options.max_depth == 0 || task.depth < options.max_depth;
      if (depth_ok && m >= 2 * options.min_leaf) split = builder.best_split(idx, task.lo, task.hi);
      if (split.feature < 0) {
        Node& leaf = tree.nodes[task.node];
        leaf.feature = -1;
        leaf.begin = static_cast<std::uint32_t>(tree.members.size());
        tree.members.insert(tree.members.end(), idx.begin() + static_cast<std::ptrdiff_t>(task.lo),
                            idx.begin() + static_cast<std::ptrdiff_t>(task.hi));
        leaf.end = static_cast<std::uint32_t>(tree.members.size());
        continue;
      }
      auto mid = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(task.lo),
                                       idx.begin() + static_cast<std::ptrdiff_t>(task.hi),
                                       [&](std::uint32_t i) { return x(i, split.feature) <= split.threshold; });
      const auto cut = static_cast<std::size_t>(mid - idx.begin());
      const auto left = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      Node& node = tree.nodes[task.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, cut, task.hi, task.depth + 1});
      stack.push_back({left, task.lo, cut, task.depth + 1});
    }
    if (honest) {
      std::vector<std::vector<std::uint32_t>> by_leaf(tree.nodes.size());
      for (auto i : fill) {
        std::uint32_t node = 0;
        while (tree.nodes[node].feature >= 0)
          node = x(i, tree.nodes[node].feature) <= tree.nodes[node].threshold ? tree.nodes[node].left
                                                                               : tree.nodes[node].right;
        by_leaf[node].push_back(i);
      }
      tree.members.clear();
      for (std::size_t node = 0; node < tree.nodes.size(); ++node) {
        if (tree.nodes[node].feature >= 0) continue;
        tree.nodes[node].begin = static_cast<std::uint32_t>(tree.members.size());
        tree.members.insert(tree.members.end(), by_leaf[node].begin(), by_leaf[node].end());
        tree.nodes[node].end = static_cast<std::uint32_t>(tree.members.size());
      }
    }
  });
  return forest;
}

const Forest::Node& Forest::leaf_for(const Tree& tree, const double* features) const {
  const Node* node = &tree.nodes[0];
  while (node->feature >= 0) node = &tree.nodes[features[node->feature] <= node->threshold ? node->left : node->right];
  return *node;
}

double Forest::leaf_mean(const Tree& tree, const Node& leaf, std::size_t column) const {
  double s = 0.0;
  for (auto r = leaf.begin; r < leaf.end; ++r) s += y_(tree.members[r], static_cast<Eigen::Index>(column));
  return s / static_cast<double>(leaf.end - leaf.begin);
}

SparseWeights Forest::weights(const double* features) const {
  std::vector<double> dense(n_, 0.0);
  std::vector<std::uint32_t> touched;
  std::size_t used = 0;
  for (const auto& tree : trees_) {
    const Node& leaf = leaf_for(tree, features);
    if (leaf.end == leaf.begin) continue;
    ++used;
    const double share = 1.0 / static_cast<double>(leaf.end - leaf.begin);
    for (auto r = leaf.begin; r < leaf.end; ++r) {
      const auto i = tree.members[r];
      if (dense[i] == 0.0) touched.push_back(i);
      dense[i] += share;
    }
  }
  std::sort(touched.begin(), touched.end());
  SparseWeights out;
  out.reserve(touched.size());
  if (used == 0) throw Error("no tree has estimation units in the leaf of this query");
  const double scale = 1.0 / static_cast<double>(used);
  for (auto i : touched) out.emplace_back(i, dense[i] * scale);
  return out;
}

double Forest::predict_mean(const double* features, std::size_t column) const {
  double s = 0.0;
  std::size_t used = 0;
  for (const auto& tree : trees_) {
    const Node& leaf = leaf_for(tree, features);
    if (leaf.end == leaf.begin) continue;
    s += leaf_mean(tree, leaf, column);
    ++used;
  }
  if (used == 0) throw Error("no tree has estimation units in the leaf of this query");
  return s / static_cast<double>(used);
}

double Forest::predict_oob_mean(std::size_t row, std::size_t column) const {
  if (row >= n_) throw InvalidInput("out-of-bag row " + std::to_string(row) + " out of range");
  const double* features = x_.data() + row * p_;
  double s = 0.0;
  std::size_t used = 0;
  for (const auto& tree : trees_) {
    if (tree.in_sample[row]) continue;
    const Node& leaf = leaf_for(tree, features);
    if (leaf.end == leaf.begin) continue;
    s += leaf_mean(tree, leaf, column);
    ++used;
  }
  if (used == 0) return predict_mean(features, column);
  return s / static_cast<double>(used);
}

}  // namespace causalwr
