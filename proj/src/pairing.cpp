#include "causalwr/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "causalwr/errors.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

Metric Metric::euclidean(std::vector<double> weights) {
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("metric weights must be finite and >= 0");
  Metric m;
  m.kind_ = MetricKind::Euclidean;
  m.weights_ = std::move(weights);
  return m;
}

Metric Metric::mahalanobis(const Eigen::MatrixXd& precision) {
  if (precision.rows() != precision.cols() || precision.rows() == 0)
    throw InvalidInput("Mahalanobis precision must be a non-empty square matrix");
  if (!precision.isApprox(precision.transpose(), 1e-10))
    throw InvalidInput("Mahalanobis precision must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw InvalidInput("Mahalanobis precision is not positive definite");
  Metric m;
  m.kind_ = MetricKind::Mahalanobis;
  m.precision_ = precision;
  m.factor_ = llt.matrixU();
  return m;
}

Metric Metric::latent(FamdProjection projection) {
  Metric m;
  m.kind_ = MetricKind::LatentEuclidean;
  m.projection_ = std::move(projection);
  return m;
}

RowMatrix Metric::embed(const Dataset& d) const {
  switch (kind_) {
    case MetricKind::Euclidean: {
      RowMatrix x = d.distance_features();
      if (!weights_.empty()) {
        if (weights_.size() != static_cast<std::size_t>(x.cols()))
          throw InvalidInput("metric has " + std::to_string(weights_.size()) + " weights but data has " +
                             std::to_string(x.cols()) + " distance features");
        for (Eigen::Index c = 0; c < x.cols(); ++c) x.col(c) *= std::sqrt(weights_[c]);
      }
      return x;
    }
    case MetricKind::Mahalanobis: {
      const RowMatrix x = d.distance_features();
      if (x.cols() != factor_.cols())
        throw InvalidInput("Mahalanobis metric expects " + std::to_string(factor_.cols()) +
                           " distance features, data has " + std::to_string(x.cols()));
      return x * factor_.transpose();
    }
    case MetricKind::LatentEuclidean:
      return famd_apply(*projection_, d);
  }
  throw InvalidInput("unknown metric kind");
}

double Metric::distance(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size()) throw InvalidInput("distance between vectors of different dimension");
  const Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd diff = va - vb;
  switch (kind_) {
    case MetricKind::Euclidean: {
      if (weights_.empty()) return diff.norm();
      if (weights_.size() != a.size()) throw InvalidInput("metric weight count does not match vector dimension");
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += weights_[k] * diff(k) * diff(k);
      return std::sqrt(s);
    }
    case MetricKind::Mahalanobis:
      if (diff.size() != precision_.rows()) throw InvalidInput("vector dimension does not match the precision matrix");
      return std::sqrt(std::max(0.0, diff.dot(precision_ * diff)));
    case MetricKind::LatentEuclidean:
      break;
  }
  throw InvalidInput("latent metric distances are defined on datasets; use embed()");
}

Metric mahalanobis_from_covariance(const Eigen::MatrixXd& cov, double absolute_ridge) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw InvalidInput("covariance must be a non-empty square matrix");
  Eigen::MatrixXd reg = cov;
  reg.diagonal().array() += absolute_ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(reg);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("covariance is not positive definite; increase the ridge");
  Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  precision = 0.5 * (precision + precision.transpose());
  return Metric::mahalanobis(precision);
}

Metric mahalanobis_metric(const Dataset& d, double ridge) {
  if (d.n() < 2) throw InvalidInput("Mahalanobis metric needs n >= 2");
  if (!(ridge >= 0.0)) throw InvalidInput("ridge must be >= 0");
  const RowMatrix x = d.distance_features();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(d.n() - 1);
  const double p = static_cast<double>(cov.rows());
  double scale = cov.trace() / p;
  if (!(scale > 0.0)) scale = 1.0;
  return mahalanobis_from_covariance(cov, std::max(ridge * scale, std::numeric_limits<double>::min()));
}

PairSet complete_pairs(const Dataset& d) {
  d.require_both_arms();
  if (d.n() > std::numeric_limits<std::uint32_t>::max()) throw Unsupported("datasets beyond 2^32 rows");
  PairSet out;
  out.provenance = PairProvenance::Complete;
  out.pairs.reserve(d.n_control() * d.n_treated());
  for (auto i : d.controls())
    for (auto j : d.treated()) out.pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  return out;
}

std::vector<std::vector<std::uint32_t>> nearest_neighbors(const RowMatrix& points,
                                                          std::span<const std::size_t> queries,
                                                          std::span<const std::size_t> candidates, std::size_t k,
                                                          std::uint64_t seed) {
  if (k == 0) throw InvalidInput("k must be >= 1");
  if (k > candidates.size())
    throw InvalidInput("k=" + std::to_string(k) + " exceeds the " + std::to_string(candidates.size()) +
                       " available neighbours");
  const auto dim = points.cols();
  std::vector<std::vector<std::uint32_t>> result(queries.size());
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (queries.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<double> dist(candidates.size());
    std::vector<std::size_t> order;
    std::vector<std::size_t> ties;
    const std::size_t end = std::min(queries.size(), (b + 1) * kBlock);
    for (std::size_t q = b * kBlock; q < end; ++q) {
      const double* xq = points.data() + queries[q] * dim;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double* xc = points.data() + candidates[c] * dim;
        double s = 0.0;
        for (Eigen::Index a = 0; a < dim; ++a) {
          const double diff = xq[a] - xc[a];
          s += diff * diff;
        }
        dist[c] = s;
      }
      // k-th smallest distance, then everything strictly closer plus a
      // uniform draw among the candidates tied at the boundary.
      order.resize(candidates.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(),
                       [&](std::size_t a, std::size_t c) { return dist[a] < dist[c]; });
      const double boundary = dist[order[k - 1]];
      std::vector<std::size_t> chosen;
      chosen.reserve(k);
      ties.clear();
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (dist[c] < boundary) {
          chosen.push_back(c);
        } else if (dist[c] == boundary) {
          ties.push_back(c);
        }
      }
      const std::size_t need = k - chosen.size();
      if (ties.size() > need) {
        SplitMix rng(derive_seed(seed, queries[q]));
        for (std::size_t r = 0; r < need; ++r) {
          const auto pick = r + rng.below(ties.size() - r);
          std::swap(ties[r], ties[pick]);
        }
      }
      chosen.insert(chosen.end(), ties.begin(), ties.begin() + static_cast<std::ptrdiff_t>(need));
      std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t c) {
        return dist[a] < dist[c] || (dist[a] == dist[c] && candidates[a] < candidates[c]);
      });
      auto& out = result[q];
      out.reserve(k);
      for (auto c : chosen) out.push_back(static_cast<std::uint32_t>(candidates[c]));
    }
  });
  return result;
}

PairSet knn_pairs(const Dataset& d, const Metric& m, std::size_t k, std::uint64_t seed) {
  d.require_both_arms();
  if (k == 0) throw InvalidInput("k must be >= 1");
  if (k > d.n_treated())
    throw InvalidInput("k=" + std::to_string(k) + " exceeds the number of treated units (" +
                       std::to_string(d.n_treated()) + ")");
  const RowMatrix points = m.embed(d);
  const auto nn = nearest_neighbors(points, d.controls(), d.treated(), k, seed);
  PairSet out;
  out.provenance = PairProvenance::KNN;
  out.pairs.reserve(d.n_control() * k);
  for (std::size_t q = 0; q < d.n_control(); ++q)
    for (auto j : nn[q]) out.pairs.push_back({static_cast<std::uint32_t>(d.controls()[q]), j});
  return out;
}

std::vector<std::uint32_t> nearest_opposite_map(const Dataset& d, const RowMatrix& points, int from_arm,
                                                std::uint64_t seed) {
  d.require_both_arms();
  const auto& from = from_arm == 0 ? d.controls() : d.treated();
  const auto& to = from_arm == 0 ? d.treated() : d.controls();
  // Separate tie-breaking streams for the two directions.
  const auto nn = nearest_neighbors(points, from, to, 1, derive_seed(seed, 0x5167A, static_cast<std::uint64_t>(from_arm)));
  std::vector<std::uint32_t> map(d.n(), std::numeric_limits<std::uint32_t>::max());
  for (std::size_t q = 0; q < from.size(); ++q) map[from[q]] = nn[q][0];
  return map;
}

StratifiedPairs stratified_pairs(const Dataset& d, std::span<const std::int64_t> labels) {
  if (labels.size() != d.n())
    throw InvalidInput("got " + std::to_string(labels.size()) + " stratum labels for " + std::to_string(d.n()) +
                       " units");
  std::map<std::int64_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> strata;
  for (std::size_t i = 0; i < d.n(); ++i) {
    auto& s = strata[labels[i]];
    (d.arm(i) == 0 ? s.first : s.second).push_back(i);
  }
  StratifiedPairs out;
  out.pairs.provenance = PairProvenance::Stratified;
  for (const auto& [label, arms] : strata) {
    if (arms.first.empty() || arms.second.empty()) {
      out.degenerate_strata.push_back(label);
      continue;
    }
    for (auto i : arms.first)
      for (auto j : arms.second)
        out.pairs.pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  }
  if (out.pairs.empty()) throw DegenerateInput("every stratum lacks one of the treatment arms");
  return out;
}

QuantileStrata quantile_strata(const Dataset& d, std::size_t column, std::size_t q) {
  if (column >= d.p()) throw InvalidInput("strata column index " + std::to_string(column) + " out of range");
  if (d.schema()[column].kind != ColumnKind::Numeric)
    throw InvalidInput("strata column '" + d.schema()[column].name + "' is not numeric");
  if (q < 2) throw InvalidInput("quantile strata need q >= 2");
  std::vector<double> sorted(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) sorted[i] = d.covariates()(i, column);
  std::sort(sorted.begin(), sorted.end());
  QuantileStrata out;
  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t b = 1; b < q; ++b) {
    const double h = last * static_cast<double>(b) / static_cast<double>(q);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    out.cutpoints.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
  }
  out.labels.resize(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double v = d.covariates()(i, column);
    std::int64_t label = 0;
    for (double c : out.cutpoints)
      if (v > c) ++label;
    out.labels[i] = label;
  }
  out.single_stratum = sorted.front() == sorted.back();
  return out;
}

PairSet optimal_match_pairs(const Dataset& d, const Metric& m) {
  d.require_both_arms();
  const RowMatrix points = m.embed(d);
  const bool treated_rows = d.n_treated() <= d.n_control();
  const auto& rows = treated_rows ? d.treated() : d.controls();
  const auto& cols = treated_rows ? d.controls() : d.treated();
  Eigen::MatrixXd cost(rows.size(), cols.size());
  parallel_for(rows.size(), [&](std::size_t r) {
    for (std::size_t c = 0; c < cols.size(); ++c)
      cost(r, c) = (points.row(rows[r]) - points.row(cols[c])).squaredNorm();
  });
  const auto assignment = solve_assignment(cost);
  PairSet out;
  out.provenance = PairProvenance::OptimalMatch;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto a = rows[r];
    const auto b = cols[assignment[r]];
    const auto control = treated_rows ? b : a;
    const auto treated = treated_rows ? a : b;
    out.pairs.push_back({static_cast<std::uint32_t>(control), static_cast<std::uint32_t>(treated)});
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const Pair& x, const Pair& y) {
    return x.control < y.control || (x.control == y.control && x.treated < y.treated);
  });
  return out;
}

double matching_cost(const RowMatrix& points, const PairSet& pairs) {
  double total = 0.0;
  for (const auto& pr : pairs.pairs) total += (points.row(pr.control) - points.row(pr.treated)).squaredNorm();
  return total;
}

}  // namespace causalwr
