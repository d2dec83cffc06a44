#include "causalwr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "causalwr/errors.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

std::string to_string(EstimandKind kind) {
  switch (kind) {
    case EstimandKind::TauStar:
      return "tau_star";
    case EstimandKind::TauPop:
      return "tau_pop";
    case EstimandKind::TauIndivOracleOnly:
      return "tau_indiv";
  }
  return "unknown";
}

double win_ratio_from_tau(double tau) noexcept {
  if (tau >= 1.0) return std::numeric_limits<double>::infinity();
  return tau / (1.0 - tau);
}

double wr_from_two_taus(double tau_win, double tau_loss) {
  if (!(tau_win >= 0.0) || !(tau_loss >= 0.0)) throw InvalidInput("win and loss contrasts must be >= 0");
  if (tau_loss == 0.0) return std::numeric_limits<double>::infinity();
  return tau_win / tau_loss;
}

namespace {

void describe_sample(EstimateReport& r, const Dataset& d) {
  r.n = d.n();
  r.n_control = d.n_control();
  r.n_treated = d.n_treated();
}

void set_from_tau(EstimateReport& r, double tau) {
  r.tau_hat = tau;
  r.wr_hat = win_ratio_from_tau(tau);
  r.nb_hat = 2.0 * tau - 1.0;
}

void set_loss(EstimateReport& r, double tau_loss) {
  r.tau_loss_hat = tau_loss;
  if (r.tau_hat >= 0.0 && tau_loss >= 0.0) r.wr_ratio_of_taus = wr_from_two_taus(r.tau_hat, tau_loss);
}

std::string tie_name(TiePolicy t) {
  switch (t) {
    case TiePolicy::HalfWin:
      return "half";
    case TiePolicy::Loss:
      return "loss";
    case TiePolicy::Drop:
      return "drop";
  }
  return "unknown";
}

std::string metric_name(const Metric& m) {
  switch (m.kind()) {
    case MetricKind::Euclidean:
      return "euclidean";
    case MetricKind::Mahalanobis:
      return "mahalanobis";
    case MetricKind::LatentEuclidean:
      return "famd";
  }
  return "unknown";
}

void require_disjoint(const Dataset& d, std::span<const std::size_t> rows, const std::vector<std::size_t>& training,
                      const std::string& what) {
  if (training.empty()) return;
  const std::unordered_set<std::size_t> train(training.begin(), training.end());
  for (auto r : rows)
    if (train.count(d.row_ids()[r]))
      throw InvalidInput(what + " was fitted on row " + std::to_string(d.row_ids()[r]) +
                         ", which is also in the estimation sample; use disjoint splits");
}

RowMatrix outcome_rows(const Dataset& d, std::span<const std::size_t> rows) {
  RowMatrix y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.d()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    y.row(static_cast<Eigen::Index>(r)) = d.outcomes().row(static_cast<Eigen::Index>(rows[r]));
  return y;
}

}  // namespace

EstimateReport estimate_traditional(const Dataset& d, const PairSet& pairs, const HierarchySpec& h) {
  const WinStats s = win_stats(d, pairs, h);
  const WinSummary summary = summary_from_stats(s);
  EstimateReport r;
  r.method = to_string(pairs.provenance);
  if (pairs.provenance == PairProvenance::Complete) r.estimand = EstimandKind::TauPop;
  if (pairs.provenance == PairProvenance::KNN) r.estimand = EstimandKind::TauStar;
  r.tau_hat = summary.p_win;
  r.wr_hat = summary.win_ratio;
  r.nb_hat = summary.net_benefit;
  const double total = s.wins + s.losses;
  r.tau_loss_hat = s.losses / total;
  r.wr_ratio_of_taus = summary.win_ratio;
  r.stats = s;
  describe_sample(r, d);
  r.metadata["pairing"] = to_string(pairs.provenance);
  r.metadata["pairs"] = std::to_string(pairs.size());
  r.metadata["ties"] = tie_name(h.tie_policy());
  return r;
}

EstimateReport estimate_ipw_nn(const Dataset& d, const HierarchySpec& h, const PropensityModel& pm,
                               const Metric& metric, std::size_t k, std::uint64_t seed) {
  d.require_both_arms();
  h.validate_for(d.d());
  if (k == 0 || k > d.n_treated())
    throw InvalidInput("k=" + std::to_string(k) + " must lie in [1, n_treated=" + std::to_string(d.n_treated()) + "]");
  std::vector<std::size_t> all(d.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  require_disjoint(d, all, pm.training_rows(), "propensity model");

  const RowMatrix points = metric.embed(d);
  const auto nn = nearest_neighbors(points, d.controls(), d.treated(), k, seed);
  const std::vector<double> pi = pm.predict(d);
  const HierarchySpec loss = h.reversed();
  const double n = static_cast<double>(d.n());
  const bool constant = pm.kind() == PropensityKind::ConstantOracle;
  double win_sum = 0.0;
  double loss_sum = 0.0;
  for (std::size_t q = 0; q < d.n_control(); ++q) {
    const auto i = d.controls()[q];
    double w = 0.0, l = 0.0;
    for (auto j : nn[q]) {
      w += h.win(d.outcome(j), d.outcome(i));
      l += loss.win(d.outcome(j), d.outcome(i));
    }
    if (k > 1) {
      w /= static_cast<double>(k);
      l /= static_cast<double>(k);
    }
    win_sum += constant ? w : w / (1.0 - pi[i]);
    loss_sum += constant ? l : l / (1.0 - pi[i]);
  }
  double denom = n;
  if (constant) {
    // One rounding for Σ w / (n(1−π)); π̂ = n_1/n makes the denominator n_0
    // and the result the unweighted nearest-neighbour proportion.
    denom = n * (1.0 - pi[d.controls().front()]);
    const double n0 = static_cast<double>(d.n_control());
    if (std::abs(denom - n0) <= 8 * std::numeric_limits<double>::epsilon() * n) denom = n0;
  }
  EstimateReport r;
  r.method = "ipw";
  r.estimand = EstimandKind::TauStar;
  set_from_tau(r, win_sum / denom);
  set_loss(r, loss_sum / denom);
  describe_sample(r, d);
  r.seed = seed;
  r.metadata["pairing"] = "knn";
  r.metadata["k"] = std::to_string(k);
  r.metadata["metric"] = metric_name(metric);
  r.metadata["propensity"] = pm.label();
  r.metadata["ties"] = tie_name(h.tie_policy());
  if (!pm.warning().empty()) r.warnings.push_back(pm.warning());
  return r;
}

namespace {

// Σ over rows of (1−T) q̂_1(X, Y) + T q̂_0(X, Y), split by arm, as (controls, treated) vectors.
std::pair<std::vector<double>, std::vector<double>> q_terms(const Dataset& d, const DistRegModel& m,
                                                            std::span<const std::size_t> controls,
                                                            std::span<const std::size_t> treated,
                                                            const HierarchySpec& h) {
  return {m.evaluate(1, d, controls, outcome_rows(d, controls), h),
          m.evaluate(0, d, treated, outcome_rows(d, treated), h)};
}

}  // namespace

EstimateReport estimate_distreg(const Dataset& d, const HierarchySpec& h, const DistRegModel& m,
                                std::span<const std::size_t> inference_rows) {
  if (inference_rows.empty()) throw DegenerateInput("no inference rows");
  h.validate_for(d.d());
  for (auto r : inference_rows)
    if (r >= d.n()) throw InvalidInput("inference row " + std::to_string(r) + " out of range");
  require_disjoint(d, inference_rows, m.training_rows(), "distributional regression");
  std::vector<std::size_t> controls, treated;
  for (auto r : inference_rows) (d.arm(r) == 0 ? controls : treated).push_back(r);

  auto contrast = [&](const HierarchySpec& spec) {
    const auto [q1, q0] = q_terms(d, m, controls, treated, spec);
    double s = 0.0;
    for (double v : q1) s += v;
    for (double v : q0) s += v;
    return s / static_cast<double>(inference_rows.size());
  };
  EstimateReport r;
  r.method = "distreg";
  r.estimand = EstimandKind::TauStar;
  set_from_tau(r, contrast(h));
  set_loss(r, contrast(h.reversed()));
  r.n = inference_rows.size();
  r.n_control = controls.size();
  r.n_treated = treated.size();
  r.metadata["distreg"] = to_string(m.kind());
  r.metadata["ties"] = tie_name(h.tie_policy());
  return r;
}

EstimateReport estimate_distreg(const Dataset& d, const HierarchySpec& h, const DistRegModel& m) {
  std::vector<std::size_t> all(d.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return estimate_distreg(d, h, m, all);
}

void AipwConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in (0, 1), got " + std::to_string(lambda));
}

double lambda_from_split(const Dataset& holdout) {
  const double lambda = static_cast<double>(holdout.n_control()) / static_cast<double>(holdout.n());
  if (!(lambda > 0.0 && lambda < 1.0))
    throw DegenerateInput("the lambda holdout contains a single treatment arm; enlarge the split");
  return lambda;
}

EstimateReport estimate_aipw(const Dataset& d, const HierarchySpec& h, const DistRegModel& m,
                             const PropensityModel& pm, const AipwConfig& cfg, const Metric& metric,
                             std::uint64_t seed) {
  cfg.validate();
  d.require_both_arms();
  h.validate_for(d.d());
  std::vector<std::size_t> all(d.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  require_disjoint(d, all, m.training_rows(), "distributional regression");
  require_disjoint(d, all, pm.training_rows(), "propensity model");

  const RowMatrix points = metric.embed(d);
  const auto sigma0 = nearest_opposite_map(d, points, 0, seed);
  const auto sigma1 = nearest_opposite_map(d, points, 1, seed);
  const std::vector<double> pi = pm.predict(d);
  const double lambda = cfg.lambda;

  auto contrast = [&](const HierarchySpec& spec) {
    const auto [q1, q0] = q_terms(d, m, d.controls(), d.treated(), spec);
    double s = 0.0;
    for (std::size_t r = 0; r < d.n_control(); ++r) {
      const auto i = d.controls()[r];
      const double residual = q1[r] - spec.win(d.outcome(sigma0[i]), d.outcome(i));
      s += q1[r] - lambda * residual / (1.0 - pi[i]);
    }
    for (std::size_t r = 0; r < d.n_treated(); ++r) {
      const auto i = d.treated()[r];
      const double residual = q0[r] - spec.win(d.outcome(i), d.outcome(sigma1[i]));
      s += q0[r] - (1.0 - lambda) * residual / pi[i];
    }
    return s / static_cast<double>(d.n());
  };
  EstimateReport r;
  r.method = "aipw";
  r.estimand = EstimandKind::TauStar;
  set_from_tau(r, contrast(h));
  set_loss(r, contrast(h.reversed()));
  r.lambda = lambda;
  describe_sample(r, d);
  r.seed = seed;
  r.metadata["distreg"] = to_string(m.kind());
  r.metadata["propensity"] = pm.label();
  r.metadata["metric"] = metric_name(metric);
  r.metadata["ties"] = tie_name(h.tie_policy());
  if (!pm.warning().empty()) r.warnings.push_back(pm.warning());
  return r;
}

double estimate_otr_delta(const DistRegModel& m, const Dataset& d, std::size_t row, const HierarchySpec& h) {
  if (row >= d.n()) throw InvalidInput("row " + std::to_string(row) + " out of range");
  const ConditionalLaw law1 = m.law(1, d, row);
  const ConditionalLaw law0 = m.law(0, d, row);
  return law_contrast(law1, law0, h) - law_contrast(law0, law1, h);
}

SampleSplit split_sample(const Dataset& d, double lambda_fraction, double train_fraction, std::uint64_t seed) {
  if (!(lambda_fraction >= 0.0 && lambda_fraction < 1.0)) throw InvalidInput("lambda_fraction must lie in [0, 1)");
  if (!(train_fraction >= 0.0 && train_fraction < 1.0)) throw InvalidInput("train_fraction must lie in [0, 1)");
  std::vector<std::size_t> order(d.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(derive_seed(seed, 0x5B117));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_lambda = static_cast<std::size_t>(std::llround(lambda_fraction * static_cast<double>(d.n())));
  const std::size_t rest = d.n() - n_lambda;
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rest)));
  SampleSplit s;
  s.lambda.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_lambda));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_lambda),
                 order.begin() + static_cast<std::ptrdiff_t>(n_lambda + n_train));
  s.inference.assign(order.begin() + static_cast<std::ptrdiff_t>(n_lambda + n_train), order.end());
  std::sort(s.lambda.begin(), s.lambda.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.inference.begin(), s.inference.end());
  return s;
}

}  // namespace causalwr
