#include "causalwr/pipeline.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "causalwr/errors.hpp"
#include "causalwr/famd.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

std::string to_string(Method method) {
  switch (method) {
    case Method::Complete:
      return "complete";
    case Method::Stratified:
      return "stratified";
    case Method::Knn:
      return "knn";
    case Method::Optimal:
      return "optimal";
    case Method::Ipw:
      return "ipw";
    case Method::Distreg:
      return "distreg";
    case Method::Aipw:
      return "aipw";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (auto m : {Method::Complete, Method::Stratified, Method::Knn, Method::Optimal, Method::Ipw, Method::Distreg,
                 Method::Aipw})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown method '" + name + "' (expected complete, stratified, knn, optimal, ipw, distreg, aipw)");
}

std::string to_string(NuisanceKind kind) {
  switch (kind) {
    case NuisanceKind::Logistic:
      return "logistic";
    case NuisanceKind::Forest:
      return "forest";
    case NuisanceKind::Constant:
      return "constant";
    case NuisanceKind::Oracle:
      return "oracle";
  }
  return "unknown";
}

NuisanceKind parse_nuisance(const std::string& name) {
  for (auto k : {NuisanceKind::Logistic, NuisanceKind::Forest, NuisanceKind::Constant, NuisanceKind::Oracle})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown nuisance kind '" + name + "' (expected logistic, forest, constant, oracle)");
}

void PipelineConfig::validate() const {
  const bool needs_pi = method == Method::Ipw || method == Method::Aipw;
  const bool needs_q = method == Method::Distreg || method == Method::Aipw;
  if (needs_pi && !propensity && !propensity_override)
    throw ConfigError("method '" + to_string(method) + "' requires a propensity configuration");
  if (needs_q && !distreg && !distreg_override)
    throw ConfigError("method '" + to_string(method) + "' requires a distreg configuration");
  if (method == Method::Stratified && !strata) throw ConfigError("method 'stratified' requires a strata configuration");
  if (strata && strata->quantiles < 2) throw ConfigError("strata.quantiles must be >= 2");
  if (k == 0) throw ConfigError("k must be >= 1");
  if (propensity && !propensity_override) {
    if (propensity->kind == NuisanceKind::Oracle)
      throw ConfigError("propensity kind 'oracle' is only available in simulation studies");
    propensity->clip.validate();
    if (propensity->kind == NuisanceKind::Forest) propensity->forest.validate();
    if (propensity->constant && !(*propensity->constant > 0.0 && *propensity->constant < 1.0))
      throw ConfigError("propensity.constant must lie in (0, 1)");
  }
  if (distreg && !distreg_override) {
    if (distreg->kind == NuisanceKind::Oracle)
      throw ConfigError("distreg kind 'oracle' is only available in simulation studies");
    if (distreg->kind == NuisanceKind::Constant) throw ConfigError("distreg kind must be logistic or forest");
    if (distreg->kind == NuisanceKind::Forest) distreg->forest.validate();
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (!(lambda_fraction > 0.0 && lambda_fraction < 1.0)) throw ConfigError("lambda_fraction must lie in (0, 1)");
  if (metric.kind == MetricKind::LatentEuclidean && !(metric.variance_kept > 0.0 && metric.variance_kept <= 1.0))
    throw ConfigError("metric.variance_kept must lie in (0, 1]");
  if (metric.ridge < 0.0) throw ConfigError("metric.ridge must be >= 0");
}

Metric build_metric(const Dataset& d, const MetricConfig& cfg) {
  switch (cfg.kind) {
    case MetricKind::Euclidean:
      return Metric::euclidean(cfg.weights);
    case MetricKind::Mahalanobis:
      return mahalanobis_metric(d, cfg.ridge);
    case MetricKind::LatentEuclidean:
      return Metric::latent(famd_fit(d, cfg.variance_kept));
  }
  throw ConfigError("unknown metric kind");
}

namespace {

std::vector<std::int64_t> strata_labels(const Dataset& d, const StrataConfig& cfg, std::vector<std::string>& warnings) {
  const std::size_t c = d.column_index(cfg.column);
  if (d.schema()[c].kind == ColumnKind::Categorical) {
    std::vector<std::int64_t> labels(d.n());
    for (std::size_t i = 0; i < d.n(); ++i)
      labels[i] = static_cast<std::int64_t>(d.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    return labels;
  }
  QuantileStrata q = quantile_strata(d, c, cfg.quantiles);
  if (q.single_stratum) warnings.push_back("strata column '" + cfg.column + "' is constant: a single stratum");
  return std::move(q.labels);
}

PropensityModel fit_propensity(const Dataset& train, std::size_t n_full, std::size_t n1_full,
                               const PropensityConfig& cfg, std::uint64_t seed) {
  switch (cfg.kind) {
    case NuisanceKind::Logistic:
      return fit_propensity_logistic(train, cfg.clip);
    case NuisanceKind::Forest:
      return fit_propensity_forest(train, cfg.forest, cfg.clip, derive_seed(seed, 0x9E));
    case NuisanceKind::Constant:
      return PropensityModel::constant(
          cfg.constant.value_or(static_cast<double>(n1_full) / static_cast<double>(n_full)), cfg.clip);
    case NuisanceKind::Oracle:
      break;
  }
  throw ConfigError("propensity kind 'oracle' is only available in simulation studies");
}

std::shared_ptr<const DistRegModel> fit_distreg(const Dataset& train, const PipelineConfig& cfg, std::uint64_t seed) {
  const DistRegConfig& dc = *cfg.distreg;
  if (dc.kind == NuisanceKind::Forest) return fit_distreg_forest(train, dc.forest, derive_seed(seed, 0xD1));
  LogisticDistRegOptions options;
  options.constraint = dc.constraint;
  options.features = cfg.distreg_features;
  if (cfg.distreg_features) options.feature_label = "custom";
  return fit_distreg_logistic(train, options);
}

bool propensity_is_fitted(const PipelineConfig& cfg) {
  return !cfg.propensity_override && cfg.propensity->kind != NuisanceKind::Constant;
}

void tag(EstimateReport& r, const PipelineConfig& cfg) {
  r.seed = cfg.seed;
  r.metadata["method"] = to_string(cfg.method);
}

}  // namespace

EstimateReport run_pipeline(const Dataset& d, const PipelineConfig& cfg) {
  cfg.validate();
  d.require_both_arms();
  cfg.hierarchy.validate_for(d.d());
  const HierarchySpec& h = cfg.hierarchy;
  EstimateReport r;
  switch (cfg.method) {
    case Method::Complete:
      r = estimate_traditional(d, complete_pairs(d), h);
      break;
    case Method::Stratified: {
      std::vector<std::string> warnings;
      const auto labels = strata_labels(d, *cfg.strata, warnings);
      const StratifiedPairs sp = stratified_pairs(d, labels);
      r = estimate_traditional(d, sp.pairs, h);
      r.warnings.insert(r.warnings.end(), warnings.begin(), warnings.end());
      if (!sp.degenerate_strata.empty()) {
        std::string list;
        for (auto s : sp.degenerate_strata) list += (list.empty() ? "" : ",") + std::to_string(s);
        r.warnings.push_back("strata without both arms contribute no pairs: " + list);
      }
      r.metadata["strata"] = cfg.strata->column;
      break;
    }
    case Method::Knn:
      r = estimate_traditional(d, knn_pairs(d, build_metric(d, cfg.metric), cfg.k, cfg.seed), h);
      r.metadata["k"] = std::to_string(cfg.k);
      break;
    case Method::Optimal:
      r = estimate_traditional(d, optimal_match_pairs(d, build_metric(d, cfg.metric)), h);
      break;
    case Method::Ipw: {
      if (!propensity_is_fitted(cfg)) {
        const PropensityModel pm = cfg.propensity_override
                                       ? *cfg.propensity_override
                                       : fit_propensity(d, d.n(), d.n_treated(), *cfg.propensity, cfg.seed);
        r = estimate_ipw_nn(d, h, pm, build_metric(d, cfg.metric), cfg.k, cfg.seed);
        break;
      }
      const SampleSplit split = split_sample(d, 0.0, cfg.train_fraction, cfg.seed);
      const Dataset train = d.subset(split.train);
      const Dataset est = d.subset(split.inference);
      est.require_both_arms();
      const PropensityModel pm = fit_propensity(train, d.n(), d.n_treated(), *cfg.propensity, cfg.seed);
      r = estimate_ipw_nn(est, h, pm, build_metric(est, cfg.metric), cfg.k, cfg.seed);
      r.metadata["train_rows"] = std::to_string(train.n());
      break;
    }
    case Method::Distreg: {
      if (cfg.distreg_override) {
        r = estimate_distreg(d, h, *cfg.distreg_override);
        break;
      }
      const SampleSplit split = split_sample(d, 0.0, cfg.train_fraction, cfg.seed);
      const Dataset train = d.subset(split.train);
      const auto model = fit_distreg(train, cfg, cfg.seed);
      r = estimate_distreg(d, h, *model, split.inference);
      r.metadata["train_rows"] = std::to_string(train.n());
      break;
    }
    case Method::Aipw: {
      const bool fit_pi = propensity_is_fitted(cfg);
      const bool fit_q = !cfg.distreg_override;
      const SampleSplit split = split_sample(d, cfg.lambda_fraction, fit_pi || fit_q ? cfg.train_fraction : 0.0, cfg.seed);
      AipwConfig acfg;
      acfg.lambda = lambda_from_split(d.subset(split.lambda));
      acfg.split_fraction = cfg.lambda_fraction;
      acfg.seed = cfg.seed;
      const Dataset train = d.subset(split.train);
      const Dataset est = d.subset(split.inference);
      est.require_both_arms();
      const PropensityModel pm = cfg.propensity_override
                                     ? *cfg.propensity_override
                                     : fit_propensity(train, d.n(), d.n_treated(), *cfg.propensity, cfg.seed);
      const std::shared_ptr<const DistRegModel> model = fit_q ? fit_distreg(train, cfg, cfg.seed) : cfg.distreg_override;
      r = estimate_aipw(est, h, *model, pm, acfg, build_metric(est, cfg.metric), cfg.seed);
      r.metadata["lambda_rows"] = std::to_string(split.lambda.size());
      r.metadata["train_rows"] = std::to_string(train.n());
      break;
    }
  }
  tag(r, cfg);
  return r;
}

EstimateReport run_pipeline(const Dataset& d, const PipelineConfig& cfg, const CiSpec& ci) {
  ci.validate();
  EstimateReport r = run_pipeline(d, cfg);
  ConfidenceInterval out;
  out.level = ci.level;
  out.method = to_string(ci.method);
  out.seed = ci.seed;
  if (ci.method == CiMethod::GaussianCounts) {
    if (!r.stats) throw ConfigError("the count-based interval needs a pairing method, not '" + to_string(cfg.method) + "'");
    const auto [lo, hi] = gaussian_wr_ci(*r.stats, ci.level);
    auto tau = [](double wr) { return std::isinf(wr) ? 1.0 : wr / (1.0 + wr); };
    out.lo = tau(lo);
    out.hi = tau(hi);
    out.win_ratio = {lo, hi};
    out.net_benefit = {2 * out.lo - 1, 2 * out.hi - 1};
  } else {
    const ScalarEstimator estimator = [cfg](const Dataset& sample, std::uint64_t seed) {
      PipelineConfig c = cfg;
      c.seed = seed;
      return run_pipeline(sample, c).tau_hat;
    };
    const BootstrapResult b = bootstrap_ci(estimator, d, ci);
    out.lo = b.lo;
    out.hi = b.hi;
    out.replicates = ci.replicates;
    if (b.lo >= 0.0 && b.hi <= 1.0) {
      const TransformedCi t = transform_ci({b.lo, b.hi});
      out.win_ratio = t.win_ratio;
      out.net_benefit = t.net_benefit;
    }
    if (b.redraws > 0) r.warnings.push_back(std::to_string(b.redraws) + " degenerate bootstrap resamples were redrawn");
  }
  r.ci = out;
  return r;
}

}  // namespace causalwr
