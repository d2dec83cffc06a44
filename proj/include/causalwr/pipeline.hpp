#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "causalwr/dataset.hpp"
#include "causalwr/distreg.hpp"
#include "causalwr/estimators.hpp"
#include "causalwr/forest.hpp"
#include "causalwr/inference.hpp"
#include "causalwr/model.hpp"
#include "causalwr/pairing.hpp"
#include "causalwr/propensity.hpp"

namespace causalwr {

enum class Method { Complete, Stratified, Knn, Optimal, Ipw, Distreg, Aipw };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct MetricConfig {
  MetricKind kind = MetricKind::Euclidean;
  double ridge = 1e-6;          // Mahalanobis, relative to trace/p
  double variance_kept = 0.95;  // FAMD
  std::vector<double> weights;  // Euclidean
};

struct StrataConfig {
  std::string column;
  std::size_t quantiles = 2;  // numeric columns; categorical columns use their levels
};

enum class NuisanceKind { Logistic, Forest, Constant, Oracle };

std::string to_string(NuisanceKind kind);
NuisanceKind parse_nuisance(const std::string& name);

struct PropensityConfig {
  NuisanceKind kind = NuisanceKind::Logistic;
  ForestOptions forest;
  Clip clip;
  // Constant kind: the share of treated units when unset.
  std::optional<double> constant;
};

struct DistRegConfig {
  NuisanceKind kind = NuisanceKind::Logistic;
  ForestOptions forest;
  SharingConstraint constraint = SharingConstraint::Free;
};

struct PipelineConfig {
  Method method = Method::Complete;
  HierarchySpec hierarchy = HierarchySpec::single(Direction::HigherBetter, TiePolicy::HalfWin);
  MetricConfig metric;
  std::size_t k = 1;
  std::optional<StrataConfig> strata;
  std::optional<PropensityConfig> propensity;
  std::optional<DistRegConfig> distreg;
  double train_fraction = 0.5;
  double lambda_fraction = 0.2;
  std::uint64_t seed = 0;

  // Nuisances supplied by the caller (e.g. simulator oracles). They are used
  // as-is on the whole estimation sample, so no rows are spent on fitting.
  std::optional<PropensityModel> propensity_override;
  std::shared_ptr<const DistRegModel> distreg_override;
  // Regressors of the logistic distributional regression; design_matrix() when empty.
  FeatureMap distreg_features;

  // Throws ConfigError for invalid method/nuisance combinations.
  void validate() const;
};

Metric build_metric(const Dataset& d, const MetricConfig& cfg);

// Pairing → nuisances → estimator. Fitted nuisances are trained on a random
// split of `d` and the estimator runs on the remaining rows.
EstimateReport run_pipeline(const Dataset& d, const PipelineConfig& cfg);

// run_pipeline plus a confidence interval. The bootstrap refits every
// nuisance inside each replicate; the count-based interval needs a pairing
// method and integer counts.
EstimateReport run_pipeline(const Dataset& d, const PipelineConfig& cfg, const CiSpec& ci);

}  // namespace causalwr
