#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "causalwr/dataset.hpp"
#include "causalwr/distreg.hpp"
#include "causalwr/model.hpp"
#include "causalwr/pairing.hpp"
#include "causalwr/propensity.hpp"

namespace causalwr {

enum class EstimandKind { TauStar, TauPop, TauIndivOracleOnly };

std::string to_string(EstimandKind kind);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  std::string method;  // "bootstrap-percentile" or "gaussian-counts"
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  // Win-ratio and net-benefit intervals implied by the τ interval.
  std::optional<std::pair<double, double>> win_ratio;
  std::optional<std::pair<double, double>> net_benefit;
};

struct EstimateReport {
  std::optional<EstimandKind> estimand;
  std::string method;
  double tau_hat = 0.0;
  double wr_hat = 0.0;  // tau/(1 - tau), or n_W/n_L for pair counts
  double nb_hat = 0.0;  // 2 tau - 1
  // Loss contrast and the ratio-of-taus win ratio, when both were estimated.
  std::optional<double> tau_loss_hat;
  std::optional<double> wr_ratio_of_taus;
  std::optional<WinStats> stats;
  std::optional<double> lambda;
  std::optional<ConfidenceInterval> ci;
  std::size_t n = 0;
  std::size_t n_control = 0;
  std::size_t n_treated = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;
  std::vector<std::string> warnings;
};

// τ ↦ τ/(1−τ), +inf at τ >= 1.
double win_ratio_from_tau(double tau) noexcept;

// τ_win / τ_loss; +inf when τ_loss == 0.
double wr_from_two_taus(double tau_win, double tau_loss);

// Pair-count estimator. Tagged TauPop for complete pairings and TauStar for
// nearest-neighbour pairings.
EstimateReport estimate_traditional(const Dataset& d, const PairSet& pairs, const HierarchySpec& h);

// (1/n) Σ_{i ∈ N_0} w(Y_σ(i) | Y_i) / (1 − π̂(X_i)), σ the nearest treated
// neighbour of each control (averaged over the k nearest when k > 1).
EstimateReport estimate_ipw_nn(const Dataset& d, const HierarchySpec& h, const PropensityModel& pm,
                               const Metric& metric = Metric::euclidean(), std::size_t k = 1, std::uint64_t seed = 0);

// Mean over the inference rows of (1−T) q̂_1(X, Y) + T q̂_0(X, Y). The rows must
// be disjoint from the model's training sample (compared by row id).
EstimateReport estimate_distreg(const Dataset& d, const HierarchySpec& h, const DistRegModel& m,
                                std::span<const std::size_t> inference_rows);
EstimateReport estimate_distreg(const Dataset& d, const HierarchySpec& h, const DistRegModel& m);

struct AipwConfig {
  double lambda = 0.5;  // P(T = 0) estimated on an independent split
  double split_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Fraction of controls in a held-out sample.
double lambda_from_split(const Dataset& holdout);

// Augmented estimator with nearest-neighbour maps σ_0 (control → nearest
// treated) and σ_1 (treated → nearest control) on the whole of `d`.
EstimateReport estimate_aipw(const Dataset& d, const HierarchySpec& h, const DistRegModel& m,
                             const PropensityModel& pm, const AipwConfig& cfg,
                             const Metric& metric = Metric::euclidean(), std::uint64_t seed = 0);

// δ̂(x) = E[w(Y(1) | Y(0)) | x] − E[w(Y(0) | Y(1)) | x] under the fitted
// conditional laws of row `row`, with Y(0) and Y(1) independent given x.
double estimate_otr_delta(const DistRegModel& m, const Dataset& d, std::size_t row, const HierarchySpec& h);

// Random partition of the rows into a λ holdout, a nuisance training part and
// an inference part. Fractions: lambda_fraction of all rows for the holdout,
// then train_fraction of the remainder for training.
struct SampleSplit {
  std::vector<std::size_t> lambda;
  std::vector<std::size_t> train;
  std::vector<std::size_t> inference;
};

SampleSplit split_sample(const Dataset& d, double lambda_fraction, double train_fraction, std::uint64_t seed);

}  // namespace causalwr
