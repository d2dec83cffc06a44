#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "causalwr/dataset.hpp"
#include "causalwr/model.hpp"

namespace causalwr {

enum class CiMethod { BootstrapPercentile, GaussianCounts };

std::string to_string(CiMethod method);

struct CiSpec {
  CiMethod method = CiMethod::BootstrapPercentile;
  double level = 0.95;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Maps a (resampled) dataset to a scalar. The seed is specific to the
// replicate so that randomised estimators stay reproducible.
using ScalarEstimator = std::function<double(const Dataset&, std::uint64_t seed)>;

struct BootstrapResult {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> replicates;  // in replicate order
  std::size_t redraws = 0;         // resamples rejected as degenerate
};

// Arm-stratified nonparametric bootstrap with percentile interval. A
// replicate whose estimator throws DegenerateInput is redrawn; more than
// 10·B attempts in total raise DegenerateInput.
BootstrapResult bootstrap_ci(const ScalarEstimator& estimator, const Dataset& d, const CiSpec& spec);

// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile_type7(std::span<const double> sorted, double p);

double normal_quantile(double p);

// Count-based interval for n_W / n_L with z the two-sided normal quantile.
std::pair<double, double> gaussian_wr_ci(const WinStats& s, double level = 0.95);
std::pair<double, double> gaussian_wr_ci_z(double wins, double losses, double z);

struct TransformedCi {
  std::pair<double, double> win_ratio;
  std::pair<double, double> net_benefit;
};

// Monotone images of a τ interval: τ/(1−τ) and 2τ−1.
TransformedCi transform_ci(std::pair<double, double> tau_ci);

}  // namespace causalwr
