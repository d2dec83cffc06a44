#include "causalwr/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "causalwr/errors.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

std::string to_string(CiMethod method) {
  return method == CiMethod::BootstrapPercentile ? "bootstrap-percentile" : "gaussian-counts";
}

void CiSpec::validate() const {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("CI level must lie strictly inside (0, 1)");
  if (method == CiMethod::BootstrapPercentile && replicates < 100)
    throw InvalidInput("percentile bootstrap needs at least 100 replicates, got " + std::to_string(replicates));
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile probability must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_ci(const ScalarEstimator& estimator, const Dataset& d, const CiSpec& spec) {
  spec.validate();
  d.require_both_arms();
  const std::size_t b_count = spec.replicates;
  const std::size_t max_attempts = 10 * b_count;
  BootstrapResult out;
  out.replicates.assign(b_count, 0.0);
  std::vector<std::size_t> attempts(b_count, 0);
  std::atomic<std::size_t> total_attempts{0};

  parallel_for(b_count, [&](std::size_t b) {
    std::vector<std::size_t> idx(d.n());
    for (std::size_t a = 0;; ++a) {
      if (total_attempts.fetch_add(1) >= max_attempts)
        throw DegenerateInput("bootstrap exhausted " + std::to_string(max_attempts) +
                              " attempts on degenerate resamples");
      const std::uint64_t seed = derive_seed(spec.seed, b, a);
      Rng rng = make_rng(seed);
      std::size_t pos = 0;
      for (const auto* arm : {&d.controls(), &d.treated()}) {
        std::uniform_int_distribution<std::size_t> pick(0, arm->size() - 1);
        for (std::size_t r = 0; r < arm->size(); ++r) idx[pos++] = (*arm)[pick(rng)];
      }
      try {
        out.replicates[b] = estimator(d.subset(idx).reindexed(), derive_seed(seed, 0xB0075));
        attempts[b] = a + 1;
        return;
      } catch (const DegenerateInput&) {
      }
    }
  });
  for (auto a : attempts) out.redraws += a - 1;
  std::vector<double> sorted = out.replicates;
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 1.0 - spec.level;
  out.lo = quantile_type7(sorted, alpha / 2);
  out.hi = quantile_type7(sorted, 1 - alpha / 2);
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::pair<double, double> gaussian_wr_ci_z(double wins, double losses, double z) {
  if (!(wins >= 0.0) || !(losses >= 0.0)) throw InvalidInput("win and loss counts must be >= 0");
  if (!(z >= 0.0)) throw InvalidInput("z must be >= 0");
  const double sw = z * std::sqrt(wins);
  const double sl = z * std::sqrt(losses);
  const double lo_den = losses + sl;
  const double lo = lo_den > 0 ? std::max(0.0, (wins - sw) / lo_den) : 0.0;
  const double hi_den = losses - sl;
  const double hi = hi_den > 0 ? (wins + sw) / hi_den : std::numeric_limits<double>::infinity();
  return {lo, hi};
}

std::pair<double, double> gaussian_wr_ci(const WinStats& s, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("CI level must lie strictly inside (0, 1)");
  if (s.ties == TiePolicy::HalfWin || s.wins != std::floor(s.wins) || s.losses != std::floor(s.losses))
    throw InvalidInput("the count-based win-ratio interval needs integer counts (ties 'loss' or 'drop'); "
                       "use the bootstrap for fractional HalfWin counts");
  return gaussian_wr_ci_z(s.wins, s.losses, normal_quantile(1 - (1 - level) / 2));
}

TransformedCi transform_ci(std::pair<double, double> tau_ci) {
  const auto [lo, hi] = tau_ci;
  if (!(lo >= 0.0 && lo <= hi && hi <= 1.0))
    throw InvalidInput("tau interval must satisfy 0 <= lo <= hi <= 1, got (" + std::to_string(lo) + ", " +
                       std::to_string(hi) + ")");
  auto wr = [](double t) { return t >= 1.0 ? std::numeric_limits<double>::infinity() : t / (1.0 - t); };
  TransformedCi out;
  out.win_ratio = {wr(lo), wr(hi)};
  out.net_benefit = {2 * lo - 1, 2 * hi - 1};
  return out;
}

}  // namespace causalwr
