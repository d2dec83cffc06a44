#include "causalwr/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "causalwr/errors.hpp"

namespace causalwr {

HierarchySpec::HierarchySpec(std::vector<HierarchyLevel> levels, TiePolicy ties)
    : levels_(std::move(levels)), ties_(ties) {
  if (levels_.empty()) throw InvalidInput("hierarchy must have at least one level");
  std::set<std::size_t> seen;
  for (const auto& level : levels_) {
    if (!seen.insert(level.outcome).second)
      throw InvalidInput("hierarchy lists outcome " + std::to_string(level.outcome) + " twice");
    if (!(level.tolerance >= 0.0) || !std::isfinite(level.tolerance))
      throw InvalidInput("hierarchy tolerance must be finite and >= 0");
    required_dim_ = std::max(required_dim_, level.outcome + 1);
  }
}

HierarchySpec HierarchySpec::single(Direction direction, TiePolicy ties) {
  return HierarchySpec({HierarchyLevel{0, direction, 0.0}}, ties);
}

HierarchySpec HierarchySpec::lexicographic(std::size_t d, Direction direction, TiePolicy ties) {
  std::vector<HierarchyLevel> levels;
  for (std::size_t k = 0; k < d; ++k) levels.push_back({k, direction, 0.0});
  return HierarchySpec(std::move(levels), ties);
}

void HierarchySpec::validate_for(std::size_t outcome_dim) const {
  if (outcome_dim < required_dim_)
    throw InvalidInput("hierarchy references outcome " + std::to_string(required_dim_ - 1) +
                       " but outcomes have dimension " + std::to_string(outcome_dim));
}

HierarchySpec HierarchySpec::reversed() const {
  auto levels = levels_;
  for (auto& level : levels)
    level.direction = level.direction == Direction::HigherBetter ? Direction::LowerBetter : Direction::HigherBetter;
  return HierarchySpec(std::move(levels), ties_);
}

HierarchySpec HierarchySpec::with_tie_policy(TiePolicy ties) const { return HierarchySpec(levels_, ties); }

double HierarchySpec::tie_value() const {
  switch (ties_) {
    case TiePolicy::HalfWin:
      return 0.5;
    case TiePolicy::Loss:
      return 0.0;
    case TiePolicy::Drop:
      break;
  }
  throw InvalidInput("tie policy 'drop' only applies to pair counting; use 'half' or 'loss' for model-based estimators");
}

std::optional<double> HierarchySpec::score(WinValue v) const noexcept {
  switch (v) {
    case WinValue::Win:
      return 1.0;
    case WinValue::Loss:
      return 0.0;
    case WinValue::Tie:
      if (ties_ == TiePolicy::HalfWin) return 0.5;
      if (ties_ == TiePolicy::Loss) return 0.0;
      return std::nullopt;
  }
  return std::nullopt;
}

double HierarchySpec::win(std::span<const double> y, std::span<const double> y2) const {
  const WinValue v = compare(*this, y, y2);
  if (v == WinValue::Win) return 1.0;
  if (v == WinValue::Loss) return 0.0;
  return tie_value();
}

WinValue compare_level(const HierarchyLevel& level, double a, double b) noexcept {
  const double diff = a - b;
  if (std::abs(diff) <= level.tolerance) return WinValue::Tie;
  const bool a_larger = diff > 0;
  const bool a_better = level.direction == Direction::HigherBetter ? a_larger : !a_larger;
  return a_better ? WinValue::Win : WinValue::Loss;
}

WinValue compare(const HierarchySpec& h, std::span<const double> y, std::span<const double> y2) {
  if (y.size() < h.required_dimension() || y2.size() < h.required_dimension())
    throw InvalidInput("outcome vectors of dimension " + std::to_string(y.size()) + " and " +
                       std::to_string(y2.size()) + " do not cover the hierarchy (needs " +
                       std::to_string(h.required_dimension()) + ")");
  for (const auto& level : h.levels()) {
    const WinValue v = compare_level(level, y[level.outcome], y2[level.outcome]);
    if (v != WinValue::Tie) return v;
  }
  return WinValue::Tie;
}

std::string to_string(PairProvenance p) {
  switch (p) {
    case PairProvenance::Complete:
      return "complete";
    case PairProvenance::Stratified:
      return "stratified";
    case PairProvenance::KNN:
      return "knn";
    case PairProvenance::OptimalMatch:
      return "optimal";
  }
  return "unknown";
}

void PairSet::validate_for(const Dataset& d) const {
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& pr = pairs[k];
    if (pr.control >= d.n() || pr.treated >= d.n())
      throw InvalidInput("pair " + std::to_string(k) + " references a unit outside the dataset");
    if (d.arm(pr.control) != 0 || d.arm(pr.treated) != 1)
      throw InvalidInput("pair " + std::to_string(k) + " is not a (control, treated) pair");
  }
}

WinStats win_stats(const Dataset& d, const PairSet& pairs, const HierarchySpec& h) {
  if (pairs.empty()) throw DegenerateInput("pair set is empty");
  h.validate_for(d.d());
  pairs.validate_for(d);
  WinStats s;
  s.ties = h.tie_policy();
  std::size_t wins = 0;
  std::size_t ties = 0;
  for (const auto& pr : pairs.pairs) {
    switch (compare(h, d.outcome(pr.treated), d.outcome(pr.control))) {
      case WinValue::Win:
        ++wins;
        break;
      case WinValue::Tie:
        ++ties;
        break;
      case WinValue::Loss:
        break;
    }
  }
  // Integer tallies first, so the fractional HalfWin totals are exact.
  const std::size_t total = pairs.size();
  const std::size_t losses = total - wins - ties;
  switch (h.tie_policy()) {
    case TiePolicy::HalfWin:
      s.wins = static_cast<double>(wins) + 0.5 * static_cast<double>(ties);
      s.losses = static_cast<double>(losses) + 0.5 * static_cast<double>(ties);
      s.pairs = total;
      break;
    case TiePolicy::Loss:
      s.wins = static_cast<double>(wins);
      s.losses = static_cast<double>(losses + ties);
      s.pairs = total;
      break;
    case TiePolicy::Drop:
      s.wins = static_cast<double>(wins);
      s.losses = static_cast<double>(losses);
      s.dropped = ties;
      s.pairs = total - ties;
      break;
  }
  return s;
}

WinSummary summary_from_stats(const WinStats& s) {
  const double denom = s.wins + s.losses;
  if (!(denom > 0.0)) throw DegenerateInput("no scored pairs: wins + losses == 0");
  WinSummary out;
  out.p_win = s.wins / denom;
  out.net_benefit = (s.wins - s.losses) / denom;
  if (s.losses == 0.0) {
    out.win_ratio = std::numeric_limits<double>::infinity();
    out.infinite_ratio = true;
  } else {
    out.win_ratio = s.wins / s.losses;
  }
  return out;
}

}  // namespace causalwr
