#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causalwr/dataset.hpp"

namespace causalwr {

enum class Direction { HigherBetter, LowerBetter };

// How a tie on every level of the hierarchy is scored: 1/2, 0, or removed
// from both the numerator and the denominator.
enum class TiePolicy { HalfWin, Loss, Drop };

enum class WinValue { Win, Tie, Loss };

struct HierarchyLevel {
  std::size_t outcome = 0;
  Direction direction = Direction::HigherBetter;
  // Values within this absolute distance are equal at this level.
  double tolerance = 0.0;
};

// Prioritised outcome hierarchy plus tie policy; defines the win function
// w(y | y') = favourability of y over y'.
class HierarchySpec {
 public:
  HierarchySpec(std::vector<HierarchyLevel> levels, TiePolicy ties);

  // Single outcome 0 with the given direction.
  static HierarchySpec single(Direction direction, TiePolicy ties);
  // Outcomes 0..d-1 in order, all with the same direction.
  static HierarchySpec lexicographic(std::size_t d, Direction direction, TiePolicy ties);

  const std::vector<HierarchyLevel>& levels() const noexcept { return levels_; }
  TiePolicy tie_policy() const noexcept { return ties_; }

  // Smallest outcome dimension this hierarchy can be applied to.
  std::size_t required_dimension() const noexcept { return required_dim_; }
  void validate_for(std::size_t outcome_dim) const;

  // Same levels with every direction flipped, so that
  // compare(reversed(), a, b) == compare(*this, b, a). This is the loss
  // contrast w_loss(y | y') = w(y' | y).
  HierarchySpec reversed() const;
  HierarchySpec with_tie_policy(TiePolicy ties) const;

  // Score of a full tie; throws InvalidInput under TiePolicy::Drop, for which
  // expectations of w are undefined.
  double tie_value() const;

  // Numeric w value, or nullopt for a dropped tie.
  std::optional<double> score(WinValue v) const noexcept;

  // w(y | y2) for model-based estimators (requires a non-Drop policy).
  double win(std::span<const double> y, std::span<const double> y2) const;

 private:
  std::vector<HierarchyLevel> levels_;
  TiePolicy ties_;
  std::size_t required_dim_ = 0;
};

// Walks the levels in priority order and returns Win/Loss for `y` at the
// first level where the direction-adjusted values differ, Tie otherwise.
WinValue compare(const HierarchySpec& h, std::span<const double> y, std::span<const double> y2);

// Scalar comparison at a single level.
WinValue compare_level(const HierarchyLevel& level, double a, double b) noexcept;

enum class PairProvenance { Complete, Stratified, KNN, OptimalMatch };

std::string to_string(PairProvenance p);

struct Pair {
  std::uint32_t control;
  std::uint32_t treated;

  friend bool operator==(const Pair&, const Pair&) = default;
};

// Ordered (control, treated) index pairs into a Dataset.
struct PairSet {
  std::vector<Pair> pairs;
  PairProvenance provenance = PairProvenance::Complete;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  // Every pair must reference a control first and a treated unit second.
  void validate_for(const Dataset& d) const;
};

struct WinStats {
  double wins = 0.0;     // fractional under HalfWin
  double losses = 0.0;
  std::size_t dropped = 0;  // ties removed under Drop
  std::size_t pairs = 0;    // pairs that were scored (excludes dropped)
  TiePolicy ties = TiePolicy::HalfWin;
};

// n_wins = sum over pairs of w(Y_treated | Y_control) under the hierarchy's
// tie policy. Throws DegenerateInput on an empty pair set.
WinStats win_stats(const Dataset& d, const PairSet& pairs, const HierarchySpec& h);

struct WinSummary {
  double p_win = 0.0;        // n_W / (n_W + n_L)
  double win_ratio = 0.0;    // n_W / n_L, +inf when n_L == 0
  double net_benefit = 0.0;  // (n_W - n_L) / (n_W + n_L)
  bool infinite_ratio = false;
};

// Throws DegenerateInput when n_W + n_L == 0.
WinSummary summary_from_stats(const WinStats& s);

}  // namespace causalwr
