#include "causalwr/distreg.hpp"

#include <cmath>
#include <string>

#include "causalwr/errors.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/random.hpp"

namespace causalwr {

namespace {

constexpr std::size_t kEnumerateLimit = 12;
constexpr std::size_t kLawLimit = 16;
constexpr std::size_t kBlock = 64;

std::span<const double> row_span(const RowMatrix& m, std::size_t r) {
  return {m.data() + r * static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.cols())};
}

void check_arm(int t) {
  if (t != 0 && t != 1) throw InvalidInput("treatment arm must be 0 or 1, got " + std::to_string(t));
}

void check_opponents(std::span<const std::size_t> rows, const RowMatrix& opponents, const Dataset& d) {
  if (static_cast<std::size_t>(opponents.rows()) != rows.size())
    throw InvalidInput("need one opponent outcome per evaluated row");
  for (auto r : rows)
    if (r >= d.n()) throw InvalidInput("evaluation row " + std::to_string(r) + " out of range");
}

// Runs body(r) over [0, count) in blocks so that per-call overhead stays low.
void blocked(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(count, (b + 1) * kBlock);
    for (std::size_t r = b * kBlock; r < end; ++r) body(r);
  });
}

}  // namespace

std::string to_string(DistRegKind kind) {
  switch (kind) {
    case DistRegKind::Logistic:
      return "logistic";
    case DistRegKind::ForestWeights:
      return "forest";
    case DistRegKind::Oracle:
      return "oracle";
  }
  return "unknown";
}

double evaluate_q(const DistRegModel& m, int t, const Dataset& d, std::size_t row, std::span<const double> y,
                  const HierarchySpec& h) {
  RowMatrix opponent(1, static_cast<Eigen::Index>(y.size()));
  for (std::size_t k = 0; k < y.size(); ++k) opponent(0, static_cast<Eigen::Index>(k)) = y[k];
  const std::size_t rows[] = {row};
  return m.evaluate(t, d, rows, opponent, h)[0];
}

double q_from_law(const ConditionalLaw& law, int t, std::span<const double> y, const HierarchySpec& h) {
  check_arm(t);
  double q = 0.0;
  for (std::size_t a = 0; a < law.probabilities.size(); ++a) {
    const auto atom = row_span(law.outcomes, a);
    q += law.probabilities[a] * (t == 1 ? h.win(atom, y) : h.win(y, atom));
  }
  return q;
}

double law_contrast(const ConditionalLaw& first, const ConditionalLaw& second, const HierarchySpec& h) {
  double s = 0.0;
  for (std::size_t a = 0; a < first.probabilities.size(); ++a) {
    const auto ya = row_span(first.outcomes, a);
    double inner = 0.0;
    for (std::size_t b = 0; b < second.probabilities.size(); ++b)
      inner += second.probabilities[b] * h.win(ya, row_span(second.outcomes, b));
    s += first.probabilities[a] * inner;
  }
  return s;
}

double bernoulli_q(std::span<const double> probabilities, int t, std::span<const double> y, const HierarchySpec& h,
                   LatticeMethod method) {
  check_arm(t);
  const std::size_t dim = probabilities.size();
  h.validate_for(dim);
  if (y.size() < dim) throw InvalidInput("opponent outcome has dimension " + std::to_string(y.size()) + ", expected " + std::to_string(dim));
  if (method == LatticeMethod::Auto) method = dim <= kEnumerateLimit ? LatticeMethod::Enumerate : LatticeMethod::Prefix;

  if (method == LatticeMethod::Enumerate) {
    if (dim > 24) throw Unsupported("lattice enumeration beyond 24 binary coordinates");
    const double tie = h.tie_value();
    std::vector<double> atom(dim);
    double q = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << dim); ++mask) {
      double mass = 1.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const bool one = (mask >> k) & 1u;
        atom[k] = one ? 1.0 : 0.0;
        mass *= one ? probabilities[k] : 1.0 - probabilities[k];
      }
      if (mass == 0.0) continue;
      const WinValue v = t == 1 ? compare(h, atom, y) : compare(h, y, atom);
      q += mass * (v == WinValue::Win ? 1.0 : v == WinValue::Tie ? tie : 0.0);
    }
    return q;
  }

  // P(win) accumulates the mass that is tied on every earlier level and won
  // on the current one; coordinates are independent given x.
  double tied = 1.0;
  double win = 0.0;
  for (const auto& level : h.levels()) {
    const double p1 = probabilities[level.outcome];
    double level_win = 0.0;
    double level_tie = 0.0;
    for (int v = 0; v <= 1; ++v) {
      const double mass = v == 1 ? p1 : 1.0 - p1;
      const WinValue c = t == 1 ? compare_level(level, v, y[level.outcome]) : compare_level(level, y[level.outcome], v);
      if (c == WinValue::Win) level_win += mass;
      if (c == WinValue::Tie) level_tie += mass;
    }
    win += tied * level_win;
    tied *= level_tie;
  }
  return win + tied * h.tie_value();
}

RowMatrix LogisticDistReg::features(const Dataset& d) const {
  RowMatrix f = options_.features ? options_.features(d) : d.design_matrix();
  if (static_cast<std::size_t>(f.rows()) != d.n())
    throw InvalidInput("feature map returned " + std::to_string(f.rows()) + " rows for " + std::to_string(d.n()) + " units");
  if (p_ != 0 && static_cast<std::size_t>(f.cols()) != p_)
    throw InvalidInput("feature map returned " + std::to_string(f.cols()) + " columns, model was fitted on " +
                       std::to_string(p_));
  return f;
}

RowMatrix LogisticDistReg::coordinate_probabilities(int t, const Dataset& d) const {
  check_arm(t);
  const RowMatrix f = features(d);
  RowMatrix probs(d.n(), static_cast<Eigen::Index>(d_));
  for (std::size_t i = 0; i < d.n(); ++i)
    for (std::size_t k = 0; k < d_; ++k)
      probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = fits_[t][k].predict(f.data() + i * p_, p_);
  return probs;
}

std::vector<double> LogisticDistReg::evaluate(int t, const Dataset& d, std::span<const std::size_t> rows,
                                              const RowMatrix& opponents, const HierarchySpec& h) const {
  check_arm(t);
  check_opponents(rows, opponents, d);
  h.validate_for(d_);
  const RowMatrix probs = coordinate_probabilities(t, d);
  std::vector<double> out(rows.size());
  blocked(rows.size(), [&](std::size_t r) {
    out[r] = bernoulli_q(row_span(probs, rows[r]), t, row_span(opponents, r), h, options_.method);
  });
  return out;
}

ConditionalLaw LogisticDistReg::law(int t, const Dataset& d, std::size_t row) const {
  check_arm(t);
  if (row >= d.n()) throw InvalidInput("law row " + std::to_string(row) + " out of range");
  if (d_ > kLawLimit) throw Unsupported("explicit outcome law beyond " + std::to_string(kLawLimit) + " binary coordinates");
  const Dataset one = d.subset(std::vector<std::size_t>{row});
  const RowMatrix probs = coordinate_probabilities(t, one);
  const std::size_t atoms = std::size_t{1} << d_;
  ConditionalLaw law;
  law.outcomes.resize(static_cast<Eigen::Index>(atoms), static_cast<Eigen::Index>(d_));
  law.probabilities.resize(atoms);
  for (std::size_t mask = 0; mask < atoms; ++mask) {
    double mass = 1.0;
    for (std::size_t k = 0; k < d_; ++k) {
      const bool bit = (mask >> k) & 1u;
      law.outcomes(static_cast<Eigen::Index>(mask), static_cast<Eigen::Index>(k)) = bit ? 1.0 : 0.0;
      mass *= bit ? probs(0, static_cast<Eigen::Index>(k)) : 1.0 - probs(0, static_cast<Eigen::Index>(k));
    }
    law.probabilities[mask] = mass;
  }
  return law;
}

std::shared_ptr<LogisticDistReg> fit_distreg_logistic(const Dataset& d, LogisticDistRegOptions options) {
  d.require_both_arms();
  for (std::size_t i = 0; i < d.n(); ++i)
    for (std::size_t k = 0; k < d.d(); ++k) {
      const double v = d.outcomes()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      if (v != 0.0 && v != 1.0)
        throw InvalidInput("logistic distributional regression needs binary outcomes; '" + d.outcome_names()[k] +
                           "' is " + std::to_string(v) + " in row " + std::to_string(i));
    }
  auto model = std::make_shared<LogisticDistReg>();
  model->options_ = std::move(options);
  model->d_ = d.d();
  const RowMatrix f = model->features(d);
  model->p_ = static_cast<std::size_t>(f.cols());
  for (int t = 0; t <= 1; ++t) {
    const auto& idx = t == 1 ? d.treated() : d.controls();
    RowMatrix ft(static_cast<Eigen::Index>(idx.size()), f.cols());
    RowMatrix yt(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(d.d()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      ft.row(static_cast<Eigen::Index>(r)) = f.row(static_cast<Eigen::Index>(idx[r]));
      yt.row(static_cast<Eigen::Index>(r)) = d.outcomes().row(static_cast<Eigen::Index>(idx[r]));
    }
    auto& fits = model->fits_[t];
    if (model->options_.constraint == SharingConstraint::FullySharedAcrossCoordinates) {
      // Shared coefficients give every coordinate the same fitted mean, so the
      // pooled likelihood equals that of the coordinate-averaged response.
      const Eigen::VectorXd pooled = yt.rowwise().mean();
      fits.assign(d.d(), fit_logistic(ft, pooled, {}, model->options_.solver));
    } else {
      for (std::size_t k = 0; k < d.d(); ++k)
        fits.push_back(fit_logistic(ft, yt.col(static_cast<Eigen::Index>(k)), {}, model->options_.solver));
    }
  }
  model->training_rows_ = d.row_ids();
  return model;
}

SparseWeights ForestDistReg::weights(int t, const Dataset& d, std::size_t row) const {
  check_arm(t);
  if (row >= d.n()) throw InvalidInput("row " + std::to_string(row) + " out of range");
  const RowMatrix x = d.design_matrix();
  if (static_cast<std::size_t>(x.cols()) != forests_[t]->feature_count())
    throw InvalidInput("forest expects " + std::to_string(forests_[t]->feature_count()) + " design columns");
  return forests_[t]->weights(x.data() + row * static_cast<std::size_t>(x.cols()));
}

std::vector<double> ForestDistReg::evaluate(int t, const Dataset& d, std::span<const std::size_t> rows,
                                            const RowMatrix& opponents, const HierarchySpec& h) const {
  check_arm(t);
  check_opponents(rows, opponents, d);
  h.validate_for(static_cast<std::size_t>(outcomes_[t].cols()));
  const RowMatrix x = d.design_matrix();
  const auto p = static_cast<std::size_t>(x.cols());
  if (p != forests_[t]->feature_count())
    throw InvalidInput("forest expects " + std::to_string(forests_[t]->feature_count()) + " design columns, got " +
                       std::to_string(p));
  std::vector<double> out(rows.size());
  blocked(rows.size(), [&](std::size_t r) {
    const auto y = row_span(opponents, r);
    double q = 0.0;
    for (const auto& [i, omega] : forests_[t]->weights(x.data() + rows[r] * p)) {
      const auto yi = row_span(outcomes_[t], i);
      q += omega * (t == 1 ? h.win(yi, y) : h.win(y, yi));
    }
    out[r] = q;
  });
  return out;
}

ConditionalLaw ForestDistReg::law(int t, const Dataset& d, std::size_t row) const {
  const auto w = weights(t, d, row);
  ConditionalLaw law;
  law.outcomes.resize(static_cast<Eigen::Index>(w.size()), outcomes_[t].cols());
  law.probabilities.resize(w.size());
  for (std::size_t a = 0; a < w.size(); ++a) {
    law.outcomes.row(static_cast<Eigen::Index>(a)) = outcomes_[t].row(w[a].first);
    law.probabilities[a] = w[a].second;
  }
  return law;
}

std::shared_ptr<ForestDistReg> fit_distreg_forest(const Dataset& train, const ForestOptions& options,
                                                  std::uint64_t seed) {
  options.validate();
  train.require_both_arms();
  auto model = std::make_shared<ForestDistReg>();
  const RowMatrix x = train.design_matrix();
  for (int t = 0; t <= 1; ++t) {
    const auto& idx = t == 1 ? train.treated() : train.controls();
    if (idx.size() < options.min_leaf)
      throw InvalidInput("arm " + std::to_string(t) + " has " + std::to_string(idx.size()) +
                         " training units, fewer than min_leaf=" + std::to_string(options.min_leaf));
    RowMatrix xt(static_cast<Eigen::Index>(idx.size()), x.cols());
    RowMatrix yt(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(train.d()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      xt.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
      yt.row(static_cast<Eigen::Index>(r)) = train.outcomes().row(static_cast<Eigen::Index>(idx[r]));
    }
    model->forests_[t] = std::make_shared<const Forest>(Forest::fit(xt, yt, options, derive_seed(seed, 0xF0, t)));
    model->outcomes_[t] = std::move(yt);
  }
  model->training_rows_ = train.row_ids();
  return model;
}

OracleDistReg::OracleDistReg(LawFunction law, QFunction q) : law_(std::move(law)), q_(std::move(q)) {
  if (!law_ && !q_) throw InvalidInput("oracle distributional regression needs a law or a q function");
}

std::vector<double> OracleDistReg::evaluate(int t, const Dataset& d, std::span<const std::size_t> rows,
                                            const RowMatrix& opponents, const HierarchySpec& h) const {
  check_arm(t);
  check_opponents(rows, opponents, d);
  std::vector<double> out(rows.size());
  blocked(rows.size(), [&](std::size_t r) {
    const auto y = row_span(opponents, r);
    out[r] = q_ ? q_(t, d, rows[r], y, h) : q_from_law(law_(t, d, rows[r]), t, y, h);
  });
  return out;
}

ConditionalLaw OracleDistReg::law(int t, const Dataset& d, std::size_t row) const {
  check_arm(t);
  if (!law_) throw Unsupported("this oracle provides q only, not the conditional law");
  return law_(t, d, row);
}

}  // namespace causalwr
