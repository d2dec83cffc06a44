#include "causalwr/propensity.hpp"

#include <algorithm>
#include <cmath>

#include "causalwr/errors.hpp"

namespace causalwr {

std::string to_string(PropensityKind kind) {
  switch (kind) {
    case PropensityKind::LogisticLinear:
      return "logistic";
    case PropensityKind::ForestProbability:
      return "forest";
    case PropensityKind::ConstantOracle:
      return "constant";
    case PropensityKind::Plugin:
      return "plugin";
  }
  return "unknown";
}

void Clip::validate() const {
  if (!(lo > 0.0 && lo < hi && hi < 1.0))
    throw InvalidInput("propensity clip must satisfy 0 < lo < hi < 1, got (" + std::to_string(lo) + ", " +
                       std::to_string(hi) + ")");
}

double Clip::apply(double p) const noexcept { return std::clamp(p, lo, hi); }

PropensityModel PropensityModel::constant(double pi, Clip clip) {
  clip.validate();
  if (!(pi > 0.0 && pi < 1.0)) throw InvalidInput("constant propensity must lie in (0, 1)");
  PropensityModel m;
  m.kind_ = PropensityKind::ConstantOracle;
  m.clip_ = clip;
  m.constant_ = pi;
  m.label_ = "constant";
  return m;
}

PropensityModel PropensityModel::plugin(PropensityFunction f, Clip clip, std::string label) {
  clip.validate();
  if (!f) throw InvalidInput("plugin propensity needs a function");
  PropensityModel m;
  m.kind_ = PropensityKind::Plugin;
  m.clip_ = clip;
  m.plugin_ = std::move(f);
  m.label_ = std::move(label);
  return m;
}

double PropensityModel::predict(const Dataset& d, std::size_t row) const {
  if (row >= d.n()) throw InvalidInput("propensity row " + std::to_string(row) + " out of range");
  switch (kind_) {
    case PropensityKind::ConstantOracle:
      return clip_.apply(constant_);
    case PropensityKind::Plugin:
      return clip_.apply(plugin_(d, row));
    case PropensityKind::LogisticLinear:
    case PropensityKind::ForestProbability: {
      const RowMatrix x = d.subset(std::vector<std::size_t>{row}).design_matrix();
      if (kind_ == PropensityKind::LogisticLinear)
        return clip_.apply(logistic_->predict(x.data(), static_cast<std::size_t>(x.cols())));
      return clip_.apply(forest_->predict_mean(x.data()));
    }
  }
  throw InvalidInput("unknown propensity kind");
}

std::vector<double> PropensityModel::predict(const Dataset& d) const {
  std::vector<double> out(d.n());
  switch (kind_) {
    case PropensityKind::ConstantOracle:
      std::fill(out.begin(), out.end(), clip_.apply(constant_));
      return out;
    case PropensityKind::Plugin:
      for (std::size_t i = 0; i < d.n(); ++i) out[i] = clip_.apply(plugin_(d, i));
      return out;
    case PropensityKind::LogisticLinear:
    case PropensityKind::ForestProbability:
      break;
  }
  const RowMatrix x = d.design_matrix();
  const auto p = static_cast<std::size_t>(x.cols());
  const std::size_t expected = kind_ == PropensityKind::LogisticLinear
                                   ? static_cast<std::size_t>(logistic_->coefficients.size() - 1)
                                   : forest_->feature_count();
  if (p != expected)
    throw InvalidInput("propensity model expects " + std::to_string(expected) + " design columns, got " +
                       std::to_string(p));
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double* row = x.data() + i * p;
    out[i] = clip_.apply(kind_ == PropensityKind::LogisticLinear ? logistic_->predict(row, p)
                                                                  : forest_->predict_mean(row));
  }
  return out;
}

std::vector<double> PropensityModel::predict_oob() const {
  if (kind_ != PropensityKind::ForestProbability) throw InvalidInput("out-of-bag predictions need a forest propensity");
  std::vector<double> out(forest_->training_size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = clip_.apply(forest_->predict_oob_mean(i));
  return out;
}

namespace {

Eigen::VectorXd treatment_vector(const Dataset& d) {
  Eigen::VectorXd t(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) t(i) = d.arm(i);
  return t;
}

}  // namespace

PropensityModel fit_propensity_logistic(const Dataset& d, Clip clip, const LogisticOptions& options) {
  clip.validate();
  d.require_both_arms();
  PropensityModel m;
  m.kind_ = PropensityKind::LogisticLinear;
  m.clip_ = clip;
  m.label_ = "logistic";
  m.logistic_ = fit_logistic(d.design_matrix(), treatment_vector(d), {}, options);
  m.training_rows_ = d.row_ids();
  if (m.logistic_->separation)
    m.warning_ = "treatment is (quasi) separable by the covariates; coefficients diverge and predictions are clipped";
  else if (!m.logistic_->converged)
    m.warning_ = "logistic propensity did not reach the gradient tolerance";
  return m;
}

PropensityModel fit_propensity_forest(const Dataset& d, const ForestOptions& options, Clip clip, std::uint64_t seed) {
  clip.validate();
  d.require_both_arms();
  PropensityModel m;
  m.kind_ = PropensityKind::ForestProbability;
  m.clip_ = clip;
  m.label_ = "forest";
  RowMatrix t(d.n(), 1);
  t.col(0) = treatment_vector(d);
  m.forest_ = std::make_shared<const Forest>(Forest::fit(d.design_matrix(), t, options, seed));
  m.training_rows_ = d.row_ids();
  return m;
}

}  // namespace causalwr
