#include "causalwr/dataset.hpp"

#include <cmath>
#include <string>

#include "causalwr/errors.hpp"

namespace causalwr {

CovariateColumn CovariateColumn::numeric(std::string name) {
  return CovariateColumn{std::move(name), ColumnKind::Numeric, {}};
}

CovariateColumn CovariateColumn::categorical(std::string name, std::vector<std::string> levels) {
  return CovariateColumn{std::move(name), ColumnKind::Categorical, std::move(levels)};
}

Dataset::Dataset(std::vector<CovariateColumn> schema, Eigen::MatrixXd covariates, std::vector<int> treatment,
                 RowMatrix outcomes, std::vector<std::string> outcome_names, std::string treatment_name)
    : schema_(std::move(schema)),
      covariates_(std::move(covariates)),
      treatment_(std::move(treatment)),
      outcomes_(std::move(outcomes)),
      outcome_names_(std::move(outcome_names)),
      treatment_name_(std::move(treatment_name)) {
  const auto n = treatment_.size();
  if (n == 0) throw InvalidInput("dataset has no units");
  if (static_cast<std::size_t>(covariates_.rows()) != n)
    throw InvalidInput("covariate matrix has " + std::to_string(covariates_.rows()) + " rows, expected " +
                       std::to_string(n));
  if (static_cast<std::size_t>(covariates_.cols()) != schema_.size())
    throw InvalidInput("covariate matrix has " + std::to_string(covariates_.cols()) + " columns but schema lists " +
                       std::to_string(schema_.size()));
  if (static_cast<std::size_t>(outcomes_.rows()) != n)
    throw InvalidInput("outcome matrix has " + std::to_string(outcomes_.rows()) + " rows, expected " +
                       std::to_string(n));
  if (outcomes_.cols() == 0) throw InvalidInput("outcome matrix has no columns");
  if (outcome_names_.empty()) {
    for (Eigen::Index k = 0; k < outcomes_.cols(); ++k) outcome_names_.push_back("y" + std::to_string(k + 1));
  } else if (outcome_names_.size() != static_cast<std::size_t>(outcomes_.cols())) {
    throw InvalidInput("outcome_names has wrong length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (treatment_[i] != 0 && treatment_[i] != 1)
      throw InvalidInput("treatment of row " + std::to_string(i) + " is " + std::to_string(treatment_[i]) +
                         ", expected 0 or 1");
    for (Eigen::Index k = 0; k < outcomes_.cols(); ++k)
      if (!std::isfinite(outcomes_(i, k)))
        throw InvalidInput("missing or non-finite outcome '" + outcome_names_[k] + "' in row " + std::to_string(i));
    for (std::size_t c = 0; c < schema_.size(); ++c) {
      const double v = covariates_(i, c);
      if (!std::isfinite(v))
        throw InvalidInput("missing or non-finite covariate '" + schema_[c].name + "' in row " + std::to_string(i));
      if (schema_[c].kind == ColumnKind::Categorical) {
        if (v != std::floor(v) || v < 0 || v >= static_cast<double>(schema_[c].levels.size()))
          throw InvalidInput("categorical covariate '" + schema_[c].name + "' has invalid level code in row " +
                             std::to_string(i));
      }
    }
  }
  row_ids_.resize(n);
  for (std::size_t i = 0; i < n; ++i) row_ids_[i] = i;
  index_arms();
}

Dataset Dataset::numeric(Eigen::MatrixXd covariates, std::vector<int> treatment, RowMatrix outcomes) {
  std::vector<CovariateColumn> schema;
  for (Eigen::Index c = 0; c < covariates.cols(); ++c) schema.push_back(CovariateColumn::numeric("x" + std::to_string(c + 1)));
  return Dataset(std::move(schema), std::move(covariates), std::move(treatment), std::move(outcomes));
}

void Dataset::index_arms() {
  controls_.clear();
  treated_.clear();
  for (std::size_t i = 0; i < treatment_.size(); ++i) (treatment_[i] == 1 ? treated_ : controls_).push_back(i);
}

void Dataset::require_both_arms() const {
  if (controls_.empty() || treated_.empty())
    throw DegenerateInput("both treatment arms must be non-empty (n_control=" + std::to_string(controls_.size()) +
                          ", n_treated=" + std::to_string(treated_.size()) + ")");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  const auto m = indices.size();
  Eigen::MatrixXd x(m, covariates_.cols());
  RowMatrix y(m, outcomes_.cols());
  std::vector<int> t(m);
  std::vector<std::size_t> ids(m);
  for (std::size_t r = 0; r < m; ++r) {
    const auto i = indices[r];
    if (i >= n()) throw InvalidInput("subset index " + std::to_string(i) + " out of range");
    x.row(r) = covariates_.row(i);
    y.row(r) = outcomes_.row(i);
    t[r] = treatment_[i];
    ids[r] = row_ids_[i];
  }
  Dataset out(schema_, std::move(x), std::move(t), std::move(y), outcome_names_, treatment_name_);
  out.row_ids_ = std::move(ids);
  return out;
}

Dataset Dataset::reindexed() const {
  Dataset out(*this);
  for (std::size_t i = 0; i < out.row_ids_.size(); ++i) out.row_ids_[i] = i;
  return out;
}

namespace {

RowMatrix encode(const Dataset& d, bool drop_first) {
  std::size_t width = 0;
  for (const auto& col : d.schema()) {
    if (col.kind == ColumnKind::Numeric) {
      ++width;
    } else {
      width += col.levels.size() - (drop_first && !col.levels.empty() ? 1 : 0);
    }
  }
  RowMatrix out = RowMatrix::Zero(d.n(), width);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < d.p(); ++c) {
    const auto& col = d.schema()[c];
    if (col.kind == ColumnKind::Numeric) {
      out.col(offset) = d.covariates().col(c);
      ++offset;
      continue;
    }
    const std::size_t first = drop_first ? 1 : 0;
    for (std::size_t i = 0; i < d.n(); ++i) {
      const auto level = static_cast<std::size_t>(d.covariates()(i, c));
      if (level >= first) out(i, offset + level - first) = 1.0;
    }
    offset += col.levels.size() - first;
  }
  return out;
}

}  // namespace

RowMatrix Dataset::design_matrix() const { return encode(*this, true); }

RowMatrix Dataset::distance_features() const { return encode(*this, false); }

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < schema_.size(); ++c)
    if (schema_[c].name == name) return c;
  throw InvalidInput("unknown covariate column '" + name + "'");
}

}  // namespace causalwr
