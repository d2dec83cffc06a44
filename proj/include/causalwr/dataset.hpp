#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace causalwr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ColumnKind { Numeric, Categorical };

struct CovariateColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  // Level labels for categorical columns; the stored value is the level index.
  std::vector<std::string> levels;

  static CovariateColumn numeric(std::string name);
  static CovariateColumn categorical(std::string name, std::vector<std::string> levels);
};

// Observed sample (X_i, T_i, Y_i), i = 0..n-1.
//
// Covariates are kept raw: numeric columns hold their value, categorical
// columns hold a level index into CovariateColumn::levels. Two numeric
// encodings are derived on demand, one for regression-type models (reference
// level dropped) and one for distances (every level one-hot).
//
// Each row carries a row id. Subsets keep the ids of the rows they were
// taken from, which lets nuisance models check that they are evaluated on
// data disjoint from their training sample.
class Dataset {
 public:
  Dataset(std::vector<CovariateColumn> schema, Eigen::MatrixXd covariates, std::vector<int> treatment,
          RowMatrix outcomes, std::vector<std::string> outcome_names = {}, std::string treatment_name = "T");

  // All-numeric covariates with default column names x1..xp, y1..yd.
  static Dataset numeric(Eigen::MatrixXd covariates, std::vector<int> treatment, RowMatrix outcomes);

  std::size_t n() const noexcept { return treatment_.size(); }
  std::size_t p() const noexcept { return schema_.size(); }
  std::size_t d() const noexcept { return static_cast<std::size_t>(outcomes_.cols()); }

  const std::vector<CovariateColumn>& schema() const noexcept { return schema_; }
  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }
  const std::vector<int>& treatment() const noexcept { return treatment_; }
  const RowMatrix& outcomes() const noexcept { return outcomes_; }
  const std::vector<std::string>& outcome_names() const noexcept { return outcome_names_; }
  const std::string& treatment_name() const noexcept { return treatment_name_; }
  const std::vector<std::size_t>& row_ids() const noexcept { return row_ids_; }

  int arm(std::size_t i) const { return treatment_[i]; }
  std::span<const double> outcome(std::size_t i) const {
    return {outcomes_.data() + i * outcomes_.cols(), static_cast<std::size_t>(outcomes_.cols())};
  }

  // Indices of the control (T=0) and treated (T=1) units, ascending.
  const std::vector<std::size_t>& controls() const noexcept { return controls_; }
  const std::vector<std::size_t>& treated() const noexcept { return treated_; }
  std::size_t n_control() const noexcept { return controls_.size(); }
  std::size_t n_treated() const noexcept { return treated_.size(); }

  // Throws DegenerateInput when either arm is empty.
  void require_both_arms() const;

  // Rows in the given order (duplicates allowed, as in bootstrap resamples).
  Dataset subset(std::span<const std::size_t> indices) const;
  // Same rows with fresh ids 0..n-1, so resampled duplicates count as
  // distinct units.
  Dataset reindexed() const;

  // Numeric columns as-is, categorical columns one-hot without their first
  // level. Suitable for models with an intercept.
  RowMatrix design_matrix() const;
  // Numeric columns as-is, categorical columns fully one-hot.
  RowMatrix distance_features() const;

  std::size_t column_index(const std::string& name) const;

 private:
  std::vector<CovariateColumn> schema_;
  Eigen::MatrixXd covariates_;
  std::vector<int> treatment_;
  RowMatrix outcomes_;
  std::vector<std::string> outcome_names_;
  std::string treatment_name_;
  std::vector<std::size_t> row_ids_;
  std::vector<std::size_t> controls_;
  std::vector<std::size_t> treated_;

  void index_arms();
};

}  // namespace causalwr
