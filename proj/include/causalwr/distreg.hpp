#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "causalwr/dataset.hpp"
#include "causalwr/forest.hpp"
#include "causalwr/logistic.hpp"
#include "causalwr/model.hpp"

namespace causalwr {

enum class DistRegKind { Logistic, ForestWeights, Oracle };

std::string to_string(DistRegKind kind);

// Discrete conditional law of Y(t) given X = x: atoms and their masses.
struct ConditionalLaw {
  RowMatrix outcomes;
  std::vector<double> probabilities;
};

// Fitted q̂_t(x, y) with
//   q_1(x, y) = E[w(Y(1) | y) | X = x],   q_0(x, y) = E[w(y | Y(0)) | X = x].
// The hierarchy is supplied at evaluation time so one fit serves both the win
// and the loss contrast.
class DistRegModel {
 public:
  virtual ~DistRegModel() = default;

  virtual DistRegKind kind() const noexcept = 0;

  // q̂_t(X_{rows[r]}, opponents.row(r)) for every r.
  virtual std::vector<double> evaluate(int t, const Dataset& d, std::span<const std::size_t> rows,
                                       const RowMatrix& opponents, const HierarchySpec& h) const = 0;

  virtual ConditionalLaw law(int t, const Dataset& d, std::size_t row) const = 0;

  // Row ids of the sample the model was fitted on (empty for oracles).
  const std::vector<std::size_t>& training_rows() const noexcept { return training_rows_; }

 protected:
  std::vector<std::size_t> training_rows_;
};

double evaluate_q(const DistRegModel& m, int t, const Dataset& d, std::size_t row, std::span<const double> y,
                  const HierarchySpec& h);

// Maps a dataset to the regressors of the logistic model (an intercept is
// always added on top). The default is design_matrix().
using FeatureMap = std::function<RowMatrix(const Dataset&)>;

enum class SharingConstraint { Free, FullySharedAcrossCoordinates };

// How E[w] is computed under the product-Bernoulli law.
enum class LatticeMethod { Auto, Enumerate, Prefix };

struct LogisticDistRegOptions {
  SharingConstraint constraint = SharingConstraint::Free;
  FeatureMap features;  // empty means design_matrix()
  std::string feature_label = "design";
  LatticeMethod method = LatticeMethod::Auto;  // Auto enumerates for d <= 12
  LogisticOptions solver;
};

class LogisticDistReg final : public DistRegModel {
 public:
  DistRegKind kind() const noexcept override { return DistRegKind::Logistic; }
  std::vector<double> evaluate(int t, const Dataset& d, std::span<const std::size_t> rows,
                               const RowMatrix& opponents, const HierarchySpec& h) const override;
  ConditionalLaw law(int t, const Dataset& d, std::size_t row) const override;

  // Per-coordinate success probabilities P(Y_k(t) = 1 | X = x) for each row.
  RowMatrix coordinate_probabilities(int t, const Dataset& d) const;

  const LogisticDistRegOptions& options() const noexcept { return options_; }
  // fits()[t][k]: coordinate k in arm t (identical across k when shared).
  const std::array<std::vector<LogisticFit>, 2>& fits() const noexcept { return fits_; }
  std::size_t outcome_dimension() const noexcept { return d_; }

  friend std::shared_ptr<LogisticDistReg> fit_distreg_logistic(const Dataset& d, LogisticDistRegOptions options);

 private:
  RowMatrix features(const Dataset& d) const;

  LogisticDistRegOptions options_;
  std::array<std::vector<LogisticFit>, 2> fits_;
  std::size_t d_ = 0;
  std::size_t p_ = 0;
};

// Product of independent per-coordinate Bernoulli laws; w expectations via
// lattice enumeration or the prefix recursion over hierarchy levels.
double bernoulli_q(std::span<const double> probabilities, int t, std::span<const double> y, const HierarchySpec& h,
                   LatticeMethod method);

std::shared_ptr<LogisticDistReg> fit_distreg_logistic(const Dataset& d, LogisticDistRegOptions options = {});

class ForestDistReg final : public DistRegModel {
 public:
  DistRegKind kind() const noexcept override { return DistRegKind::ForestWeights; }
  std::vector<double> evaluate(int t, const Dataset& d, std::span<const std::size_t> rows,
                               const RowMatrix& opponents, const HierarchySpec& h) const override;
  ConditionalLaw law(int t, const Dataset& d, std::size_t row) const override;

  // ω_i(x, t) over the training units of arm t (indices into arm_outcomes(t)).
  SparseWeights weights(int t, const Dataset& d, std::size_t row) const;

  const Forest& forest(int t) const { return *forests_[t]; }
  const RowMatrix& arm_outcomes(int t) const { return outcomes_[t]; }

  friend std::shared_ptr<ForestDistReg> fit_distreg_forest(const Dataset& train, const ForestOptions& options,
                                                           std::uint64_t seed);

 private:
  std::array<std::shared_ptr<const Forest>, 2> forests_;
  std::array<RowMatrix, 2> outcomes_;
};

// One forest per arm on that arm's training units, multi-output splits on Y.
std::shared_ptr<ForestDistReg> fit_distreg_forest(const Dataset& train, const ForestOptions& options = {},
                                                  std::uint64_t seed = 0);

// Oracle: the true conditional laws, supplied by a simulator or a user.
using LawFunction = std::function<ConditionalLaw(int t, const Dataset& d, std::size_t row)>;
using QFunction =
    std::function<double(int t, const Dataset& d, std::size_t row, std::span<const double> y, const HierarchySpec& h)>;

class OracleDistReg final : public DistRegModel {
 public:
  // q defaults to the expectation under law() when not supplied.
  explicit OracleDistReg(LawFunction law, QFunction q = {});

  DistRegKind kind() const noexcept override { return DistRegKind::Oracle; }
  std::vector<double> evaluate(int t, const Dataset& d, std::span<const std::size_t> rows,
                               const RowMatrix& opponents, const HierarchySpec& h) const override;
  ConditionalLaw law(int t, const Dataset& d, std::size_t row) const override;

 private:
  LawFunction law_;
  QFunction q_;
};

// q_t(x, y) as the expectation of the win function under a discrete law.
double q_from_law(const ConditionalLaw& law, int t, std::span<const double> y, const HierarchySpec& h);

// Σ_a Σ_b p_a q_b w(a | b) for independent draws a ~ first, b ~ second.
double law_contrast(const ConditionalLaw& first, const ConditionalLaw& second, const HierarchySpec& h);

}  // namespace causalwr
