#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "causalwr/dataset.hpp"
#include "causalwr/forest.hpp"
#include "causalwr/logistic.hpp"

namespace causalwr {

enum class PropensityKind { LogisticLinear, ForestProbability, ConstantOracle, Plugin };

std::string to_string(PropensityKind kind);

struct Clip {
  double lo = 0.01;
  double hi = 0.99;

  void validate() const;
  double apply(double p) const noexcept;
};

// π(x) for row `row` of a dataset.
using PropensityFunction = std::function<double(const Dataset&, std::size_t)>;

// Fitted or supplied π̂(x). Every prediction is clipped into [clip.lo, clip.hi].
class PropensityModel {
 public:
  static PropensityModel constant(double pi, Clip clip = {});
  static PropensityModel plugin(PropensityFunction f, Clip clip = {}, std::string label = "plugin");

  PropensityKind kind() const noexcept { return kind_; }
  const Clip& clip() const noexcept { return clip_; }
  const std::string& label() const noexcept { return label_; }
  double constant_value() const noexcept { return constant_; }
  const std::optional<LogisticFit>& logistic() const noexcept { return logistic_; }
  const std::shared_ptr<const Forest>& forest() const noexcept { return forest_; }
  const std::vector<std::size_t>& training_rows() const noexcept { return training_rows_; }
  const std::string& warning() const noexcept { return warning_; }

  double predict(const Dataset& d, std::size_t row) const;
  std::vector<double> predict(const Dataset& d) const;
  // Out-of-bag predictions on the forest's own training sample.
  std::vector<double> predict_oob() const;

  friend PropensityModel fit_propensity_logistic(const Dataset& d, Clip clip, const LogisticOptions& options);
  friend PropensityModel fit_propensity_forest(const Dataset& d, const ForestOptions& options, Clip clip,
                                               std::uint64_t seed);

 private:
  PropensityKind kind_ = PropensityKind::ConstantOracle;
  Clip clip_;
  std::string label_;
  double constant_ = 0.5;
  std::optional<LogisticFit> logistic_;
  std::shared_ptr<const Forest> forest_;
  PropensityFunction plugin_;
  std::vector<std::size_t> training_rows_;
  std::string warning_;
};

// Logistic regression of T on (1, design_matrix()). Separation is reported in
// warning() rather than thrown.
PropensityModel fit_propensity_logistic(const Dataset& d, Clip clip = {}, const LogisticOptions& options = {});

// Probability forest: trees grown on T, prediction is the average leaf
// frequency of T=1.
PropensityModel fit_propensity_forest(const Dataset& d, const ForestOptions& options = {}, Clip clip = {},
                                      std::uint64_t seed = 0);

}  // namespace causalwr
