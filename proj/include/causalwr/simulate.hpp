#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "causalwr/dataset.hpp"
#include "causalwr/distreg.hpp"
#include "causalwr/model.hpp"
#include "causalwr/propensity.hpp"

namespace causalwr {

enum class TreatmentKind { Constant, LogitLinear, NonlinearProduct, Alternating, Fixed };
enum class OutcomeMode { Correlated, Uncorrelated, NonlinearQuadratic, TwoGroup };
enum class LinkFunction { NormalCdf, Logistic };

std::string to_string(TreatmentKind kind);
std::string to_string(OutcomeMode mode);
std::string to_string(LinkFunction link);

double apply_link(LinkFunction link, double z) noexcept;

struct TreatmentSpec {
  TreatmentKind kind = TreatmentKind::Constant;
  double pi = 0.5;                 // Constant
  Eigen::VectorXd v;               // LogitLinear; empty means (1, ..., 1)/sqrt(p)
  std::vector<int> assignment;     // Fixed
};

// Outcome values of the two-group design: group 1 has Y(1)=y1 > Y(0)=y0,
// group 2 has Y(1)=y1_prime < Y(0)=y0_prime, with y0' > y1 > y0 > y1'.
struct TwoGroupValues {
  double y1_prime = 0.0;
  double y0 = 1.0;
  double y1 = 2.0;
  double y0_prime = 3.0;
};

struct GenConfig {
  std::size_t n = 1000;
  std::size_t p = 3;
  std::size_t d = 3;
  TreatmentSpec treatment;
  OutcomeMode outcome = OutcomeMode::Correlated;
  // Correlated mode: u^(0), u^(1); empty means drawn from design_seed.
  Eigen::VectorXd u0;
  Eigen::VectorXd u1;
  // Seeds the random unit vectors of the design, kept apart from `seed` so
  // that replications share one data-generating law.
  std::uint64_t design_seed = 1;
  // TwoGroup: X_1 is the group-2 indicator (P = alpha), remaining columns
  // are N(0, 1) noise.
  double alpha = 0.4;
  TwoGroupValues values;
  // TwoGroup: the last round(alpha n) units form group 2 instead of a
  // random draw.
  bool deterministic_layout = false;
  LinkFunction link = LinkFunction::NormalCdf;
  std::uint64_t seed = 0;

  void validate() const;
};

// Coefficients of the outcome and treatment models, resolved from the config.
struct Design {
  Eigen::MatrixXd u0;  // d x p, rows u_k^(0)
  Eigen::MatrixXd u1;  // d x p, rows u_k^(1)
  Eigen::VectorXd v;
};

Design resolve_design(const GenConfig& cfg);

struct SimulatedData {
  Dataset data;
  RowMatrix y0;
  RowMatrix y1;
  std::vector<double> propensity;  // true π(X_i); 1/2 for design-based layouts
  Design design;
};

// i.i.d. draws: X ~ N(0, I_p), T | X per the treatment spec, Y(0) and Y(1)
// conditionally independent given X, observed Y = Y(T).
SimulatedData generate(const GenConfig& cfg);

// The six-unit two-group table: X = (0,0,0,0,1,1), T = (1,0,1,0,1,0).
SimulatedData example_one();

// True π(x) at a covariate row.
double true_propensity(const GenConfig& cfg, const Design& design, std::span<const double> x);

// P(Y_k(t) = 1 | X = x) for binary modes; for TwoGroup the law is a point
// mass and this throws.
std::vector<double> outcome_probabilities(const GenConfig& cfg, const Design& design, std::span<const double> x,
                                          int t);

// Exact conditional law of Y(t) given X = x.
ConditionalLaw true_law(const GenConfig& cfg, const Design& design, std::span<const double> x, int t);

PropensityModel oracle_propensity(const GenConfig& cfg, Clip clip = {});
std::shared_ptr<OracleDistReg> oracle_distreg(const GenConfig& cfg);

enum class OracleMethod { ClosedForm, MonteCarlo };

struct OracleResult {
  double tau_indiv = 0.0;
  double tau_pop = 0.0;
  double tau_star = 0.0;
  OracleMethod method = OracleMethod::ClosedForm;
  std::size_t draws = 0;
  // Monte-Carlo standard errors (zero for closed forms).
  double se_indiv = 0.0;
  double se_pop = 0.0;
  double se_star = 0.0;
};

// TwoGroup: exact enumeration of the two groups. Other modes: R Monte-Carlo
// draws (R >= 10^4); τ⋆ uses the exact conditional expectation given (X, Y(0)).
OracleResult oracle_taus(const GenConfig& cfg, const HierarchySpec& h, std::size_t draws = 1000000);

struct TvBounds {
  double bound_star = 0.0;  // TV((Y^(X)(1), Y(0)), (Y(1), Y(0)))
  double bound_pop = 0.0;   // TV((Y_j(1), Y_i(0)), (Y(1), Y(0)))
  // Estimands evaluated on the same enumeration, so the bounds can be
  // checked against them exactly.
  double tau_indiv = 0.0;
  double tau_star = 0.0;
  double tau_pop = 0.0;
  bool exact = true;            // false when X was averaged by Monte Carlo
  std::size_t covariate_draws = 0;
};

// Joint laws enumerated over the discrete outcome space (d <= 12). Requires a
// non-Drop tie policy.
TvBounds tv_proxy_bounds(const GenConfig& cfg, const HierarchySpec& h, std::size_t covariate_draws = 20000);

}  // namespace causalwr
