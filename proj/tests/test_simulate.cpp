#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "causalwr/errors.hpp"
#include "causalwr/parallel.hpp"
#include "causalwr/simulate.hpp"
#include "causalwr/study.hpp"
#include "helpers.hpp"

using namespace causalwr;

namespace {

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

GenConfig two_group(double alpha) {
  GenConfig g;
  g.n = 100;
  g.p = 1;
  g.d = 1;
  g.outcome = OutcomeMode::TwoGroup;
  g.alpha = alpha;
  return g;
}

GenConfig example_one_config() {
  GenConfig g = two_group(1.0 / 3.0);
  g.n = 6;
  g.deterministic_layout = true;
  g.treatment.kind = TreatmentKind::Alternating;
  return g;
}

StudyEstimator pairing(const std::string& name, Method method) {
  StudyEstimator e;
  e.name = name;
  e.pipeline.method = method;
  return e;
}

}  // namespace

TEST_CASE("Example 1 table from the generator") {
  const Dataset table = testing::example_one_table();
  for (const SimulatedData& sim : {example_one(), generate(example_one_config())}) {
    REQUIRE(sim.data.n() == 6);
    CHECK(sim.data.treatment() == table.treatment());
    CHECK(sim.data.outcomes() == table.outcomes());
    CHECK(sim.data.covariates() == table.covariates());
  }
}

TEST_CASE("constant treatment share concentrates") {
  GenConfig g;
  g.n = 10000;
  g.treatment.pi = 0.5;
  g.seed = 3;
  const SimulatedData sim = generate(g);
  CHECK(std::abs(static_cast<double>(sim.data.n_treated()) / 10000.0 - 0.5) < 0.03);
}

TEST_CASE("generator is deterministic and respects SUTVA") {
  GenConfig g;
  g.n = 500;
  g.treatment.kind = TreatmentKind::LogitLinear;
  g.seed = 42;
  const SimulatedData a = generate(g);
  const SimulatedData b = generate(g);
  CHECK(a.data.covariates() == b.data.covariates());
  CHECK(a.data.treatment() == b.data.treatment());
  CHECK(a.data.outcomes() == b.data.outcomes());
  g.seed = 43;
  CHECK_FALSE(generate(g).data.outcomes() == a.data.outcomes());
  for (std::size_t i = 0; i < a.data.n(); ++i) {
    const RowMatrix& pot = a.data.arm(i) == 1 ? a.y1 : a.y0;
    CHECK(a.data.outcomes().row(i) == pot.row(i));
  }
}

TEST_CASE("true propensity and outcome laws follow the design formulas") {
  GenConfig g;
  g.p = 2;
  g.d = 2;
  g.treatment.kind = TreatmentKind::LogitLinear;
  g.treatment.v = Eigen::Vector2d(3.0, 4.0);
  g.u0 = Eigen::Vector2d(1.0, 0.0);
  g.u1 = Eigen::Vector2d(0.0, 2.0);
  const Design design = resolve_design(g);
  CHECK(design.v.norm() == doctest::Approx(1.0));
  const std::vector<double> x{0.3, -1.2};
  CHECK(true_propensity(g, design, x) == doctest::Approx(phi(0.6 * 0.3 + 0.8 * -1.2)).epsilon(1e-14));
  const auto p1 = outcome_probabilities(g, design, x, 1);
  CHECK(p1[0] == doctest::Approx(phi(-1.2)).epsilon(1e-14));

  GenConfig m;
  m.p = 2;
  m.d = 2;
  m.treatment.kind = TreatmentKind::NonlinearProduct;
  m.outcome = OutcomeMode::NonlinearQuadratic;
  const Design md = resolve_design(m);
  CHECK(true_propensity(m, md, x) == doctest::Approx(phi(0.3 * -1.2)).epsilon(1e-14));
  const auto q1 = outcome_probabilities(m, md, x, 1);
  const auto q0 = outcome_probabilities(m, md, x, 0);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(q1[k] == doctest::Approx(phi((0.3 + 1.2) * (0.3 + 1.2))).epsilon(1e-14));
    CHECK(q0[k] == doctest::Approx(phi((0.3 - 1.2) * (0.3 - 1.2))).epsilon(1e-14));
  }

  m.link = LinkFunction::Logistic;
  CHECK(true_propensity(m, md, x) == doctest::Approx(1.0 / (1.0 + std::exp(0.36))).epsilon(1e-14));
}

TEST_CASE("generator configuration checks") {
  GenConfig g = two_group(1.0);
  CHECK_THROWS_AS(g.validate(), InvalidInput);
  g = two_group(0.4);
  g.d = 2;
  CHECK_THROWS_AS(g.validate(), InvalidInput);
  g = two_group(0.4);
  g.values.y1 = 5.0;
  CHECK_THROWS_AS(g.validate(), InvalidInput);
  GenConfig m;
  m.p = 1;
  m.treatment.kind = TreatmentKind::NonlinearProduct;
  CHECK_THROWS_AS(m.validate(), InvalidInput);
}

TEST_CASE("two-group closed-form oracle") {
  const auto h = HierarchySpec::single(Direction::HigherBetter, TiePolicy::Loss);
  const OracleResult r = oracle_taus(two_group(0.4), h);
  CHECK(r.method == OracleMethod::ClosedForm);
  CHECK(r.tau_star == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r.tau_pop == doctest::Approx(0.36).epsilon(1e-15));
  CHECK(r.tau_indiv == doctest::Approx(0.6).epsilon(1e-15));
  for (double alpha : {0.05, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.9}) {
    const OracleResult o = oracle_taus(two_group(alpha), h);
    CHECK(o.tau_star == doctest::Approx(1 - alpha).epsilon(1e-15));
    CHECK(o.tau_pop == doctest::Approx(o.tau_star * o.tau_star).epsilon(1e-15));
  }
}

TEST_CASE("symmetric arms give one half within Monte-Carlo error") {
  GenConfig g;
  g.d = 3;
  g.p = 3;
  g.u0 = Eigen::Vector3d(0.2, -0.5, 0.6);
  g.u1 = g.u0;
  g.seed = 7;
  const auto h = HierarchySpec::lexicographic(3, Direction::HigherBetter, TiePolicy::HalfWin);
  const OracleResult r = oracle_taus(g, h, 200000);
  CHECK(r.method == OracleMethod::MonteCarlo);
  CHECK(r.draws == 200000);
  CHECK(std::abs(r.tau_star - 0.5) < 3 * r.se_star);
  CHECK(std::abs(r.tau_pop - 0.5) < 3 * r.se_pop);
  CHECK(std::abs(r.tau_indiv - 0.5) < 3 * r.se_indiv);
  CHECK_THROWS_AS(oracle_taus(g, h, 9999), InvalidInput);
}

TEST_CASE("Monte-Carlo oracle is stable across seeds") {
  GenConfig g;
  g.d = 3;
  g.p = 3;
  const auto h = HierarchySpec::lexicographic(3, Direction::HigherBetter, TiePolicy::Loss);
  g.seed = 1;
  const OracleResult a = oracle_taus(g, h, 200000);
  g.seed = 2;
  const OracleResult b = oracle_taus(g, h, 200000);
  const double se = std::hypot(a.se_star, b.se_star);
  CHECK(std::abs(a.tau_star - b.tau_star) < 3 * se);
  CHECK(a.se_star > 0.0);
}

TEST_CASE("total-variation proxy bounds on the two-group design") {
  const auto h = HierarchySpec::single(Direction::HigherBetter, TiePolicy::Loss);
  const TvBounds b = tv_proxy_bounds(two_group(0.4), h);
  CHECK(b.exact);
  CHECK(b.bound_star == 0.0);
  CHECK(b.tau_star == doctest::Approx(b.tau_indiv).epsilon(1e-15));
  CHECK(std::abs(b.tau_pop - b.tau_indiv) == doctest::Approx(0.24).epsilon(1e-14));
  CHECK(std::abs(b.tau_pop - b.tau_indiv) <= b.bound_pop);
  // Product of the marginals against the diagonal coupling of the two groups.
  CHECK(b.bound_pop == doctest::Approx(2 * 0.4 * 0.6).epsilon(1e-14));

  const TvBounds degenerate = tv_proxy_bounds(two_group(0.0), h);
  CHECK(degenerate.bound_star == 0.0);
  CHECK(degenerate.bound_pop == 0.0);
  CHECK_THROWS_AS(tv_proxy_bounds(two_group(0.4), HierarchySpec::single(Direction::HigherBetter, TiePolicy::Drop)),
                  InvalidInput);
}

TEST_CASE("total-variation bounds dominate the estimand gaps on small random designs") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 12; ++rep) {
    GenConfig g;
    g.p = 1 + rep % 3;
    g.d = 1 + rep % 3;
    g.outcome = rep % 2 ? OutcomeMode::Uncorrelated : OutcomeMode::Correlated;
    g.design_seed = rng();
    g.seed = rng();
    const auto ties = rep % 4 < 2 ? TiePolicy::HalfWin : TiePolicy::Loss;
    const auto h = HierarchySpec::lexicographic(g.d, Direction::HigherBetter, ties);
    const TvBounds b = tv_proxy_bounds(g, h, 2000);
    CHECK_FALSE(b.exact);
    CHECK(b.bound_star == 0.0);
    CHECK(std::abs(b.tau_star - b.tau_indiv) <= b.bound_star + 1e-12);
    CHECK(std::abs(b.tau_pop - b.tau_indiv) <= b.bound_pop + 1e-12);
  }
}

TEST_CASE("study rows, clusters and CSV") {
  StudyConfig cfg;
  cfg.generator = example_one_config();
  cfg.hierarchy = HierarchySpec::single(Direction::HigherBetter, TiePolicy::Loss);
  cfg.estimators = {pairing("complete", Method::Complete), pairing("nn", Method::Knn)};
  cfg.n_grid = {6};
  cfg.reps = 5;
  const StudyResult r = run_study(cfg);
  REQUIRE(r.rows.size() == 10);
  for (const auto& row : r.rows) {
    CHECK(row.tau_hat == (row.estimator == "complete" ? 4.0 / 9.0 : 2.0 / 3.0));
    CHECK(row.oracle_tau_star == doctest::Approx(2.0 / 3.0));
    CHECK(row.oracle_tau_pop == doctest::Approx(4.0 / 9.0));
  }
  // Recommendations fall on opposite sides of one half.
  CHECK(r.rows[0].tau_hat < 0.5);
  CHECK(r.rows[1].tau_hat > 0.5);

  std::ostringstream csv;
  write_study_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "estimator,n,rep,tau_hat,oracle_tau_star,oracle_tau_pop,seed");
  CHECK(first.rfind("complete,6,0,0.44444444444444442,", 0) == 0);

  cfg.reps = 1;
  cfg.n_grid = {6, 6};
  CHECK(run_study(cfg).rows.size() == 4);
  cfg.reps = 0;
  CHECK_THROWS_AS(run_study(cfg), ConfigError);
}

TEST_CASE("study output does not depend on the worker count") {
  StudyConfig cfg;
  cfg.generator.d = 2;
  cfg.generator.p = 2;
  cfg.hierarchy = HierarchySpec::lexicographic(2, Direction::HigherBetter, TiePolicy::HalfWin);
  cfg.estimators = {pairing("complete", Method::Complete), pairing("nn", Method::Knn)};
  cfg.n_grid = {50, 80};
  cfg.reps = 6;
  cfg.seed = 5;
  cfg.oracle_draws = 10000;
  const unsigned before = thread_limit();
  set_thread_limit(1);
  std::ostringstream a, b;
  write_study_csv(a, run_study(cfg));
  set_thread_limit(3);
  write_study_csv(b, run_study(cfg));
  set_thread_limit(before);
  CHECK(a.str() == b.str());
}

TEST_CASE("complete pairing tracks the population oracle") {
  StudyConfig cfg;
  cfg.hierarchy = HierarchySpec::lexicographic(3, Direction::HigherBetter, TiePolicy::Loss);
  cfg.estimators = {pairing("complete", Method::Complete)};
  cfg.n_grid = {3000};
  cfg.reps = 100;
  cfg.seed = 21;
  const StudyResult r = run_study(cfg);
  double mean = 0;
  for (const auto& row : r.rows) mean += row.tau_hat;
  mean /= static_cast<double>(r.rows.size());
  CHECK(std::abs(mean - r.oracle.tau_pop) < 0.02);
}
