#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "causalwr/distreg.hpp"
#include "causalwr/errors.hpp"
#include "causalwr/logistic.hpp"
#include "causalwr/propensity.hpp"
#include "helpers.hpp"

using namespace causalwr;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Covariates N(0, I), T ~ Bernoulli(pi(x)), binary outcomes with
// P(Y_k(t) = 1 | x) = probs(x, t, k).
template <class Pi, class Probs>
Dataset simulate(std::size_t n, std::size_t p, std::size_t d, std::uint64_t seed, Pi pi, Probs probs) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Eigen::MatrixXd x(n, p);
  std::vector<int> t(n);
  RowMatrix y(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = normal(rng);
    const Eigen::VectorXd xi = x.row(i).transpose();
    t[i] = unif(rng) < pi(xi) ? 1 : 0;
    for (std::size_t k = 0; k < d; ++k) y(i, k) = unif(rng) < probs(xi, t[i], k) ? 1.0 : 0.0;
  }
  return Dataset::numeric(x, t, y);
}

Dataset grid(const std::vector<double>& x1, std::size_t p) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(x1.size(), p);
  for (std::size_t i = 0; i < x1.size(); ++i) x(i, 0) = x1[i];
  std::vector<int> t(x1.size(), 0);
  t[0] = 1;
  return Dataset::numeric(x, t, RowMatrix::Zero(x1.size(), 1));
}

// Brute-force E[w] under a product-Bernoulli law by enumerating every atom.
double enumerate_q(const std::vector<double>& probs, int t, const std::vector<double>& y, const HierarchySpec& h) {
  const std::size_t d = probs.size();
  double total = 0;
  for (std::size_t mask = 0; mask < (1u << d); ++mask) {
    std::vector<double> atom(d);
    double mass = 1;
    for (std::size_t k = 0; k < d; ++k) {
      atom[k] = (mask >> k) & 1u;
      mass *= atom[k] ? probs[k] : 1 - probs[k];
    }
    total += mass * (t == 1 ? h.win(atom, y) : h.win(y, atom));
  }
  return total;
}

}  // namespace

TEST_CASE("logistic regression recovers a known slope") {
  const Dataset d = simulate(
      10000, 1, 1, 1, [](const Eigen::VectorXd& x) { return sigmoid(x(0)); },
      [](const Eigen::VectorXd&, int, std::size_t) { return 0.5; });
  const PropensityModel m = fit_propensity_logistic(d);
  REQUIRE(m.logistic());
  CHECK(m.logistic()->converged);
  const double slope = m.logistic()->coefficients(1);
  CHECK(slope > 0.85);
  CHECK(slope < 1.15);
  CHECK(std::abs(m.logistic()->coefficients(0)) < 0.1);
}

TEST_CASE("logistic propensity with T independent of X is close to the treated share") {
  const Dataset d = simulate(
      2000, 1, 1, 2, [](const Eigen::VectorXd&) { return 0.3; },
      [](const Eigen::VectorXd&, int, std::size_t) { return 0.5; });
  const PropensityModel m = fit_propensity_logistic(d);
  const double share = static_cast<double>(d.n_treated()) / static_cast<double>(d.n());
  const Dataset g = grid({-1.0, -0.5, 0.0, 0.5, 1.0}, 1);
  for (double v : m.predict(g)) CHECK(std::abs(v - share) < 0.02);
  const auto fitted = m.predict(d);
  CHECK(std::accumulate(fitted.begin(), fitted.end(), 0.0) / static_cast<double>(d.n()) ==
        doctest::Approx(share).epsilon(1e-6));
}

TEST_CASE("logistic propensity edge cases") {
  Eigen::MatrixXd x(6, 1);
  x << -3, -2, -1, 1, 2, 3;
  RowMatrix y = RowMatrix::Zero(6, 1);
  CHECK_THROWS_AS(fit_propensity_logistic(Dataset::numeric(x, {0, 0, 0, 0, 0, 0}, y)), DegenerateInput);
  const PropensityModel sep = fit_propensity_logistic(Dataset::numeric(x, {0, 0, 0, 1, 1, 1}, y));
  CHECK_FALSE(sep.warning().empty());
  for (double v : sep.predict(Dataset::numeric(x, {0, 0, 0, 1, 1, 1}, y))) {
    CHECK(v >= 0.01);
    CHECK(v <= 0.99);
  }
}

TEST_CASE("clip validation and application") {
  CHECK_THROWS_AS((Clip{0.6, 0.4}.validate()), InvalidInput);
  CHECK_THROWS_AS((Clip{0.0, 0.5}.validate()), InvalidInput);
  const Clip c{0.1, 0.9};
  CHECK(c.apply(0.0) == 0.1);
  CHECK(c.apply(1.0) == 0.9);
  CHECK(c.apply(0.5) == 0.5);
  const PropensityModel m = PropensityModel::constant(0.999, c);
  CHECK(m.predict(testing::example_one_table(), 0) == 0.9);
}

TEST_CASE("probability forest on a constant propensity") {
  const Dataset d = simulate(
      5000, 2, 1, 3, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd&, int, std::size_t) { return 0.5; });
  ForestOptions opt;
  opt.trees = 300;
  opt.min_leaf = 100;
  const PropensityModel m = fit_propensity_forest(d, opt, {}, 11);
  std::vector<double> xs;
  for (int i = -4; i <= 4; ++i) xs.push_back(0.25 * i);
  const Dataset g = grid(xs, 2);
  for (double v : m.predict(g)) CHECK(std::abs(v - 0.5) < 0.07);
}

TEST_CASE("probability forest finds a single split") {
  const Dataset d = simulate(
      10000, 2, 1, 4, [](const Eigen::VectorXd& x) { return x(0) > 0 ? 0.8 : 0.2; },
      [](const Eigen::VectorXd&, int, std::size_t) { return 0.5; });
  ForestOptions opt;
  opt.trees = 300;
  opt.min_leaf = 100;
  const PropensityModel m = fit_propensity_forest(d, opt, {}, 12);
  const std::vector<double> xs{-1.5, -1.0, -0.75, 0.75, 1.0, 1.5};
  const auto pred = m.predict(grid(xs, 2));
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(pred[i] - (xs[i] > 0 ? 0.8 : 0.2)) < 0.05);
  const auto oob = m.predict_oob();
  REQUIRE(oob.size() == d.n());
  for (double v : oob) {
    CHECK(v >= 0.01);
    CHECK(v <= 0.99);
  }
}

TEST_CASE("forest predictions respect the clip") {
  const Dataset d = simulate(
      1000, 1, 1, 5, [](const Eigen::VectorXd& x) { return x(0) > 0 ? 0.99 : 0.01; },
      [](const Eigen::VectorXd&, int, std::size_t) { return 0.5; });
  ForestOptions opt;
  opt.trees = 50;
  const PropensityModel m = fit_propensity_forest(d, opt, Clip{0.1, 0.9}, 1);
  for (double v : m.predict(d)) {
    CHECK(v >= 0.1);
    CHECK(v <= 0.9);
  }
}

TEST_CASE("prefix recursion equals lattice enumeration") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif;
  for (std::size_t d = 1; d <= 4; ++d)
    for (auto ties : {TiePolicy::HalfWin, TiePolicy::Loss})
      for (int rep = 0; rep < 25; ++rep) {
        std::vector<HierarchyLevel> levels;
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (auto k : order) levels.push_back({k, unif(rng) < 0.5 ? Direction::HigherBetter : Direction::LowerBetter});
        const HierarchySpec h(levels, ties);
        std::vector<double> probs(d), y(d);
        for (std::size_t k = 0; k < d; ++k) {
          probs[k] = unif(rng);
          y[k] = unif(rng) < 0.5 ? 1.0 : 0.0;
        }
        for (int t : {0, 1}) {
          const double oracle = enumerate_q(probs, t, y, h);
          CHECK(bernoulli_q(probs, t, y, h, LatticeMethod::Prefix) == doctest::Approx(oracle).epsilon(1e-12));
          CHECK(bernoulli_q(probs, t, y, h, LatticeMethod::Enumerate) == doctest::Approx(oracle).epsilon(1e-12));
        }
      }
}

TEST_CASE("logistic distributional regression recovers per-coordinate models") {
  const Eigen::Vector2d u0(0.8, -0.4), u1(-0.3, 0.9);
  const Dataset d = simulate(
      8000, 2, 2, 6, [](const Eigen::VectorXd&) { return 0.5; },
      [&](const Eigen::VectorXd& x, int t, std::size_t k) {
        const double z = (t == 1 ? u1 : u0).dot(x) + (k == 1 ? 0.5 : 0.0);
        return sigmoid(z);
      });
  const auto m = fit_distreg_logistic(d);
  for (int t : {0, 1}) {
    const Eigen::Vector2d& u = t == 1 ? u1 : u0;
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& c = m->fits()[t][k].coefficients;
      CHECK(std::abs(c(0) - (k == 1 ? 0.5 : 0.0)) < 0.15);
      CHECK(std::abs(c(1) - u(0)) < 0.15);
      CHECK(std::abs(c(2) - u(1)) < 0.15);
    }
  }
  const auto h = HierarchySpec::lexicographic(2, Direction::HigherBetter, TiePolicy::HalfWin);
  std::vector<std::size_t> rows(50);
  std::iota(rows.begin(), rows.end(), 0);
  RowMatrix opp(50, 2);
  for (int r = 0; r < 50; ++r) opp.row(r) << r % 2, (r / 2) % 2;
  for (int t : {0, 1})
    for (double v : m->evaluate(t, d, rows, opp, h)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("shared constraint fits one coefficient vector per arm") {
  const Dataset d = simulate(
      3000, 2, 3, 7, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd& x, int t, std::size_t) { return sigmoid(t ? x(0) : -x(1)); });
  LogisticDistRegOptions opt;
  opt.constraint = SharingConstraint::FullySharedAcrossCoordinates;
  const auto m = fit_distreg_logistic(d, opt);
  for (int t : {0, 1})
    for (std::size_t k = 1; k < 3; ++k) CHECK(m->fits()[t][k].coefficients == m->fits()[t][0].coefficients);
  CHECK(std::abs(m->fits()[1][0].coefficients(1) - 1.0) < 0.15);
  CHECK(std::abs(m->fits()[0][0].coefficients(2) + 1.0) < 0.15);
}

TEST_CASE("logistic distreg rejects non-binary outcomes") {
  const Dataset d = testing::example_one_table();
  CHECK_THROWS_AS(fit_distreg_logistic(d), InvalidInput);
}

TEST_CASE("identical arms give q1 + q0 close to one on average") {
  const Dataset d = simulate(
      6000, 2, 2, 8, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd& x, int, std::size_t k) { return sigmoid(k ? x(0) : x(1)); });
  const auto h = HierarchySpec::lexicographic(2, Direction::HigherBetter, TiePolicy::HalfWin);
  const auto m = fit_distreg_logistic(d);
  std::vector<std::size_t> rows(d.n());
  std::iota(rows.begin(), rows.end(), 0);
  const auto q1 = m->evaluate(1, d, rows, d.outcomes(), h);
  const auto q0 = m->evaluate(0, d, rows, d.outcomes(), h);
  double mean = 0;
  for (std::size_t i = 0; i < d.n(); ++i) mean += q1[i] + q0[i];
  CHECK(mean / static_cast<double>(d.n()) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("forest weights are a probability vector") {
  const Dataset d = simulate(
      1500, 3, 2, 10, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd& x, int t, std::size_t) { return sigmoid(x(0) + t); });
  ForestOptions opt;
  opt.trees = 100;
  const auto m = fit_distreg_forest(d, opt, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd xq(1000, 3);
  for (Eigen::Index i = 0; i < xq.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j) xq(i, j) = normal(rng);
  std::vector<int> tq(1000, 0);
  tq[0] = 1;
  const Dataset q = Dataset::numeric(xq, tq, RowMatrix::Zero(1000, 2));
  for (std::size_t i = 0; i < q.n(); ++i)
    for (int t : {0, 1}) {
      const auto w = m->weights(t, q, i);
      double total = 0;
      for (const auto& [idx, v] : w) {
        CHECK(v >= 0.0);
        CHECK(idx < m->arm_outcomes(t).rows());
        total += v;
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("a root-only forest averages the whole arm") {
  const Dataset d = simulate(
      200, 1, 1, 11, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd& x, int, std::size_t) { return sigmoid(2 * x(0)); });
  ForestOptions opt;
  opt.trees = 1;
  opt.sample_fraction = 1.0;
  opt.honesty = false;
  opt.min_leaf = std::min(d.n_treated(), d.n_control());
  const auto m = fit_distreg_forest(d, opt, 0);
  const auto h = HierarchySpec::single(Direction::HigherBetter, TiePolicy::HalfWin);
  for (double y : {0.0, 1.0}) {
    double expected = 0;
    for (auto j : d.treated()) expected += h.win(d.outcome(j), std::vector<double>{y});
    expected /= static_cast<double>(d.n_treated());
    const std::vector<double> yy{y};
    CHECK(evaluate_q(*m, 1, d, 0, yy, h) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("forest q tracks a piecewise-constant law") {
  // Y(1) ~ Bernoulli(0.8) when x1 > 0, Bernoulli(0.2) otherwise.
  const Dataset d = simulate(
      4000, 2, 1, 12, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd& x, int t, std::size_t) { return t == 1 ? (x(0) > 0 ? 0.8 : 0.2) : 0.5; });
  ForestOptions opt;
  opt.trees = 300;
  opt.min_leaf = 25;
  const auto m = fit_distreg_forest(d, opt, 5);
  const auto h = HierarchySpec::single(Direction::HigherBetter, TiePolicy::HalfWin);
  const std::vector<double> xs{-1.5, -1.0, -0.5, 0.5, 1.0, 1.5};
  const Dataset g = grid(xs, 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double p = xs[i] > 0 ? 0.8 : 0.2;
    for (double y : {0.0, 1.0}) {
      // q_1(x, y) = P(Y(1) > y) + P(Y(1) = y)/2.
      const double closed = y == 0.0 ? p + (1 - p) / 2 : p / 2;
      const std::vector<double> yy{y};
      CHECK(std::abs(evaluate_q(*m, 1, g, i, yy, h) - closed) < 0.07);
    }
  }
}

TEST_CASE("forest distreg needs min_leaf units per arm") {
  Eigen::MatrixXd x(8, 1);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  RowMatrix y = RowMatrix::Zero(8, 1);
  const Dataset d = Dataset::numeric(x, {1, 1, 0, 0, 0, 0, 0, 0}, y);
  CHECK_THROWS_AS(fit_distreg_forest(d, ForestOptions{}, 0), InvalidInput);
}

TEST_CASE("oracle q follows its law and law contrasts are exact") {
  ConditionalLaw law;
  law.outcomes.resize(3, 1);
  law.outcomes << 0, 1, 2;
  law.probabilities = {0.2, 0.5, 0.3};
  const OracleDistReg m([&](int, const Dataset&, std::size_t) { return law; });
  const auto h = HierarchySpec::single(Direction::HigherBetter, TiePolicy::HalfWin);
  const Dataset d = testing::example_one_table();
  const std::vector<double> y{1.0};
  CHECK(evaluate_q(m, 1, d, 0, y, h) == doctest::Approx(0.3 + 0.25).epsilon(1e-15));
  CHECK(evaluate_q(m, 0, d, 0, y, h) == doctest::Approx(0.2 + 0.25).epsilon(1e-15));
  CHECK(law_contrast(law, law, h) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("nuisance outputs stay in range on random inputs") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset d = simulate(
        400, 2, 2, 100 + rep, [](const Eigen::VectorXd& x) { return sigmoid(3 * x(0)); },
        [](const Eigen::VectorXd& x, int t, std::size_t k) { return sigmoid(t + x(k % 2)); });
    const Clip clip{0.05, 0.95};
    for (double v : fit_propensity_logistic(d, clip).predict(d)) {
      CHECK(v >= clip.lo);
      CHECK(v <= clip.hi);
    }
    ForestOptions opt;
    opt.trees = 20;
    const auto f = fit_distreg_forest(d, opt, rep);
    const auto l = fit_distreg_logistic(d);
    const auto h = HierarchySpec::lexicographic(2, Direction::LowerBetter, TiePolicy::HalfWin);
    std::vector<std::size_t> rows(d.n());
    std::iota(rows.begin(), rows.end(), 0);
    for (int t : {0, 1}) {
      for (double v : f->evaluate(t, d, rows, d.outcomes(), h)) CHECK((v >= 0.0 && v <= 1.0));
      for (double v : l->evaluate(t, d, rows, d.outcomes(), h)) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
}

TEST_CASE("single-coordinate logistic q is one minus the fitted probability") {
  const Dataset d = simulate(
      3000, 2, 1, 13, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd& x, int, std::size_t) { return sigmoid(0.7 * x(0) - 0.4 * x(1)); });
  const auto m = fit_distreg_logistic(d);
  const auto strict = HierarchySpec::single(Direction::LowerBetter, TiePolicy::Loss);
  const std::vector<double> one{1.0};
  for (std::size_t i = 0; i < 25; ++i) {
    const auto& c = m->fits()[1][0].coefficients;
    const double z = c(0) + c(1) * d.covariates()(i, 0) + c(2) * d.covariates()(i, 1);
    CHECK(evaluate_q(*m, 1, d, i, one, strict) == doctest::Approx(1.0 - sigmoid(z)).epsilon(1e-12));
  }
}

TEST_CASE("logistic conditional law sums to one") {
  const Dataset d = simulate(
      1000, 2, 2, 14, [](const Eigen::VectorXd&) { return 0.5; },
      [](const Eigen::VectorXd& x, int t, std::size_t k) { return sigmoid(t + (k ? x(0) : -x(1))); });
  const auto m = fit_distreg_logistic(d);
  for (std::size_t i = 0; i < 30; ++i)
    for (int t : {0, 1}) {
      const ConditionalLaw law = m->law(t, d, i);
      CHECK(law.probabilities.size() == 4);
      CHECK(std::accumulate(law.probabilities.begin(), law.probabilities.end(), 0.0) ==
            doctest::Approx(1.0).epsilon(1e-14));
    }
}
