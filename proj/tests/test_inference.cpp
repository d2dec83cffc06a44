#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include "causalwr/errors.hpp"
#include "causalwr/inference.hpp"
#include "helpers.hpp"

using namespace causalwr;

namespace {

constexpr double kZ975 = 1.959963984540054;

WinStats counts(double wins, double losses) {
  WinStats s;
  s.wins = wins;
  s.losses = losses;
  s.pairs = static_cast<std::size_t>(wins + losses);
  s.ties = TiePolicy::Loss;
  return s;
}

Dataset bernoulli_sample(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 1);
  std::vector<int> t(n);
  RowMatrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<int>(i % 2);
    y(i, 0) = coin(rng);
  }
  return Dataset::numeric(x, t, y);
}

}  // namespace

TEST_CASE("CI settings validation") {
  CiSpec s;
  CHECK_NOTHROW(s.validate());
  s.replicates = 99;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s.replicates = 100;
  s.level = 1.0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s.level = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  CiSpec g;
  g.method = CiMethod::GaussianCounts;
  g.replicates = 0;
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 1.0) == 5.0);
  CHECK(quantile_type7(v, 0.5) == 3.0);
  CHECK(quantile_type7(v, 0.1) == doctest::Approx(1.4));
  CHECK(quantile_type7(v, 0.975) == doctest::Approx(4.9));
}

TEST_CASE("normal quantile matches tabulated values") {
  CHECK(normal_quantile(0.975) == doctest::Approx(kZ975).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
}

TEST_CASE("bootstrap of a constant estimator collapses") {
  const Dataset d = testing::example_one_table();
  CiSpec spec;
  spec.replicates = 200;
  const BootstrapResult r = bootstrap_ci([](const Dataset&, std::uint64_t) { return 0.37; }, d, spec);
  CHECK(r.lo == 0.37);
  CHECK(r.hi == 0.37);
  CHECK(r.replicates.size() == 200);
}

TEST_CASE("bootstrap of a Bernoulli mean has the binomial width") {
  const Dataset d = bernoulli_sample(400, 3);
  CiSpec spec;
  spec.replicates = 1000;
  spec.seed = 17;
  const auto mean = [](const Dataset& s, std::uint64_t) { return s.outcomes().col(0).mean(); };
  const BootstrapResult r = bootstrap_ci(mean, d, spec);
  const double width = r.hi - r.lo;
  CHECK(width >= 0.07);
  CHECK(width <= 0.13);
  CHECK(r.lo <= mean(d, 0));
  CHECK(r.hi >= mean(d, 0));
}

TEST_CASE("bootstrap keeps arm sizes and is reproducible") {
  std::mt19937_64 rng(4);
  const Dataset d = testing::random_dataset(rng, 50, 1, 1);
  CiSpec spec;
  spec.replicates = 100;
  spec.seed = 5;
  const auto treated = [&](const Dataset& s, std::uint64_t) {
    CHECK(s.n_treated() == d.n_treated());
    CHECK(s.n_control() == d.n_control());
    return s.outcomes().col(0).mean();
  };
  const BootstrapResult a = bootstrap_ci(treated, d, spec);
  const BootstrapResult b = bootstrap_ci(treated, d, spec);
  CHECK(a.replicates == b.replicates);
  CHECK(a.lo == b.lo);
}

TEST_CASE("degenerate replicates are redrawn, then give up") {
  const Dataset d = testing::example_one_table();
  CiSpec spec;
  spec.replicates = 100;
  std::atomic<int> calls{0};
  const auto flaky = [&](const Dataset&, std::uint64_t) -> double {
    if (++calls % 3 == 0) throw DegenerateInput("no pairs");
    return 1.0;
  };
  const BootstrapResult r = bootstrap_ci(flaky, d, spec);
  CHECK(r.redraws > 0);
  CHECK(r.replicates.size() == 100);
  const auto never = [](const Dataset&, std::uint64_t) -> double { throw DegenerateInput("always"); };
  CHECK_THROWS_AS(bootstrap_ci(never, d, spec), DegenerateInput);
}

TEST_CASE("percentile interval covers the point estimate on fuzzed inputs") {
  std::mt19937_64 rng(6);
  int covered = 0;
  const int cases = 40;
  for (int c = 0; c < cases; ++c) {
    const Dataset d = testing::random_dataset(rng, 40 + c, 1, 1, 4);
    CiSpec spec;
    spec.replicates = 200;
    spec.seed = c;
    const auto mean = [](const Dataset& s, std::uint64_t) { return s.outcomes().col(0).mean(); };
    const BootstrapResult r = bootstrap_ci(mean, d, spec);
    const double point = mean(d, 0);
    covered += r.lo <= point && point <= r.hi;
  }
  if (covered < cases) MESSAGE("percentile interval missed the point estimate in " << cases - covered << " cases");
  CHECK(covered >= cases - 1);
}

TEST_CASE("Gaussian win-ratio interval against direct arithmetic") {
  const double lo = (100 - kZ975 * std::sqrt(100.0)) / (80 + kZ975 * std::sqrt(80.0));
  const double hi = (100 + kZ975 * std::sqrt(100.0)) / (80 - kZ975 * std::sqrt(80.0));
  const auto [a, b] = gaussian_wr_ci(counts(100, 80));
  CHECK(a == doctest::Approx(lo).epsilon(1e-12));
  CHECK(b == doctest::Approx(hi).epsilon(1e-12));
  CHECK(std::abs(a - 0.824) < 1e-3);
  CHECK(std::abs(b - 1.914) < 1e-3);
  const auto [u, v] = gaussian_wr_ci_z(100, 80, 1.96);
  CHECK(u == doctest::Approx(80.4 / (80 + 1.96 * std::sqrt(80.0))).epsilon(1e-14));
  CHECK(v == doctest::Approx(119.6 / (80 - 1.96 * std::sqrt(80.0))).epsilon(1e-14));
}

TEST_CASE("Gaussian interval edge cases") {
  const auto [lo, hi] = gaussian_wr_ci_z(50, 50, 0.0);
  CHECK(lo == 1.0);
  CHECK(hi == 1.0);
  CHECK(std::isinf(gaussian_wr_ci(counts(10, 3)).second));
  // W < z^2 would give a negative ratio bound.
  CHECK(gaussian_wr_ci(counts(2, 1)).first == 0.0);
  WinStats half = counts(10.5, 7.5);
  half.ties = TiePolicy::HalfWin;
  CHECK_THROWS_AS(gaussian_wr_ci(half), InvalidInput);
  CHECK_THROWS_AS(gaussian_wr_ci(counts(10.5, 7)), InvalidInput);
}

TEST_CASE("Gaussian interval is monotone in the counts") {
  for (double w = 20; w <= 200; w += 20)
    for (double l = 20; l <= 200; l += 20) {
      const auto base = gaussian_wr_ci(counts(w, l));
      const auto more_wins = gaussian_wr_ci(counts(w + 10, l));
      const auto more_losses = gaussian_wr_ci(counts(w, l + 10));
      CHECK(more_wins.first > base.first);
      CHECK(more_wins.second > base.second);
      CHECK(more_losses.first < base.first);
      CHECK(more_losses.second < base.second);
    }
}

TEST_CASE("transformed intervals") {
  const TransformedCi half = transform_ci({0.5, 0.5});
  CHECK(half.win_ratio == std::pair<double, double>{1.0, 1.0});
  CHECK(half.net_benefit == std::pair<double, double>{0.0, 0.0});
  const TransformedCi t = transform_ci({0.4, 0.6});
  CHECK(t.win_ratio.first == doctest::Approx(2.0 / 3.0));
  CHECK(t.win_ratio.second == doctest::Approx(1.5));
  CHECK(t.net_benefit.first == doctest::Approx(-0.2));
  CHECK(t.net_benefit.second == doctest::Approx(0.2));
  CHECK(std::isinf(transform_ci({0.9, 1.0}).win_ratio.second));
  CHECK_THROWS_AS(transform_ci({0.6, 0.4}), InvalidInput);
  CHECK_THROWS_AS(transform_ci({-0.1, 0.4}), InvalidInput);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 0.999);
  for (int i = 0; i < 500; ++i) {
    double a = unif(rng), b = unif(rng);
    if (a > b) std::swap(a, b);
    const TransformedCi r = transform_ci({a, b});
    CHECK(r.win_ratio.first == doctest::Approx(a / (1 - a)));
    CHECK(r.win_ratio.second == doctest::Approx(b / (1 - b)));
    CHECK(r.win_ratio.first <= r.win_ratio.second);
    CHECK(r.net_benefit.first <= r.net_benefit.second);
  }
}
