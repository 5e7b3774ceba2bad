#include <cmath>
#include <vector>

#include "doctest.h"
#include "fastlink/stats.hpp"

using namespace fastlink;

TEST_SUITE_BEGIN("stats");

TEST_CASE("mean and unbiased variance") {
  CHECK(stats::mean({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(2.5));
  CHECK(stats::mean({-7.0}) == doctest::Approx(-7.0));
  // Deviations (-1.5, -0.5, 0.5, 1.5): sum of squares 5, n-1 = 3.
  CHECK(stats::variance({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(5.0 / 3.0));
  CHECK(stats::variance({2.0, 2.0, 2.0}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(stats::mean({}), ConfigError);
  CHECK_THROWS_AS(stats::variance({1.0}), ConfigError);
}

TEST_CASE("average ranks, ties averaged") {
  CHECK(stats::ranks({3.0, 1.0, 2.0}) == std::vector<double>{3.0, 1.0, 2.0});
  // The two tied smallest entries share rank (1+2)/2.
  CHECK(stats::ranks({1.0, 1.0, 2.0}) == std::vector<double>{1.5, 1.5, 3.0});
  CHECK(stats::ranks({5.0, 5.0, 5.0}) == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("rank correlation golden values") {
  CHECK(stats::spearman({1.0, 2.0, 3.0, 4.0}, {10.0, 20.0, 30.0, 40.0}) == doctest::Approx(1.0));
  CHECK(stats::spearman({1.0, 2.0, 3.0, 4.0}, {9.0, 7.0, 5.0, 3.0}) == doctest::Approx(-1.0));

  // Tie case by hand: ranks x = (1.5, 1.5, 3), y = (1, 2, 3);
  // centered products give 1.5 / sqrt(1.5 * 2) = 1.5 / sqrt(3).
  CHECK(stats::spearman({1.0, 1.0, 2.0}, {3.0, 4.0, 5.0}) ==
        doctest::Approx(1.5 / std::sqrt(3.0)).epsilon(1e-12));

  // Rank correlation only sees order, so strictly monotone transforms
  // of either argument leave it unchanged.
  const std::vector<double> x = {0.3, -1.2, 2.5, 0.9, -0.4};
  const std::vector<double> y = {1.0, 4.0, -2.0, 0.5, 3.0};
  std::vector<double> ex(x.size()), ey(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    ex[i] = std::exp(x[i]);
    ey[i] = std::exp(y[i]);
  }
  CHECK(stats::spearman(ex, ey) == doctest::Approx(stats::spearman(x, y)).epsilon(1e-12));

  CHECK(stats::spearman({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}) == doctest::Approx(0.0));
  CHECK(stats::spearman({1.0, 2.0, 3.0}, {4.0, 4.0, 4.0}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(stats::spearman({1.0, 2.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(stats::spearman({1.0}, {1.0}), ConfigError);
}

TEST_CASE("Kolmogorov-Smirnov statistic") {
  const auto uniform_cdf = [](double x) { return std::min(1.0, std::max(0.0, x)); };

  // Two samples at 0.25 and 0.75 against U[0,1]: every corner of the
  // empirical staircase sits exactly 0.25 from the diagonal.
  CHECK(stats::ks_statistic({0.25, 0.75}, uniform_cdf) == doctest::Approx(0.25));

  // Mid-quantile grid (2i+1)/(2n): the staircase brackets the diagonal
  // symmetrically and the distance is exactly 1/(2n).
  const int n = 100;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = (2.0 * i + 1.0) / (2.0 * n);
  CHECK(stats::ks_statistic(grid, uniform_cdf) == doctest::Approx(1.0 / (2.0 * n)).epsilon(1e-12));

  // Input order must not matter.
  CHECK(stats::ks_statistic({0.75, 0.25}, uniform_cdf) == doctest::Approx(0.25));

  // A single sample far in the tail: D = 1 at the jump.
  CHECK(stats::ks_statistic({5.0}, uniform_cdf) == doctest::Approx(1.0));

  CHECK_THROWS_AS(stats::ks_statistic({}, uniform_cdf), ConfigError);
}

TEST_CASE("standard normal CDF") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(stats::normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
  CHECK(stats::normal_cdf(-1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
  CHECK(stats::normal_cdf(1.0) == doctest::Approx(0.8413447461).epsilon(1e-9));

  // Symmetry and monotonicity.
  for (double z : {0.1, 0.7, 1.3, 2.9}) {
    CHECK(stats::normal_cdf(-z) == doctest::Approx(1.0 - stats::normal_cdf(z)).epsilon(1e-12));
    CHECK(stats::normal_cdf(z) > stats::normal_cdf(z - 0.05));
  }
}

TEST_CASE("one-sided paired test") {
  // Differences (1, 1, 1, -1): mean 0.5, unbiased variance 1, so the
  // statistic is 0.5 / sqrt(1/4) = 1 and p = 1 - Phi(1).
  const std::vector<double> a = {2.0, 3.0, 4.0, 5.0};
  const std::vector<double> b = {1.0, 2.0, 3.0, 6.0};
  const double p = stats::paired_p_value_greater(a, b);
  CHECK(p == doctest::Approx(1.0 - stats::normal_cdf(1.0)).epsilon(1e-12));
  CHECK(p == doctest::Approx(0.1586552539).epsilon(1e-8));

  // The two one-sided p-values of the same pair sum to one.
  CHECK(stats::paired_p_value_greater(b, a) == doctest::Approx(1.0 - p).epsilon(1e-12));

  // Zero-variance differences degenerate to certainty either way.
  CHECK(stats::paired_p_value_greater({2.0, 3.0}, {1.0, 2.0}) == doctest::Approx(0.0));
  CHECK(stats::paired_p_value_greater({1.0, 2.0}, {1.0, 2.0}) == doctest::Approx(1.0));
  CHECK(stats::paired_p_value_greater({1.0, 2.0}, {2.0, 3.0}) == doctest::Approx(1.0));

  // A strong consistent advantage is highly significant.
  std::vector<double> big(64), small(64);
  for (int i = 0; i < 64; ++i) {
    big[i] = 1.0 + 0.01 * (i % 5);
    small[i] = 0.02 * (i % 3);
  }
  CHECK(stats::paired_p_value_greater(big, small) < 1e-12);

  CHECK_THROWS_AS(stats::paired_p_value_greater({1.0, 2.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(stats::paired_p_value_greater({1.0}, {1.0}), ConfigError);
}

TEST_SUITE_END();
