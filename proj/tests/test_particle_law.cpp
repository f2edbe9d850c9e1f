#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dpoly/particle_law.hpp"
#include "dpoly/path.hpp"
#include "dpoly/state_space.hpp"

using namespace dpoly;

TEST(ReturnProbability, SmallCases) {
  EXPECT_DOUBLE_EQ(srw_return_probability(2, 1), 0.5);
  EXPECT_NEAR(srw_return_probability(4, 2), 9.0 / 64.0, 1e-15);
  EXPECT_THROW(srw_return_probability(3, 1), DomainError);
}

TEST(ReturnProbability, LocalLimit) {
  const int L = 200, d = 2;
  const double lclt = 2.0 * std::pow(d, d / 2.0) * std::pow(2.0 * std::numbers::pi * L, -d / 2.0);
  EXPECT_NEAR(srw_return_probability(L, d) / lclt, 1.0, 0.02);
  EXPECT_NEAR(std::exp(log_srw_return_probability(L, d)), srw_return_probability(L, d), 1e-14);
}

TEST(PartitionFunction, SmallCases) {
  EXPECT_EQ(partition_function(4, 1).multinomial, 6);
  EXPECT_EQ(partition_function(4, 2).multinomial, 36);
  EXPECT_EQ(partition_function(2, 3).multinomial, 6);
}

TEST(PartitionFunction, RoutesAgree) {
  for (int d = 1; d <= 4; ++d)
    for (int L = 2; L <= 30; L += 2) EXPECT_NO_THROW(partition_function(L, d)) << L << " " << d;
}

TEST(PartitionFunction, LogTableMatchesExact) {
  for (int d = 1; d <= 3; ++d)
    for (int L = 2; L <= 40; L += 2) {
      const double exact = std::log(partition_function_multinomial(L, d).convert_to<double>());
      EXPECT_NEAR(log_partition_function(L, d), exact, 1e-12 * std::max(1.0, exact));
    }
}

TEST(PartitionFunction, RandomWalkIdentity) {
  for (int d = 1; d <= 3; ++d)
    for (int L = 2; L <= 20; L += 2) {
      const double via_p = L * std::log(2.0 * d) + log_srw_return_probability(L, d);
      EXPECT_NEAR(via_p, log_partition_function(L, d), 1e-11);
    }
}

TEST(CountDistribution, SmallExact) {
  const auto g = count_distribution_exact(4, 2);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0], Rational(1, 6));
  EXPECT_EQ(g[1], Rational(2, 3));
  EXPECT_EQ(g[2], Rational(1, 6));
  const auto one = count_distribution_exact(4, 1);
  EXPECT_EQ(one, (std::vector<Rational>{0, 0, 1}));
  const auto f = count_distribution(4, 2);
  EXPECT_NEAR(f.weight(0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(f.weight(1), 2.0 / 3.0, 1e-15);
}

TEST(CountDistribution, MeanAndNormalization) {
  const auto g = count_distribution(100, 2);
  EXPECT_NEAR(g.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(g.mean(), 25.0, 1e-12);
  const auto h = count_distribution(1000, 3);
  EXPECT_NEAR(h.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(h.mean(), 1000.0 / 6.0, 1e-9);
}

TEST(CountDistribution, MatchesEnumerationForEveryType) {
  for (int d = 1; d <= 3; ++d)
    for (int L = 2; L <= 8; L += 2) {
      const auto index = StateIndex::enumerate(L, d);
      const auto exact = count_distribution_exact(L, d);
      for (int j = 0; j < d; ++j) {
        std::vector<long> freq(static_cast<std::size_t>(L / 2 + 1), 0);
        for (std::size_t i = 0; i < index.size(); ++i) ++freq[particle_counts(index.unrank(i)).counts[j]];
        for (int n = 0; n <= L / 2; ++n)
          EXPECT_EQ(Rational(freq[n], static_cast<long>(index.size())), exact[n]) << L << " " << d << " " << j;
      }
    }
}

TEST(CountDistribution, LogModeMatchesRational) {
  const auto exact = count_distribution_exact(40, 3);
  const auto g = count_distribution(40, 3);
  for (int n = 0; n <= 20; ++n) EXPECT_NEAR(g.weight(n), exact[n].convert_to<double>(), 1e-13);
}

TEST(Conv, ModerateLength) {
  const auto g = count_distribution(100, 2);
  const auto c = minimal_conv_constant(g);
  ASSERT_TRUE(c.has_value());
  const auto r = conv_condition_check(g, *c);
  EXPECT_TRUE(r.holds);
  EXPECT_GE(r.support_margin, -1e-12);
  EXPECT_GE(r.decay_up_margin, -1e-12);
  EXPECT_GE(r.decay_down_margin, -1e-12);
  EXPECT_GE(r.envelope_lower_margin, -1e-12);
  EXPECT_GE(r.envelope_upper_margin, -1e-12);
  // slightly below the minimum some condition must fail
  EXPECT_FALSE(conv_condition_check(g, *c * 0.999).holds);
}

TEST(Conv, ConstantStableAcrossLengths) {
  double lo = 1e300, hi = 0.0;
  for (int L : {50, 100, 200, 400}) {
    const auto c = minimal_conv_constant(count_distribution(L, 2));
    ASSERT_TRUE(c.has_value());
    lo = std::min(lo, *c);
    hi = std::max(hi, *c);
  }
  EXPECT_LT(hi / lo, 2.0);
}

TEST(Conv, DegenerateSmallLength) {
  const auto r = conv_condition_check(count_distribution(4, 2), 2.0);
  EXPECT_TRUE(std::isfinite(r.support_margin));
  EXPECT_THROW(conv_condition_check(count_distribution(4, 2), 0.0), DomainError);
}

TEST(MomentBounds, SmallVariance) {
  const auto r = moment_bounds(4, 2);
  EXPECT_NEAR(r.sigma2, 1.0 / 3.0, 1e-14);
  // X = (N-1)^2 - 1/3 takes values 2/3 (prob 1/3) and -1/3 (prob 2/3)
  EXPECT_NEAR(r.var_x, 2.0 / 9.0, 1e-14);
}

TEST(MomentBounds, VarianceBand) {
  std::vector<double> ratios;
  for (int L : {40, 80, 160}) ratios.push_back(moment_bounds(L, 2).sigma2_over_L);
  const double C = moment_grid_constant({40, 80, 160}, 2);
  for (double r : ratios) {
    EXPECT_GE(r, 1.0 / C);
    EXPECT_LE(r, C);
  }
  EXPECT_LT(*std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end()), 1.2);
}

TEST(MomentBounds, RatioBoundsHoldWithReportedConstant) {
  const auto g = count_distribution(60, 2);
  const double C = moment_bounds(g).ratio_constant;
  for (int n = 1; n < 30; ++n) {
    const double ratio = g.weight(n) / g.weight(n + 1);
    const double shape = double(n) * n / ((60.0 - 2 * n) * (60.0 - 2 * n));
    EXPECT_GE(ratio * (1 + 1e-12), shape / C);
    EXPECT_LE(ratio, C * shape * (1 + 1e-12));
  }
  EXPECT_EQ(g.weight(0) * 0.0, 0.0);
}

TEST(DeltaFactor, Branches) {
  const auto g = count_distribution(20, 2);
  EXPECT_DOUBLE_EQ(delta_factor(g, 5), 1.0 / 20.0);
  const auto exact = count_distribution_exact(20, 2);
  const double expected = (exact[9] / exact[10]).convert_to<double>() / 20.0;
  EXPECT_NEAR(delta_factor(g, 10), expected, 1e-12 * expected);
  EXPECT_GT(delta_factor(g, 10), 1.0);
  EXPECT_THROW(delta_factor(g, 0), DomainError);
  EXPECT_THROW(delta_factor(g, 11), DomainError);
}

TEST(DeltaFactor, BoundedBelowByInverseDistanceToEdge) {
  const auto g = count_distribution(100, 2);
  double lo = 1e300;
  for (int n = 1; n <= 49; ++n) lo = std::min(lo, delta_factor(g, n) * (100 - 2 * n));
  EXPECT_GT(lo, 0.01);
}
