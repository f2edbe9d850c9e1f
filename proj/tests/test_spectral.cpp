#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dpoly/spectral.hpp"

using namespace dpoly;

TEST(SpectralGap, TwoState) {
  const auto gen = build_generator(StateIndex::enumerate(2, 1));
  EXPECT_NEAR(spectral_gap(gen).gap, 1.0, 1e-12);
  EXPECT_NEAR(spectral_gap_dense(gen), 1.0, 1e-12);
}

TEST(SpectralGap, LanczosMatchesDense) {
  for (int d = 1; d <= 3; ++d)
    for (int L = 4; L <= 8; L += 2) {
      if (L == 8 && d > 1) continue;  // dense reference too slow
      const auto gen = build_generator(StateIndex::enumerate(L, d));
      const auto r = spectral_gap(gen);
      EXPECT_NEAR(r.gap, spectral_gap_dense(gen), 1e-8) << L << " " << d;
      EXPECT_NEAR(r.eigenvector.norm(), 1.0, 1e-12);
      EXPECT_NEAR(r.eigenvector.sum(), 0.0, 1e-8);
    }
}

TEST(SpectralGap, BelowWilsonEigenvalue) {
  for (int L : {4, 6, 8}) {
    const double kappa = 1.0 - std::cos(std::numbers::pi / L);
    const auto gen = build_generator(StateIndex::enumerate(L, 2));
    EXPECT_LE(spectral_gap(gen).gap, kappa + 1e-8);
  }
}

TEST(SpectralGap, DiffusiveScaling) {
  std::vector<double> scaled;
  for (int L : {4, 6, 8, 10}) {
    const auto gen = build_generator(StateIndex::enumerate(L, 2));
    scaled.push_back(spectral_gap(gen).gap * L * L);
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  EXPECT_LT(*hi / *lo, 1.5);
}
