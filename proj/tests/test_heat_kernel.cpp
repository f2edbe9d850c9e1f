#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "dpoly/heat_kernel.hpp"

using namespace dpoly;

namespace {

// e^{tL} from the dense eigendecomposition of the symmetric generator.
Eigen::MatrixXd dense_heat_kernel(const GeneratorMatrix& gen, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(gen.matrix));
  const Eigen::VectorXd e = (es.eigenvalues().array() * t).exp();
  return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

TEST(HeatKernel, TwoStateAnalytic) {
  const auto index = StateIndex::enumerate(2, 1);
  const auto gen = build_generator(index);
  for (double t : {0.0, 0.1, 1.0, 3.0, 10.0}) {
    EXPECT_NEAR(tv_from(gen, 0, t), 0.5 * std::exp(-t), 1e-12);
    EXPECT_NEAR(tv_from(gen, 1, t), 0.5 * std::exp(-t), 1e-12);
  }
  const auto mt = exact_mixing_time(index, gen);
  EXPECT_NEAR(mt.t_mix, std::log(2.0), 1e-3);
  EXPECT_FALSE(mt.lower_bound_only);
}

TEST(HeatKernel, PointMassAtTimeZero) {
  const auto index = StateIndex::enumerate(4, 2);
  const auto gen = build_generator(index);
  const auto star = index.rank(extremal_path(4, 2));
  EXPECT_NEAR(tv_from(gen, star, 0.0), 35.0 / 36.0, 1e-15);
}

TEST(HeatKernel, RowsAreProbabilityVectors) {
  const auto index = StateIndex::enumerate(6, 2);
  const auto gen = build_generator(index);
  for (double t : {0.1, 1.0, 10.0}) {
    const auto p = heat_kernel_row(gen, 17, t);
    EXPECT_NEAR(p.sum(), 1.0, 1e-10);
    EXPECT_GE(p.minCoeff(), -1e-12);
  }
}

TEST(HeatKernel, MatchesDenseExponential) {
  const auto index = StateIndex::enumerate(4, 2);
  const auto gen = build_generator(index);
  for (double t : {0.3, 2.0, 40.0, 500.0}) {
    const Eigen::MatrixXd P = dense_heat_kernel(gen, t);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(36, 36);
    EXPECT_LT((propagate(gen, I, t) - P).cwiseAbs().maxCoeff(), 1e-10) << t;
  }
}

TEST(HeatKernel, WorstCaseDistanceDecays) {
  for (int d = 1; d <= 2; ++d)
    for (int L = 4; L <= 6; L += 2) {
      const auto index = StateIndex::enumerate(L, d);
      const auto gen = build_generator(index);
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(gen.matrix.rows(), gen.matrix.rows());
      double prev = 1.0;
      Eigen::MatrixXd P = I;
      for (int k = 0; k < 30; ++k) {
        P = propagate(gen, P, 0.5);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < P.cols(); ++j) worst = std::max(worst, tv_to_uniform(P.col(j)));
        EXPECT_LE(worst, prev + 1e-12);
        prev = worst;
      }
      // 20 / gap with the dense gap
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-Eigen::MatrixXd(gen.matrix), Eigen::EigenvaluesOnly);
      const double gap = es.eigenvalues()[1];
      const Eigen::MatrixXd Q = propagate(gen, I, 20.0 / gap);
      for (Eigen::Index j = 0; j < Q.cols(); ++j) EXPECT_LT(tv_to_uniform(Q.col(j)), 1e-6);
    }
}

TEST(MixingTime, BracketsTheThreshold) {
  const auto index = StateIndex::enumerate(6, 2);
  const auto gen = build_generator(index);
  const auto mt = exact_mixing_time(index, gen);
  EXPECT_LE(mt.t_mix - mt.t_lower, 1e-3 * mt.t_mix);
  EXPECT_LE(tv_from(gen, mt.worst_start, mt.t_mix), 0.25 + 1e-12);
  EXPECT_GT(tv_from(gen, mt.worst_start, mt.t_lower), 0.25);
  // no start is worse than the reported one at t_lower
  const auto I = Eigen::MatrixXd::Identity(gen.matrix.rows(), gen.matrix.rows());
  const Eigen::MatrixXd P = propagate(gen, I, mt.t_mix);
  for (Eigen::Index j = 0; j < P.cols(); ++j) EXPECT_LE(tv_to_uniform(P.col(j)), 0.25 + 1e-12);
}

TEST(MixingTime, LargeSpacesUseTheExtremalStart) {
  const auto index = StateIndex::enumerate(6, 2);
  const auto gen = build_generator(index);
  MixingTimeOptions opt;
  opt.exact_limit = 10;
  const auto mt = exact_mixing_time(index, gen, opt);
  EXPECT_TRUE(mt.lower_bound_only);
  EXPECT_EQ(mt.worst_start, index.rank(extremal_path(6, 2)));
  EXPECT_LE(mt.t_mix, exact_mixing_time(index, gen).t_mix * (1 + 1e-3));
}

TEST(HeatKernel, NegativeTime) {
  const auto index = StateIndex::enumerate(2, 1);
  const auto gen = build_generator(index);
  EXPECT_THROW(heat_kernel_row(gen, 0, -1.0), DomainError);
}
