#include "ifv/chain.hpp"
#include "ifv/error.hpp"

#include <gtest/gtest.h>

using namespace ifv;

TEST(Chain, TwoStateBalance) {
  const double alpha = 0.3, beta = 1.7;
  const Mat q = (Mat(2, 2) << -alpha, alpha, beta, -beta).finished();
  const auto r = stationary_distribution(q);
  EXPECT_TRUE(r.irreducible);
  EXPECT_NEAR(r.unique()(0), beta / (alpha + beta), 1e-15);
  EXPECT_NEAR(r.unique()(1), alpha / (alpha + beta), 1e-15);
  EXPECT_LE(r.residual, kStationaryResidualTol);
}

TEST(Chain, ClassesOfAReducibleChain) {
  // 0 <-> 1 closed, 2 -> 0 transient, 3 absorbing.
  Mat q = Mat::Zero(4, 4);
  q(0, 1) = 1.0;
  q(1, 0) = 2.0;
  q(2, 0) = 1.0;
  q(2, 3) = 0.5;
  for (int i = 0; i < 4; ++i) q(i, i) = -q.row(i).sum();
  const auto r = stationary_distribution(q);
  EXPECT_FALSE(r.irreducible);
  ASSERT_EQ(r.classes.size(), 3u);
  EXPECT_EQ(r.classes[0].states, (std::vector<int>{0, 1}));
  EXPECT_TRUE(r.classes[0].closed);
  EXPECT_EQ(r.classes[1].states, (std::vector<int>{2}));
  EXPECT_FALSE(r.classes[1].closed);
  EXPECT_TRUE(r.classes[2].closed);
  ASSERT_EQ(r.stationary.size(), 2u);
  EXPECT_NEAR(r.stationary[0](0), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.stationary[0](2), 0.0);
  EXPECT_EQ(r.stationary[1](3), 1.0);
  EXPECT_THROW(r.unique(), SolveFailure);
}

TEST(Chain, RejectsNonConservativeMatrices) {
  const Mat q = (Mat(2, 2) << -1.0, 0.5, 1.0, -1.0).finished();
  EXPECT_THROW(stationary_distribution(q), InvalidInput);
  EXPECT_THROW(stationary_distribution(Mat(2, 3)), InvalidInput);
}
