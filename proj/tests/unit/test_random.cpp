#include "oracles.hpp"

#include "ifv/random.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace ifv;

TEST(Random, SplitmixReferenceValues) {
  // splitmix64 of 0 and of 1 from the reference implementation.
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(splitmix64(1), 0x910A2DEC89025CC1ULL);
}

TEST(Random, StreamsAreDeterministicAndDistinct) {
  RandomStream a(42, 3), b(42, 3), c(42, 4);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    firsts.insert(x);
  }
  EXPECT_NE(RandomStream(42, 3).next(), c.next());
  EXPECT_NE(derive_seed(1, StreamTag::forward), derive_seed(1, StreamTag::dual));
  EXPECT_NE(derive_seed(1, StreamTag::forward), derive_seed(2, StreamTag::forward));
}

TEST(Random, UniformRangeAndExponentialLaw) {
  RandomStream rng(7);
  std::vector<double> xs;
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    xs.push_back(rng.exponential(2.0));
    mean += xs.back();
  }
  mean /= xs.size();
  EXPECT_NEAR(mean, 0.5, 0.02);
  const double p = oracle::ks_pvalue(xs, [](double x) { return 1.0 - std::exp(-2.0 * x); });
  EXPECT_GT(p, 0.01);
}

TEST(Random, CategoricalFrequencies) {
  RandomStream rng(9);
  const std::vector<double> w{0.0, 1.0, 3.0, 0.0};
  std::vector<int> hits(4, 0);
  for (int i = 0; i < 40000; ++i) ++hits[rng.categorical(w, 4.0)];
  EXPECT_EQ(hits[0], 0);
  EXPECT_EQ(hits[3], 0);
  EXPECT_NEAR(hits[2] / 40000.0, 0.75, 0.01);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.uniform_index(7), 7u);
}
