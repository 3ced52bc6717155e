#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "tsc/rng.hpp"

using tsc::CounterRng;

TEST(CounterRng, OutputIsMixOfKeyPlusCounter) {
  CounterRng r(42);
  EXPECT_EQ(r(), CounterRng::mix(42 + 1 * CounterRng::kGolden));
  EXPECT_EQ(r(), CounterRng::mix(42 + 2 * CounterRng::kGolden));
  EXPECT_EQ(r.counter(), 2u);
}

TEST(CounterRng, SplitMixReferenceValue) {
  // First output of the reference SplitMix64 seeded with 0.
  CounterRng r(0);
  EXPECT_EQ(r(), 0xE220A8397B1DCDAFULL);
}

TEST(CounterRng, DeriveSeparatesTags) {
  std::set<std::uint64_t> keys;
  for (std::uint64_t tag = 0; tag < 1000; ++tag) keys.insert(CounterRng::derive(7, tag));
  EXPECT_EQ(keys.size(), 1000u);
  EXPECT_NE(CounterRng::derive(7, 1), CounterRng::derive(8, 1));
}

TEST(CounterRng, UniformInUnitInterval) {
  CounterRng r(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(CounterRng, BelowStaysInRange) {
  CounterRng r(5);
  std::array<int, 4> hits{};
  for (int i = 0; i < 40000; ++i) ++hits[r.below(4)];
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
}

TEST(CounterRng, PoissonMoments) {
  CounterRng r(9);
  for (double mean : {0.05, 0.7, 3.0}) {
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = r.poisson(mean);
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    EXPECT_NEAR(m, mean, 5.0 * std::sqrt(mean / n));
    EXPECT_NEAR(s2 / n - m * m, mean, 0.05 * mean + 0.01);
  }
  EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(11);
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
