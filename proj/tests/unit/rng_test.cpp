#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "obfbench/rng.hpp"

using obfbench::RandomStream;

TEST(RandomStream, SameKeySameSequence) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(RandomStream, SplitDoesNotDependOnParentPosition) {
  RandomStream a(7), b(7);
  for (int i = 0; i < 13; ++i) (void)b.next();
  auto ca = a.split("trace-1");
  auto cb = b.split("trace-1");
  for (int i = 0; i < 100; ++i) ASSERT_EQ(ca.next(), cb.next());
}

TEST(RandomStream, DistinctTagsGiveDistinctStreams) {
  RandomStream root(1);
  auto x = root.split(1), y = root.split(2), z = root.split("1");
  EXPECT_NE(x.next(), y.next());
  EXPECT_NE(x.key(), z.key());
}

TEST(RandomStream, UniformIntStaysInClosedRange) {
  RandomStream rng(3);
  std::array<int, 4> hist{};
  for (int i = 0; i < 40000; ++i) {
    auto v = rng.uniform_int(2, 5);
    ASSERT_GE(v, 2u);
    ASSERT_LE(v, 5u);
    ++hist[v - 2];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(rng.uniform_int(9, 9), 9u);
}

TEST(RandomStream, BernoulliEndpointsAndRate) {
  RandomStream rng(11);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    ASSERT_FALSE(rng.bernoulli(0.0));
    ASSERT_TRUE(rng.bernoulli(1.0));
    hits += rng.bernoulli(0.3) ? 1 : 0;
  }
  // 0.3 +- 4 sigma
  EXPECT_NEAR(hits / 10000.0, 0.3, 4 * std::sqrt(0.3 * 0.7 / 10000));
}

TEST(RandomStream, Uniform01InUnitInterval) {
  RandomStream rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
