#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "yulebst/rng.hpp"

using namespace yulebst;

TEST(Philox, KnownAnswerVectors) {
  using A = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32(A{0, 0, 0, 0}, {0, 0}), (A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32(A{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32(A{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreDeterministicAndDistinct) {
  Philox a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
  EXPECT_EQ(a.draws(), 100u);
}

TEST(Philox, UniformMomentsAndRange) {
  Philox rng(1, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 3 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(s2 / n, 1.0 / 3, 0.005);
}

TEST(Philox, UniformIndexCoversRangeEvenly) {
  Philox rng(2, 0);
  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[uniform_index(rng, 7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_EQ(uniform_index(rng, 1), 0u);
}

TEST(Philox, ExponentialAndGeometricMeans) {
  Philox rng(3, 0);
  const int n = 100000;
  double e = 0, g = 0;
  for (int i = 0; i < n; ++i) {
    e += exponential(rng, 4.0);
    g += static_cast<double>(geometric_failures(rng, 0.25));
  }
  EXPECT_NEAR(e / n, 0.25, 0.005);
  EXPECT_NEAR(g / n, 3.0, 0.06);
  EXPECT_EQ(geometric_failures(rng, 1.0), 0u);
}
