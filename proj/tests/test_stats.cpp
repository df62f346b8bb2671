#include <gtest/gtest.h>

#include <cmath>

#include "yulebst/stats.hpp"

using namespace yulebst;

namespace {
std::vector<double> uniforms(std::uint64_t seed, std::size_t n) {
  Philox rng(seed, 0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = uniform01(rng);
  return xs;
}
double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }
}  // namespace

TEST(Kolmogorov, KnownValues) {
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-3);
  EXPECT_NEAR(kolmogorov_survival(1.9495), 0.001, 1e-4);
  EXPECT_DOUBLE_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
}

TEST(KsTest, NullAndAlternative) {
  EXPECT_TRUE(ks_test(uniforms(1, 5000), uniform_cdf).pass);
  const auto constant = ks_test(std::vector<double>(100, 0.5), uniform_cdf);
  EXPECT_GE(constant.statistic, 0.5);
  EXPECT_FALSE(constant.pass);
  Philox rng(2, 0);
  std::vector<double> ex(2000);
  for (auto& x : ex) x = exponential(rng, 1.0);
  EXPECT_FALSE(ks_test(ex, uniform_cdf).pass);
  EXPECT_THROW(ks_test({}, uniform_cdf), std::invalid_argument);
}

TEST(TwoSampleKs, NullAndAlternative) {
  EXPECT_TRUE(two_sample_ks(uniforms(3, 3000), uniforms(4, 2000)).pass);
  auto shifted = uniforms(5, 3000);
  for (auto& x : shifted) x += 0.1;
  EXPECT_FALSE(two_sample_ks(uniforms(3, 3000), shifted).pass);
}

TEST(ChiSquare, PoolingAndErrors) {
  EXPECT_TRUE(chi_square({25, 25, 25, 25}, {0.25, 0.25, 0.25, 0.25}).pass);
  EXPECT_FALSE(chi_square({90, 10}, {0.5, 0.5}).pass);
  const auto pooled = chi_square({50, 48, 1, 1}, {0.5, 0.48, 0.01, 0.01});
  EXPECT_EQ(pooled.details["cells"], 2);
  const auto impossible = chi_square({10, 1}, {1.0, 0.0});
  EXPECT_FALSE(impossible.pass);
  EXPECT_EQ(impossible.p_value, 0.0);
  EXPECT_THROW(chi_square({1, 2}, {0.5}), std::invalid_argument);
  EXPECT_THROW(chi_square({1, 2}, {0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(chi_square({3}, {1.0}), std::invalid_argument);
}

TEST(LatticeNormalKs, BinomialIsClose) {
  Philox rng(6, 0);
  std::vector<std::int64_t> xs(20000);
  for (auto& x : xs) {
    x = 0;
    for (int i = 0; i < 100; ++i) x += uniform01(rng) < 0.5;
  }
  const auto r = lattice_normal_ks(xs, 50, 5, 0.02);
  EXPECT_TRUE(r.pass) << r.to_json().dump();
  EXPECT_GT(r.details["raw_ks"].get<double>(), r.statistic);
  EXPECT_FALSE(lattice_normal_ks(xs, 45, 5, 0.02).pass);
}

TEST(MonteCarlo, ConstantEstimator) {
  ReplicateSpec spec{.seed = 7, .replicates = 1000};
  const auto e = monte_carlo(spec, [](Philox&, std::uint64_t) { return 1.0; });
  EXPECT_DOUBLE_EQ(e.mean, 1.0);
  EXPECT_DOUBLE_EQ(e.stderr_, 0.0);
  EXPECT_TRUE(mean_within_sigma(e.mean, e.stderr_, 1.0, e.n).pass);
  EXPECT_FALSE(mean_within_sigma(1.1, 0.0, 1.0, 3).pass);
  spec.replicates = 1;
  EXPECT_THROW(monte_carlo(spec, [](Philox&, std::uint64_t) { return 1.0; }), std::invalid_argument);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  auto run = [](unsigned threads) {
    ReplicateSpec spec{.seed = 8, .replicates = 5000, .threads = threads};
    return replicate_map(spec, [](Philox& rng, std::uint64_t) {
      double s = 0;
      for (int i = 0; i < 10; ++i) s += uniform01(rng);
      return s;
    });
  };
  const auto one = run(1);
  EXPECT_EQ(one, run(4));
  EXPECT_EQ(one, run(3));
  EXPECT_NEAR(summarize(one).mean, 5.0, 0.05);
}

TEST(Helpers, MedianAndTally) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(tally(std::vector<int>{0, 2, 2}, 3), (std::vector<std::uint64_t>{1, 0, 2}));
  EXPECT_THROW(tally(std::vector<int>{3}, 3), std::out_of_range);
  EXPECT_THROW(median({}), std::invalid_argument);
}
