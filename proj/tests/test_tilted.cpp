#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "yulebst/bst.hpp"
#include "yulebst/exact.hpp"
#include "yulebst/stats.hpp"
#include "yulebst/tilted.hpp"

using namespace yulebst;

TEST(TiltParameter, RejectsNonPositive) {
  EXPECT_THROW(TiltParameter(0.0), std::domain_error);
  EXPECT_THROW(TiltParameter(-1.0), std::domain_error);
  EXPECT_DOUBLE_EQ(TiltParameter(3.0).z(), 1.5);
}

TEST(BiasedBst, FirstStepAlwaysSplitsSpine) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Philox rng(11, s);
    const auto m = biased_bst(1, TiltParameter(0.7), rng);
    EXPECT_EQ(m.spine_depth(), 1);
    EXPECT_TRUE(m.valid());
  }
}

TEST(BiasedBst, UnitTiltLeavesShapeLawUnchanged) {
  const std::size_t n = 4;
  const auto law = enumerate_shape_distribution(n);
  std::vector<std::string> codes;
  std::vector<double> probs;
  for (const auto& [c, p] : law) codes.push_back(c), probs.push_back(p.convert_to<double>());
  std::vector<std::uint64_t> counts(codes.size(), 0);
  Philox rng(12, 0);
  for (int i = 0; i < 40000; ++i) {
    const auto m = biased_bst(n, TiltParameter(1.0), rng);
    ++counts[std::find(codes.begin(), codes.end(), m.tree.preorder_code()) - codes.begin()];
  }
  EXPECT_TRUE(chi_square(counts, probs).pass);
}

TEST(BiasedBst, SpineSplitFrequency) {
  // with n = 10 internal nodes and 2z = 4, the next split hits the spine w.p. 4/14
  Philox rng(13, 0);
  int hits = 0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    auto m = biased_bst(10, TiltParameter(4.0), rng);
    const int before = m.spine_depth();
    biased_bst_step(m, TiltParameter(4.0), rng);
    hits += m.spine_depth() != before;
  }
  const double p = 4.0 / 14.0;
  EXPECT_NEAR(hits / double(reps), p, 3 * std::sqrt(p * (1 - p) / reps));
}

TEST(BiasedBst, SpineDepthMatchesPmf) {
  const auto pmf = spine_depth_pmf(30, 2.5);
  std::vector<std::uint64_t> counts(pmf.size(), 0);
  Philox rng(14, 0);
  for (int i = 0; i < 20000; ++i) ++counts[biased_bst(30, TiltParameter(2.5), rng).spine_depth()];
  EXPECT_TRUE(chi_square(counts, pmf).pass);
}

TEST(BiasedYule, SpineDepthIsPoisson) {
  const double t = 2.0, tz = 3.0;
  std::vector<double> probs;
  double mass = 0;
  for (int k = 0; k < 40; ++k) {
    probs.push_back(std::exp(-tz * t + k * std::log(tz * t) - std::lgamma(k + 1.0)));
    mass += probs.back();
  }
  probs.back() += 1 - mass;
  std::vector<std::uint64_t> counts(probs.size(), 0);
  std::vector<double> leaves;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    Philox rng(15, i);
    const auto p = biased_yule_simulate(TiltParameter(tz), until_time(t), rng);
    ++counts[std::min<std::size_t>(p.spine_depth_at(t), 39)];
    for (std::size_t j = 0; j < p.path.jumps(); ++j) ASSERT_TRUE(p.path.tree_at_jump(j + 1).is_leaf(p.spine[j + 1]));
  }
  EXPECT_TRUE(chi_square(counts, probs).pass);
}

TEST(BiasedYule, LeafCountIsNegativeBinomial) {
  const double t = 1.0, tz = 1.5;
  std::vector<double> probs;
  double mass = 0;
  for (std::uint64_t k = 0; k < 60; ++k) {
    probs.push_back(tilted_leaf_count_pmf(t, tz, k));
    mass += probs.back();
  }
  probs.back() += 1 - mass;
  std::vector<std::uint64_t> direct(probs.size(), 0), branching(probs.size(), 0);
  for (std::uint64_t i = 0; i < 20000; ++i) {
    Philox a(16, i), b(17, i);
    const auto p = biased_yule_simulate(TiltParameter(tz), until_time(t), a);
    ++direct[std::min<std::size_t>(p.path.leaves_at(t) - 1, 59)];
    ++branching[std::min<std::uint64_t>(biased_yule_leaf_count(TiltParameter(tz), t, b) - 1, 59)];
  }
  EXPECT_TRUE(chi_square(direct, probs).pass);
  EXPECT_TRUE(chi_square(branching, probs).pass);
}

TEST(SizeBiasedSpine, FragmentProbabilities) {
  BinaryTree t = split_leaf(split_leaf(BinaryTree{}, NodeWord::parse("e")), NodeWord::parse("0"));
  std::map<std::string, int> counts;
  Philox rng(18, 0);
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) ++counts[size_biased_spine(t, rng).to_string()];
  EXPECT_EQ(counts.size(), 3u);
  EXPECT_NEAR(counts["1"] / double(reps), 0.5, 0.01);
  EXPECT_NEAR(counts["00"] / double(reps), 0.25, 0.01);
  EXPECT_NEAR(counts["01"] / double(reps), 0.25, 0.01);
  const auto law = spine_depth_given_shape(t.profile());
  EXPECT_DOUBLE_EQ(law[1], 0.5);
  EXPECT_DOUBLE_EQ(law[2], 0.5);
}

TEST(SpineMartingales, Examples) {
  EXPECT_NEAR(exponential_martingale_discrete(1, 1, 1.3), 1.0, 1e-15);
  EXPECT_NEAR(exponential_martingale_discrete(2, 2, 1.0), 4.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(exponential_martingale_continuous(0, 0.0, 0.9), 1.0);
  EXPECT_NEAR(exponential_martingale_continuous(3, 1.2, 0.5), 1.0, 1e-15);
  EXPECT_THROW(exponential_martingale_continuous(0, -1.0, 1.0), std::domain_error);
  EXPECT_EQ(exponential_martingale_discrete_exact(2, 2, Rational(1)), rational(4, 3));
}

TEST(SpineMartingales, ContinuousMeanIsConstant) {
  for (double t : {0.5, 1.5}) {
    ReplicateSpec spec{.seed = 19, .replicates = 40000};
    const auto est = monte_carlo(spec, [t](Philox& rng, std::uint64_t) {
      const auto p = biased_yule_simulate(TiltParameter(1.0), until_time(t), rng);
      return exponential_martingale_continuous(p.spine_depth_at(t), t, 0.8);
    });
    EXPECT_TRUE(mean_within_sigma(est.mean, est.stderr_, 1.0, est.n).pass) << t << est.to_json().dump();
  }
}

TEST(ProjectionIdentity, FloatAndExact) {
  Philox rng(20, 0);
  const auto c = bst_chain(200, rng);
  for (double z : {0.3, 1.0, 1.9}) {
    const auto [lhs, rhs] = projection_identity_check(c.tree, z);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
  }
  const auto small = bst_chain(12, rng);
  for (const auto& z : {rational(1, 3), rational(5, 4)}) {
    const auto [lhs, rhs] = projection_identity_check_exact(small.tree, z);
    EXPECT_EQ(lhs, rhs);
  }
}

TEST(ChangeOfMeasure, Examples) {
  const MarkedStatistic depth = [](const MarkedTree& m) { return Rational(m.spine_depth()); };
  const MarkedStatistic one = [](const MarkedTree&) { return Rational(1); };
  for (const auto& tz : {rational(1, 2), Rational(1), Rational(2), Rational(3)}) {
    for (std::size_t n = 0; n <= 4; ++n) {
      const auto [a, b] = change_of_measure_check(n, tz, depth);
      EXPECT_EQ(a, b);
      const auto [c, d] = change_of_measure_check(n, tz, one);
      EXPECT_EQ(c, Rational(1));
      EXPECT_EQ(d, Rational(1));
    }
  }
  const auto pmf = spine_depth_pmf_exact(3, Rational(2));
  Rational mean = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) mean += Rational(k) * pmf[k];
  EXPECT_EQ(change_of_measure_check(3, Rational(2), depth).first, mean);
  EXPECT_THROW(change_of_measure_check(6, Rational(1), one), std::invalid_argument);
  EXPECT_THROW(change_of_measure_check(2, Rational(0), one), std::domain_error);
}

TEST(SkipAheadSampler, MatchesPmf) {
  for (double tz : {0.5, 2.0, 3.0}) {
    const std::uint64_t n = 500;
    const auto pmf = spine_depth_pmf(n, tz);
    std::vector<std::uint64_t> counts(pmf.size(), 0);
    for (std::uint64_t i = 0; i < 20000; ++i) {
      Philox rng(21, i);
      ++counts[sample_spine_depth(n, TiltParameter(tz), rng)];
    }
    EXPECT_TRUE(chi_square(counts, pmf).pass) << tz;
  }
  Philox rng(22, 0);
  EXPECT_EQ(sample_spine_depth(0, TiltParameter(1.0), rng), 0);
  EXPECT_EQ(sample_spine_depth(1, TiltParameter(1.0), rng), 1);
}

TEST(TiltedLeafCountPmf, SumsToOne) {
  double mass = 0;
  for (std::uint64_t k = 0; k < 2000; ++k) mass += tilted_leaf_count_pmf(2.0, 0.7, k);
  EXPECT_NEAR(mass, 1.0, 1e-10);
  EXPECT_NEAR(tilted_leaf_count_pmf(1.0, 1.0, 0), std::exp(-1.0), 1e-15);
}
