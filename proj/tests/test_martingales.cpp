#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "yulebst/bst.hpp"
#include "yulebst/exact.hpp"
#include "yulebst/martingales.hpp"
#include "yulebst/stats.hpp"
#include "yulebst/yule.hpp"

using namespace yulebst;

namespace {
NodeWord w(const char* s) { return NodeWord::parse(s); }
BinaryTree n2_tree() { return split_leaf(split_leaf(BinaryTree{}, w("e")), w("0")); }
}  // namespace

TEST(Eta, Examples) {
  EXPECT_DOUBLE_EQ(eta(2, 2), 0.0);
  EXPECT_DOUBLE_EQ(eta(2, 0), 2.0);
  EXPECT_DOUBLE_EQ(eta(1, 1), 0.0);
  EXPECT_THROW(eta(0, 1), std::domain_error);
  EXPECT_THROW(eta(1, -1), std::domain_error);
}

TEST(CriticalConstants, Values) {
  const auto k = critical_constants(1e-12);
  EXPECT_NEAR(k.c_prime, 0.3733, 1e-3);
  EXPECT_NEAR(k.c, 4.31107, 1e-4);
  EXPECT_NEAR(k.z_minus, 0.186, 1e-3);
  EXPECT_NEAR(k.z_plus, 2.155, 1e-3);
  EXPECT_NEAR(eta(2, k.c_prime), 1.0, 1e-10);
  EXPECT_NEAR(eta(2, k.c), 1.0, 1e-10);
  EXPECT_LT(k.c_prime, 2);
  EXPECT_GT(k.c, 2);
}

TEST(Cn, SmallCases) {
  for (double z : {0.3, 0.5, 1.0, 2.7}) {
    EXPECT_NEAR(c_n(z, 1), 2 * z, 1e-15);
    EXPECT_NEAR(c_n(z, 2), z * (2 * z + 1), 1e-13);
    EXPECT_NEAR(c_n(z, 0), 1.0, 0);
  }
  for (std::uint64_t n : {0u, 5u, 999u, 1001u, 123456u}) EXPECT_NEAR(c_n(1.0, n), static_cast<double>(n + 1), 1e-9 * (n + 1));
  EXPECT_EQ(c_n_exact(rational(3, 4), 2), rational(3, 4) * rational(5, 2));
  EXPECT_THROW(c_n(0.0, 3), std::domain_error);
  EXPECT_THROW(c_n(-0.5, 3), std::domain_error);
  EXPECT_THROW(c_n(Complex(-1.0, 0.0), 3), std::domain_error);
  EXPECT_NO_THROW(c_n(Complex(-1.0, 0.1), 3));
  EXPECT_THROW(c_n_exact(rational(-1, 2), 3), std::domain_error);
}

TEST(Cn, ProductAndGammaBranchesAgree) {
  for (double z : {0.2, 0.8, 1.6, 2.4}) {
    double p = 1;
    for (std::uint64_t k = 0; k < 5000; ++k) p *= (k + 2 * z) / (k + 1);
    EXPECT_NEAR(c_n(z, 5000) / p, 1.0, 1e-11);
    EXPECT_NEAR(std::abs(c_n(Complex(z, 0.0), 5000)) / p, 1.0, 1e-10);
  }
  const Complex z(0.7, 0.4);
  Complex p = 1;
  for (std::uint64_t k = 0; k < 3000; ++k) p *= (static_cast<double>(k) + 2.0 * z) / static_cast<double>(k + 1);
  EXPECT_NEAR(std::abs(c_n(z, 3000) / p - 1.0), 0.0, 1e-10);
}

TEST(LogGamma, MatchesReal) {
  for (double x : {0.1, 0.5, 1.0, 2.5, 10.0, 50.0}) EXPECT_NEAR(log_gamma(Complex(x, 0)).real(), std::lgamma(x), 1e-12 * std::max(1.0, std::abs(std::lgamma(x))));
  EXPECT_NEAR(std::abs(gamma_fn(Complex(0.5, 0)) - std::sqrt(std::numbers::pi)), 0.0, 1e-13);
  // Gamma(1+i) = i Gamma(i); |Gamma(i)|^2 = pi / sinh(pi)
  EXPECT_NEAR(std::norm(gamma_fn(Complex(0, 1))), std::numbers::pi / std::sinh(std::numbers::pi), 1e-12);
}

TEST(CnAsymptotic, Examples) {
  EXPECT_NEAR(std::abs(c_n_asymptotic(Complex(1.0, 0), 1000000) / c_n(1.0, 1000000)), 1.0, 2e-6);
  for (std::uint64_t n : {1u, 10u, 1000u}) EXPECT_NEAR(std::abs(c_n_asymptotic(Complex(0.5, 0), n)), 1.0, 1e-14);
  EXPECT_LT(std::abs(std::abs(c_n_asymptotic(Complex(2.0, 0), 10000)) / c_n(2.0, 10000) - 1), 1e-2);
}

TEST(BstMartingale, Examples) {
  EXPECT_DOUBLE_EQ(bst_martingale(BinaryTree{}, 0.7), 1.0);
  for (double z : {0.2, 0.9, 1.7}) EXPECT_NEAR(bst_martingale(n2_tree(), z), 1.0, 1e-14);
  const BinaryTree n3 = split_leaf(n2_tree(), w("1"));
  for (double z : {0.3, 1.0, 2.2}) EXPECT_NEAR(bst_martingale(n3, z), 6 * z / ((2 * z + 1) * (z + 1)), 1e-14);
  EXPECT_EQ(bst_martingale_exact(n3.profile(), rational(3, 4)), Rational(18) / Rational(4) / (rational(5, 2) * rational(7, 4)));
  Philox rng(1, 0);
  const auto c = bst_chain(3000, rng);
  EXPECT_NEAR(bst_martingale(c.tree, 1.0), 1.0, 1e-12);
  const Complex mz = bst_martingale(c.tree, Complex(0.8, 0.3));
  EXPECT_TRUE(std::isfinite(mz.real()) && std::isfinite(mz.imag()));
}

TEST(YuleMartingale, Examples) {
  Philox rng(2, 0);
  const YulePath p = yule_simulate(until_time(3.0), rng);
  for (std::size_t n = 0; n < p.jumps(); ++n) {
    const double t = 0.5 * (p.jump_time(n) + p.jump_time(n + 1));
    const Profile prof = p.tree_at_jump(n).profile();
    EXPECT_NEAR(yule_martingale(prof, t, 0.5), 1.0, 1e-12);
    EXPECT_NEAR(yule_martingale(prof, t, 1.0), std::exp(-t) * static_cast<double>(n + 1), 1e-12);
  }
  EXPECT_DOUBLE_EQ(yule_martingale(BinaryTree{}.profile(), 0.0, 1.9), 1.0);
  EXPECT_THROW(yule_martingale(BinaryTree{}.profile(), -1.0, 1.0), std::domain_error);
}

TEST(TimeComponent, ConnectionIdentityAndMean) {
  EXPECT_DOUBLE_EQ(time_component(17, 3.2, 0.5), 1.0);
  Philox rng(3, 0);
  const YulePath p = yule_simulate(until_jumps(2000), rng);
  BinaryTree t;
  for (std::size_t n = 0; n <= 2000; ++n) {
    if (n > 0) t.split(p.splits()[n - 1]);
    for (double z : {0.3, 0.8, 1.4, 2.0}) {
      const double lhs = yule_martingale(t.profile(), p.jump_time(n), z);
      const double rhs = time_component(n, p.jump_time(n), z) * bst_martingale(t.profile(), z);
      ASSERT_LE(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
    }
  }
  ReplicateSpec spec{.seed = 4, .replicates = 100000};
  const auto est = monte_carlo(spec, [](Philox& rng, std::uint64_t) {
    return time_component(100, sample_jump_time(100, rng), 2.0);
  });
  EXPECT_TRUE(mean_within_sigma(est.mean, est.stderr_, 1.0, est.n).pass) << est.to_json().dump();
  const auto est08 = monte_carlo(spec, [](Philox& rng, std::uint64_t) {
    return time_component(100, sample_jump_time(100, rng), 0.8);
  });
  EXPECT_LE(est08.ci_lo - 2 * est08.stderr_, 1.0);
  EXPECT_GE(est08.ci_hi + 2 * est08.stderr_, 1.0);
}

TEST(DerivativeMartingale, Examples) {
  EXPECT_DOUBLE_EQ(bst_derivative_martingale(BinaryTree{}.profile(), 1.3), 0.0);
  EXPECT_NEAR(bst_derivative_martingale(n2_tree().profile(), 1.0), 0.0, 1e-14);
  EXPECT_NEAR(quicksort_functional(n2_tree()), 0.0, 1e-14);
  EXPECT_EQ(quicksort_functional_exact(n2_tree().profile()), Rational(0));
  EXPECT_DOUBLE_EQ(yule_derivative_martingale(BinaryTree{}.profile(), 0.0, 1.4), 0.0);
  EXPECT_THROW(bst_derivative_martingale(BinaryTree{}.profile(), 0.0), std::domain_error);

  Philox rng(5, 0);
  const auto c = bst_chain(800, rng);
  const Profile& prof = c.tree.profile();
  EXPECT_NEAR(bst_derivative_martingale(prof, 1.0), quicksort_functional(prof), 1e-10);
  // finite differences, O(h^2)
  for (double z : {0.6, 1.0, 1.8}) {
    double prev = INFINITY;
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
      const double fd = (bst_martingale(prof, z + h) - bst_martingale(prof, z - h)) / (2 * h);
      const double err = std::abs(fd - bst_derivative_martingale(prof, z));
      if (std::isfinite(prev)) EXPECT_LT(err, prev / 3);
      prev = err;
    }
    prev = INFINITY;
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
      const double fd = (yule_martingale(prof, 2.0, z + h) - yule_martingale(prof, 2.0, z - h)) / (2 * h);
      const double err = std::abs(fd - yule_derivative_martingale(prof, 2.0, z));
      if (std::isfinite(prev)) EXPECT_LT(err, prev / 3);
      prev = err;
    }
  }
}

TEST(DerivativeMartingale, MeansAreZero) {
  ReplicateSpec spec{.seed = 6, .replicates = 10000};
  const auto bst = monte_carlo(spec, [](Philox& rng, std::uint64_t) {
    ProfileChain c;
    c.advance_to(500, rng);
    return bst_derivative_martingale(c.profile(), 1.0);
  });
  EXPECT_TRUE(mean_within_sigma(bst.mean, bst.stderr_, 0.0, bst.n).pass);
  spec.stream_offset = 1ull << 32;
  const auto yule = monte_carlo(spec, [](Philox& rng, std::uint64_t) {
    const YulePath p = yule_simulate(until_time(3.0), rng);
    return yule_derivative_martingale(p.tree_at_jump(p.leaves_at(3.0) - 1).profile(), 3.0, 1.0);
  });
  EXPECT_TRUE(mean_within_sigma(yule.mean, yule.stderr_, 0.0, yule.n).pass);
}

TEST(LqRegion, Examples) {
  for (double q : {1.1, 1.5, 2.0}) EXPECT_GT(lq_region(Complex(0.5, 0), q), 0.0);
  for (double z : {0.1, 0.7, 1.3, 2.0}) EXPECT_NEAR(lq_region(Complex(z, 0), 2.0), -2 * z * z + 4 * z - 1, 1e-14);
  const auto [lo, hi] = lq_real_interval(2.0);
  EXPECT_NEAR(2 * lo, 2 - std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(2 * hi, 2 + std::sqrt(2.0), 1e-10);
  const double zp = critical_constants().z_plus;
  for (double q = 1.01; q <= 2.0; q += 0.01) EXPECT_LE(lq_region(Complex(zp, 0), q), 0.0);
  EXPECT_THROW(lq_region(Complex(1, 0), 1.0), std::domain_error);
  EXPECT_THROW(lq_region(Complex(1, 0), 2.5), std::domain_error);
}

TEST(SplittingMaps, Examples) {
  EXPECT_DOUBLE_EQ(limit_connection_factor(3.7, 0.5), 1.0);
  EXPECT_NEAR(limit_connection_factor(3.7, 1.0), 3.7, 1e-14);
  EXPECT_NEAR(splitting_map(2.0, 5.0, 0.3, 1.0), 0.3 * 2 + 0.7 * 5, 1e-14);
  EXPECT_NEAR(splitting_map(1, 1, 0.42, 1.0), 1.0, 1e-15);
  const double u = 0.37;
  EXPECT_NEAR(derivative_splitting_map(0.4, -0.2, 1, 1, 1, u, 1.0),
              u * 0.4 + (1 - u) * -0.2 + 2 * u * std::log(u) + 2 * (1 - u) * std::log(1 - u) + 1, 1e-14);
  EXPECT_NEAR(derivative_splitting_map(0, 0, 1, 1, 1, 0.5, 1.0), 1 - 2 * std::log(2.0), 1e-14);
  const double zp = critical_constants().z_plus;
  EXPECT_NEAR(derivative_splitting_map(1.0, 2.0, 0, 0, 0, u, zp),
              zp * std::pow(u, 2 * zp - 1) + 2 * zp * std::pow(1 - u, 2 * zp - 1), 1e-13);
  EXPECT_THROW(splitting_map(1, 1, 0.0, 1.0), std::domain_error);
}

TEST(SplittingMaps, ConnectionRatioTendsToOne) {
  Philox rng(7, 0);
  const YulePath p = yule_simulate(until_jumps(20000), rng);
  auto gap = [&](std::size_t n) {
    return std::abs(time_component(n, p.jump_time(n), 1.3) / limit_connection_factor(xi_estimate(p, n), 1.3) - 1);
  };
  EXPECT_LT(gap(20000), gap(20));
  EXPECT_LT(gap(20000), 1e-3);
}

TEST(SplittingMaps, FixedPointAtZ08) {
  const double z = 0.8;
  const std::size_t n = 4000;
  ReplicateSpec spec{.seed = 8, .replicates = 3000};
  const auto ms = replicate_map(spec, [&](Philox& rng, std::uint64_t) {
    ProfileChain c;
    c.advance_to(n, rng);
    return bst_martingale(c.profile(), z);
  });
  std::vector<double> ref(ms.begin(), ms.begin() + 1500), mapped;
  Philox urng(8, 1ull << 40);
  for (std::size_t i = 0; i < 750; ++i) mapped.push_back(splitting_map(ms[1500 + i], ms[2250 + i], uniform01(urng), z));
  EXPECT_TRUE(two_sample_ks(ref, mapped, 0.01).pass);
}

TEST(Harmonic, BothBranches) {
  EXPECT_DOUBLE_EQ(harmonic(1), 1.0);
  EXPECT_NEAR(harmonic(100001), harmonic(100000) + 1.0 / 100001, 1e-12);
}
