#pragma once

// Exact ground truth: Stirling numbers, expected profiles, exact shape laws
// for small trees, insertion/spine depth pmfs and Quicksort limit moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "yulebst/martingales.hpp"
#include "yulebst/rational.hpp"
#include "yulebst/tree.hpp"

namespace yulebst {

/// Unsigned Stirling numbers of the first kind c(n, k), 0 <= k <= n <= n_max,
/// from c(n+1, k) = c(n, k-1) + n c(n, k).
class StirlingTable {
 public:
  explicit StirlingTable(std::size_t n_max) : rows_(n_max + 1) {
    rows_[0] = {1};
    for (std::size_t n = 0; n < n_max; ++n) {
      auto& next = rows_[n + 1];
      next.assign(n + 2, 0);
      for (std::size_t k = 0; k <= n; ++k) {
        next[k + 1] += rows_[n][k];
        next[k] += rows_[n][k] * n;
      }
    }
  }

  std::size_t n_max() const { return rows_.size() - 1; }

  const BigInt& operator()(std::size_t n, std::size_t k) const {
    if (n > n_max() || k > n) throw std::out_of_range("StirlingTable: index out of range");
    return rows_[n][k];
  }

  const std::vector<BigInt>& row(std::size_t n) const {
    if (n > n_max()) throw std::out_of_range("StirlingTable: row out of range");
    return rows_[n];
  }

 private:
  std::vector<std::vector<BigInt>> rows_;
};

inline BigInt factorial(std::size_t n) {
  BigInt f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

/// E U_k(n) = 2^k c(n, k) / n!, indexed by k = 0..n.
inline std::vector<Rational> expected_profile_exact(std::size_t n, const StirlingTable& table) {
  const BigInt nf = factorial(n);
  std::vector<Rational> out(n + 1);
  BigInt pow2 = 1;
  for (std::size_t k = 0; k <= n; ++k) {
    out[k] = Rational(pow2 * table(n, k), nf);
    pow2 <<= 1;
  }
  return out;
}

inline std::vector<Rational> expected_profile_exact(std::size_t n) {
  return expected_profile_exact(n, StirlingTable(n));
}

/// E U_k(n) from E U_k(m+1) = E U_k(m) + (2 E U_{k-1}(m) - E U_k(m)) / (m+1),
/// truncated to k <= k_max.
inline std::vector<double> expected_profile_recurrence(std::size_t n, std::size_t k_max) {
  std::vector<double> e(k_max + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double w = 1.0 / static_cast<double>(m + 1);
    const std::size_t top = std::min(k_max, m + 1);
    for (std::size_t k = top; k >= 1; --k) e[k] += (2.0 * e[k - 1] - e[k]) * w;
    e[0] -= e[0] * w;
  }
  return e;
}

struct HwangEstimate {
  double form1;  // (2 log n)^k / (k! n Gamma(r))
  double form2;  // n^{1 - eta_2(r)} / (Gamma(r) sqrt(2 pi k))
};

inline HwangEstimate hwang_estimate(std::uint64_t n, std::uint64_t k) {
  if (n < 2 || k < 1) throw std::domain_error("hwang_estimate: need n >= 2 and k >= 1");
  const double ln = std::log(static_cast<double>(n));
  const double kd = static_cast<double>(k);
  const double r = kd / ln;
  const double log1 = kd * std::log(2.0 * ln) - std::lgamma(kd + 1.0) - ln - std::lgamma(r);
  const double log2 = (1.0 - eta(2.0, r)) * ln - std::lgamma(r) - 0.5 * std::log(2.0 * std::numbers::pi * kd);
  return {std::exp(log1), std::exp(log2)};
}

/// Exact law of the tree shape after n insertions, keyed by preorder code.
using ShapeDistribution = std::map<std::string, Rational>;

inline std::size_t catalan(std::size_t n) {
  std::size_t c = 1;
  for (std::size_t k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
  return c;
}

/// Law of T_n by propagating the chain: every leaf of a tree with m internal
/// nodes is split with probability 1/(m+1).
inline ShapeDistribution shape_distribution_by_paths(std::size_t n) {
  if (n > 8) throw std::invalid_argument("shape_distribution: n > 8 is too large to enumerate");
  ShapeDistribution current{{"0", Rational(1)}};
  for (std::size_t m = 0; m < n; ++m) {
    ShapeDistribution next;
    const Rational w(BigInt(1), BigInt(m + 1));
    for (const auto& [code, p] : current) {
      const BinaryTree t = BinaryTree::from_preorder(code);
      for (const auto& leaf : t.leaves()) next[split_leaf(t, leaf).preorder_code()] += p * w;
    }
    current = std::move(next);
  }
  return current;
}

/// Every complete binary tree with n internal nodes.
inline std::vector<BinaryTree> all_shapes(std::size_t n) {
  std::function<std::vector<std::string>(std::size_t)> codes = [&](std::size_t m) -> std::vector<std::string> {
    if (m == 0) return {"0"};
    std::vector<std::string> out;
    for (std::size_t left = 0; left < m; ++left)
      for (const auto& a : codes(left))
        for (const auto& b : codes(m - 1 - left)) out.push_back("1" + a + b);
    return out;
  };
  std::vector<BinaryTree> trees;
  for (const auto& c : codes(n)) trees.push_back(BinaryTree::from_preorder(c));
  return trees;
}

/// P(shape) = prod over internal v of 1 / (internal nodes in the subtree of v).
inline Rational shape_probability(const BinaryTree& tree) {
  Rational p = 1;
  for (const auto& [word, leaves] : subtree_leaf_counts(tree))
    if (leaves > 1) p /= Rational(leaves - 1);
  return p;
}

inline ShapeDistribution shape_distribution_by_product(std::size_t n) {
  if (n > 8) throw std::invalid_argument("shape_distribution: n > 8 is too large to enumerate");
  ShapeDistribution out;
  for (const auto& t : all_shapes(n)) out[t.preorder_code()] = shape_probability(t);
  return out;
}

/// Both constructions, checked against each other.
inline ShapeDistribution enumerate_shape_distribution(std::size_t n) {
  auto by_paths = shape_distribution_by_paths(n);
  if (by_paths != shape_distribution_by_product(n))
    throw std::logic_error("enumerate_shape_distribution: path and product laws disagree");
  return by_paths;
}

/// Law of 1 + sum_{k=1}^{n-1} Bernoulli(p_k), as a vector indexed by value.
inline std::vector<Rational> bernoulli_sum_pmf_exact(std::size_t n, const std::function<Rational(std::size_t)>& p) {
  if (n == 0) return {Rational(1)};
  std::vector<Rational> pmf{Rational(0), Rational(1)};
  for (std::size_t k = 1; k + 1 <= n; ++k) {
    const Rational q = p(k);
    std::vector<Rational> next(pmf.size() + 1, Rational(0));
    for (std::size_t j = 0; j < pmf.size(); ++j) {
      next[j] += pmf[j] * (1 - q);
      next[j + 1] += pmf[j] * q;
    }
    pmf = std::move(next);
  }
  return pmf;
}

/// Exact law of d_n: 1 + sum_{k=1}^{n-1} Bernoulli(2/(k+2)).
inline std::vector<Rational> insertion_depth_pmf(std::size_t n) {
  if (n < 1) throw std::invalid_argument("insertion_depth_pmf: n >= 1");
  return bernoulli_sum_pmf_exact(n, [](std::size_t k) { return Rational(BigInt(2), BigInt(k + 2)); });
}

/// Coefficients of C_n(z)/(n+1) as a polynomial in z.
inline std::vector<Rational> c_n_polynomial_over_leaves(std::size_t n) {
  std::vector<Rational> poly{Rational(1)};
  for (std::size_t k = 0; k < n; ++k) {
    // multiply by (k + 2z)/(k + 1)
    const Rational inv(BigInt(1), BigInt(k + 1));
    std::vector<Rational> next(poly.size() + 1, Rational(0));
    for (std::size_t j = 0; j < poly.size(); ++j) {
      next[j] += poly[j] * Rational(k) * inv;
      next[j + 1] += poly[j] * 2 * inv;
    }
    poly = std::move(next);
  }
  for (auto& c : poly) c /= Rational(n + 1);
  return poly;
}

/// Exact law of s_n under tilt 2z (rational): 1 + sum Bernoulli(2z/(k+2z)).
inline std::vector<Rational> spine_depth_pmf_exact(std::size_t n, const Rational& two_z) {
  if (two_z <= 0) throw std::domain_error("spine_depth_pmf: 2z must be positive");
  return bernoulli_sum_pmf_exact(n, [&](std::size_t k) { return two_z / (Rational(k) + two_z); });
}

/// Floating law of s_n, indexed by value. Values beyond the returned support
/// carry total mass below 1e-250.
inline std::vector<double> spine_depth_pmf(std::size_t n, double two_z) {
  if (!(two_z > 0)) throw std::domain_error("spine_depth_pmf: 2z must be positive");
  if (n == 0) return {1.0};
  std::vector<double> pmf{0.0, 1.0};
  pmf.reserve(1024);
  for (std::size_t k = 1; k + 1 <= n; ++k) {
    const double q = two_z / (static_cast<double>(k) + two_z);
    pmf.push_back(0.0);
    for (std::size_t j = pmf.size() - 1; j >= 1; --j) pmf[j] = pmf[j] * (1 - q) + pmf[j - 1] * q;
    pmf[0] *= 1 - q;
    while (pmf.size() > 2 && pmf.back() < 1e-300) pmf.pop_back();
  }
  return pmf;
}

/// Exact mean and variance of 1 + sum_{k=1}^{n-1} Bernoulli(2z/(k+2z)).
inline std::pair<double, double> spine_depth_moments(std::uint64_t n, double two_z) {
  if (n == 0) return {0.0, 0.0};
  double mean = 1.0, var = 0.0;
  for (std::uint64_t k = 1; k + 1 <= n; ++k) {
    const double q = two_z / (static_cast<double>(k) + two_z);
    mean += q;
    var += q * (1 - q);
  }
  return {mean, var};
}

struct QuicksortMoments {
  double mean;           // 0
  double second_moment;  // 3 * int_0^1 g(u)^2 du
  double g_integral;     // int_0^1 g(u) du, zero by consistency
};

/// g(u) = 2u ln u + 2(1-u) ln(1-u) + 1.
inline double quicksort_toll(double u) {
  auto xlogx = [](double x) { return x > 0 ? x * std::log(x) : 0.0; };
  return 2 * xlogx(u) + 2 * xlogx(1 - u) + 1;
}

inline QuicksortMoments quicksort_moments() {
  using boost::math::quadrature::gauss_kronrod;
  const double g2 = gauss_kronrod<double, 61>::integrate([](double u) { return quicksort_toll(u) * quicksort_toll(u); },
                                                         0.0, 1.0, 15, 1e-12);
  const double g1 = gauss_kronrod<double, 61>::integrate(quicksort_toll, 0.0, 1.0, 15, 1e-12);
  return {0.0, 3 * g2, g1};
}

/// Exact check that M_n(z) is a martingale: for every tree with at most
/// n_max internal nodes, the average of M_{n+1}(z) over its n+1 one-leaf
/// extensions equals M_n(z).
struct ExactMartingaleReport {
  std::size_t trees_checked = 0;
  std::size_t identities_checked = 0;
  std::size_t failures = 0;
};

inline ExactMartingaleReport check_martingale_property_exact(std::size_t n_max, const std::vector<Rational>& zs) {
  ExactMartingaleReport rep;
  for (std::size_t n = 0; n <= n_max; ++n) {
    for (const auto& tree : all_shapes(n)) {
      ++rep.trees_checked;
      const auto leaves = tree.leaves();
      for (const auto& z : zs) {
        Rational avg = 0;
        for (const auto& leaf : leaves) avg += bst_martingale_exact(split_leaf(tree, leaf).profile(), z);
        avg /= Rational(leaves.size());
        ++rep.identities_checked;
        if (avg != bst_martingale_exact(tree.profile(), z)) ++rep.failures;
      }
      // Derivative martingale at z = 1, with exact harmonic sums.
      Rational avg = 0;
      for (const auto& leaf : leaves) avg += quicksort_functional_exact(split_leaf(tree, leaf).profile());
      avg /= Rational(leaves.size());
      ++rep.identities_checked;
      if (avg != quicksort_functional_exact(tree.profile())) ++rep.failures;
    }
  }
  return rep;
}

}  // namespace yulebst
