#pragma once

// Spine-marked trees: size-biased spines, the tilted BST and Yule models,
// exponential spine martingales and the change of measure between them.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "yulebst/exact.hpp"
#include "yulebst/martingales.hpp"
#include "yulebst/rational.hpp"
#include "yulebst/rng.hpp"
#include "yulebst/tree.hpp"
#include "yulebst/yule.hpp"

namespace yulebst {

/// The tilt 2z > 0.
class TiltParameter {
 public:
  explicit TiltParameter(double two_z) : two_z_(two_z) {
    if (!(two_z > 0)) throw std::domain_error("TiltParameter: 2z must be positive");
  }
  double two_z() const { return two_z_; }
  double z() const { return two_z_ / 2; }

 private:
  double two_z_;
};

/// A tree with one distinguished leaf.
struct MarkedTree {
  BinaryTree tree;
  NodeWord spine;

  int spine_depth() const { return spine.depth(); }
  bool valid() const { return tree.is_leaf(spine); }
};

/// One step of the tilted chain with n internal nodes: the marked leaf splits
/// with probability 2z/(n+2z) and passes its mark to a uniform child;
/// otherwise a uniform unmarked leaf splits.
template <class Rng>
void biased_bst_step(MarkedTree& state, const TiltParameter& tilt, Rng& rng) {
  const double n = static_cast<double>(state.tree.internal_count());
  const auto spine_id = *state.tree.find(state.spine);
  const std::size_t spine_slot = state.tree.leaf_slot(spine_id);
  if (uniform01(rng) * (n + tilt.two_z()) < tilt.two_z()) {
    state.tree.split_slot(spine_slot);
    state.spine = state.spine.child(static_cast<int>(rng() >> 63));
  } else {
    auto slot = uniform_index(rng, state.tree.leaf_count() - 1);
    if (slot >= spine_slot) ++slot;
    state.tree.split_slot(slot);
  }
}

template <class Rng>
MarkedTree biased_bst(std::size_t n, const TiltParameter& tilt, Rng& rng) {
  MarkedTree state;
  for (std::size_t i = 0; i < n; ++i) biased_bst_step(state, tilt, rng);
  return state;
}

/// Tilted Yule path together with the marked leaf after every jump.
struct BiasedYulePath {
  YulePath path;
  std::vector<NodeWord> spine;  // spine[n] = marked leaf after n jumps

  /// s(t), the depth of the marked leaf at time t.
  int spine_depth_at(double t) const { return spine[path.leaves_at(t) - 1].depth(); }
};

/// Unmarked leaves carry Exp(1) clocks, the marked leaf an Exp(2z) clock.
/// The unmarked leaves are advanced as one jump chain (minimum of N-1 clocks
/// is Exp(N-1)); the marked leaf keeps its own absolute ring time.
template <class Rng>
BiasedYulePath biased_yule_simulate(const TiltParameter& tilt, const YuleStop& stop, Rng& rng) {
  BiasedYulePath out;
  out.spine.push_back(NodeWord{});
  double now = 0.0;
  double marked_ring = exponential(rng, tilt.two_z());
  auto done = [&](std::size_t jumps, double time) {
    if (const auto* s = std::get_if<UntilJumps>(&stop)) return jumps >= s->n;
    return time > std::get<UntilTime>(stop).t;
  };
  if (const auto* s = std::get_if<UntilTime>(&stop); s && s->t < 0)
    throw std::domain_error("biased_yule_simulate: negative time");
  while (!done(out.path.jumps(), now)) {
    const std::size_t unmarked = out.path.final_tree().leaf_count() - 1;
    const double unmarked_ring = unmarked == 0 ? INFINITY : now + exponential(rng, static_cast<double>(unmarked));
    NodeWord spine = out.spine.back();
    const std::size_t spine_slot = out.path.final_tree().leaf_slot(*out.path.final_tree().find(spine));
    if (marked_ring <= unmarked_ring) {
      now = marked_ring;
      out.path.push_jump(now, spine_slot);
      spine = spine.child(static_cast<int>(rng() >> 63));
      marked_ring = now + exponential(rng, tilt.two_z());
    } else {
      now = unmarked_ring;
      auto slot = uniform_index(rng, unmarked);
      if (slot >= spine_slot) ++slot;
      out.path.push_jump(now, slot);
    }
    out.spine.push_back(spine);
  }
  return out;
}

/// N_t alone under the tilted Yule law. The marked leaf splits at the
/// points of a rate-2z Poisson process; each split sheds an unmarked leaf
/// whose Yule subtree has Geometric(e^{-age}) leaves at time t.
template <class Rng>
std::uint64_t biased_yule_leaf_count(const TiltParameter& tilt, double t, Rng& rng) {
  if (t < 0) throw std::domain_error("biased_yule_leaf_count: negative time");
  std::uint64_t leaves = 1;
  for (double s = exponential(rng, tilt.two_z()); s <= t; s += exponential(rng, tilt.two_z()))
    leaves += 1 + geometric_failures(rng, std::exp(-(t - s)));
  return leaves;
}

/// A leaf drawn with probability 2^-|u|: follow a uniform V through the
/// dyadic fragments, one random bit per level.
template <class Rng>
NodeWord size_biased_spine(const BinaryTree& tree, Rng& rng) {
  BinaryTree::NodeId id = 0;
  NodeWord w;
  std::uint64_t bits = 0;
  int left = 0;
  while (tree.first_child(id) != BinaryTree::kNone) {
    if (left == 0) {
      bits = rng();
      left = 64;
    }
    const int bit = static_cast<int>(bits & 1u);
    bits >>= 1;
    --left;
    id = tree.first_child(id) + bit;
    w = w.child(bit);
  }
  return w;
}

/// P(s_n = k | T_n) = U_k(n) 2^-k.
inline std::vector<double> spine_depth_given_shape(const Profile& p) {
  std::vector<double> law(p.counts.size());
  for (std::size_t k = 0; k < law.size(); ++k) law[k] = std::ldexp(static_cast<double>(p.counts[k]), -static_cast<int>(k));
  return law;
}

/// (2z)^{s_n} / C_n(z).
inline double exponential_martingale_discrete(int s_n, std::uint64_t n, double z) {
  return std::pow(2 * z, s_n) / c_n(z, n);
}

inline Rational exponential_martingale_discrete_exact(int s_n, std::uint64_t n, const Rational& z) {
  return rational_pow(2 * z, static_cast<unsigned>(s_n)) / c_n_exact(z, n);
}

/// (2z)^{s(t)} e^{t(1-2z)}.
inline double exponential_martingale_continuous(int s_t, double t, double z) {
  if (t < 0) throw std::domain_error("exponential_martingale_continuous: negative time");
  return std::exp(s_t * std::log(2 * z) + t * (1 - 2 * z));
}

/// M_n(z) against sum over leaves of 2^-|u| E_n(z) evaluated with the spine at u.
inline std::pair<double, double> projection_identity_check(const BinaryTree& tree, double z) {
  const std::uint64_t n = tree.internal_count();
  double rhs = 0;
  for (auto id : tree.leaf_ids()) {
    const int d = tree.word(id).depth();
    rhs += std::ldexp(1.0, -d) * exponential_martingale_discrete(d, n, z);
  }
  return {bst_martingale(tree, z), rhs};
}

inline std::pair<Rational, Rational> projection_identity_check_exact(const BinaryTree& tree, const Rational& z) {
  const std::uint64_t n = tree.internal_count();
  Rational rhs = 0;
  for (auto id : tree.leaf_ids()) {
    const int d = tree.word(id).depth();
    rhs += Rational(BigInt(1), BigInt(1) << d) * exponential_martingale_discrete_exact(d, n, z);
  }
  return {bst_martingale_exact(tree.profile(), z), rhs};
}

using MarkedStatistic = std::function<Rational(const MarkedTree&)>;

/// Exact enumeration over every marked history of length n (n <= 5):
/// (E_{Q(2z)} f, E_{Q(1)} [E_n(z) f]).
inline std::pair<Rational, Rational> change_of_measure_check(std::size_t n, const Rational& two_z,
                                                             const MarkedStatistic& f) {
  if (n > 5) throw std::invalid_argument("change_of_measure_check: n > 5 is too large to enumerate");
  if (two_z <= 0) throw std::domain_error("change_of_measure_check: 2z must be positive");
  struct History {
    MarkedTree state;
    Rational unbiased;
    Rational biased;
  };
  std::vector<History> frontier{{MarkedTree{}, Rational(1), Rational(1)}};
  for (std::size_t m = 0; m < n; ++m) {
    std::vector<History> next;
    const Rational base_unbiased = Rational(1) / Rational(m + 1);
    const Rational base_biased = Rational(1) / (Rational(m) + two_z);
    for (const auto& h : frontier) {
      for (const auto& leaf : h.state.tree.leaves()) {
        if (leaf == h.state.spine) {
          for (int bit = 0; bit < 2; ++bit) {
            MarkedTree s{split_leaf(h.state.tree, leaf), leaf.child(bit)};
            next.push_back({std::move(s), h.unbiased * base_unbiased / 2, h.biased * base_biased * two_z / 2});
          }
        } else {
          MarkedTree s{split_leaf(h.state.tree, leaf), h.state.spine};
          next.push_back({std::move(s), h.unbiased * base_unbiased, h.biased * base_biased});
        }
      }
    }
    frontier = std::move(next);
  }
  const Rational z = two_z / 2;
  Rational biased = 0, reweighted = 0;
  for (const auto& h : frontier) {
    const Rational fv = f(h.state);
    biased += h.biased * fv;
    reweighted += h.unbiased * exponential_martingale_discrete_exact(h.state.spine_depth(), n, z) * fv;
  }
  return {biased, reweighted};
}

/// Exact sample of s_n under the tilted BST law, skipping over the steps at
/// which an unmarked leaf splits. Starting after step k, the probability
/// that the marked leaf survives steps k..j is
/// prod_{i=k}^{j} i/(i+2z) = [Gamma(j+1)/Gamma(j+1+2z)] / [Gamma(k)/Gamma(k+2z)].
template <class Rng>
int sample_spine_depth(std::uint64_t n, const TiltParameter& tilt, Rng& rng) {
  if (n == 0) return 0;
  const double a = tilt.two_z();
  auto log_ratio = [a](double x) { return std::log(boost::math::tgamma_delta_ratio(x, a)); };
  int s = 1;  // step 0 always splits the marked root
  std::uint64_t k = 1;
  while (k < n) {
    const double target = std::log(uniform01(rng)) + log_ratio(static_cast<double>(k));
    // smallest j >= k with log_ratio(j+1) <= target: the marked leaf splits at step j
    auto survives = [&](std::uint64_t j) { return log_ratio(static_cast<double>(j) + 1.0) > target; };
    if (survives(n - 1)) break;
    std::uint64_t lo = k, hi = k;
    std::uint64_t step = 1;
    while (survives(hi)) {
      lo = hi + 1;
      hi = std::min(n - 1, hi + step);
      step *= 2;
    }
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (survives(mid)) lo = mid + 1; else hi = mid;
    }
    ++s;
    k = lo + 1;
  }
  return s;
}

/// Negative binomial law of N_t - 1 under the tilted Yule model, order 2z and
/// parameter p = e^{-t}: Gamma(k+2z)/(Gamma(2z) k!) p^{2z} (1-p)^k.
inline double tilted_leaf_count_pmf(double t, double two_z, std::uint64_t k_minus_one) {
  const double k = static_cast<double>(k_minus_one);
  return std::exp(std::lgamma(k + two_z) - std::lgamma(two_z) - std::lgamma(k + 1) - two_z * t +
                  k * std::log(-std::expm1(-t)));
}

}  // namespace yulebst
