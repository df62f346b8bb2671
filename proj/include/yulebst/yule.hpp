#pragma once

// The Yule tree process (dyadic fragmentation of (0,1)) and its jump chain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "yulebst/rng.hpp"
#include "yulebst/tree.hpp"

namespace yulebst {

/// The fragment I_u = (lo, lo + 2^-depth) with lo = numerator / 2^depth.
/// Kept as integers so that it stays exact at any depth up to 64.
struct DyadicInterval {
  std::uint64_t numerator = 0;
  int depth = 0;

  long double lo() const { return std::ldexp(static_cast<long double>(numerator), -depth); }
  long double hi() const { return std::ldexp(static_cast<long double>(numerator) + 1.0L, -depth); }
  long double length() const { return std::ldexp(1.0L, -depth); }

  /// "num/2^depth" for both endpoints.
  std::string to_string() const {
    return "(" + std::to_string(numerator) + "/2^" + std::to_string(depth) + ", " +
           std::to_string(numerator + 1) + "/2^" + std::to_string(depth) + ")";
  }

  bool operator==(const DyadicInterval&) const = default;
};

inline DyadicInterval interval_of(const NodeWord& u) {
  DyadicInterval iv;
  iv.depth = u.depth();
  for (int j = 0; j < u.depth(); ++j) iv.numerator = (iv.numerator << 1) | static_cast<std::uint64_t>(u.letter(j));
  return iv;
}

/// A realized trajectory: tau_0 = 0 < tau_1 < ... and the leaf split at each
/// jump. The tree after n jumps has n+1 leaves.
class YulePath {
 public:
  YulePath() : jump_times_{0.0} {}

  std::size_t jumps() const { return splits_.size(); }
  double jump_time(std::size_t n) const { return jump_times_.at(n); }
  const std::vector<double>& jump_times() const { return jump_times_; }
  const std::vector<NodeWord>& splits() const { return splits_; }
  const BinaryTree& final_tree() const { return tree_; }

  /// N_t, the number of leaves at time t.
  std::size_t leaves_at(double t) const {
    if (t < 0) throw std::domain_error("leaves_at: negative time");
    const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
    if (t > jump_times_.back()) throw std::out_of_range("leaves_at: time beyond simulated horizon");
    return static_cast<std::size_t>(it - jump_times_.begin());
  }

  BinaryTree tree_at_jump(std::size_t n) const {
    if (n > jumps()) throw std::out_of_range("tree_at_jump: beyond simulated horizon");
    BinaryTree t;
    for (std::size_t i = 0; i < n; ++i) t.split(splits_[i]);
    return t;
  }

  // Builder interface for simulators.
  void push_jump(double time, std::size_t slot) {
    splits_.push_back(tree_.leaf_word(slot));
    tree_.split_slot(slot);
    jump_times_.push_back(time);
  }

 private:
  std::vector<double> jump_times_;
  std::vector<NodeWord> splits_;
  BinaryTree tree_;
};

struct UntilTime {
  double t;
};
struct UntilJumps {
  std::size_t n;
};
using YuleStop = std::variant<UntilTime, UntilJumps>;

inline YuleStop until_time(double t) { return UntilTime{t}; }
inline YuleStop until_jumps(std::size_t n) { return UntilJumps{n}; }
inline YuleStop until_leaves(std::size_t n) {
  if (n == 0) throw std::invalid_argument("until_leaves: need at least one leaf");
  return UntilJumps{n - 1};
}

/// Jump chain plus Exp(n) holding times. With a time stop, the first jump
/// strictly after t is included so that the next insertion is known.
template <class Rng>
YulePath yule_simulate(const YuleStop& stop, Rng& rng) {
  YulePath path;
  double now = 0.0;
  if (const auto* s = std::get_if<UntilJumps>(&stop)) {
    for (std::size_t n = 1; n <= s->n; ++n) {
      now += exponential(rng, static_cast<double>(n));
      path.push_jump(now, uniform_index(rng, n));
    }
  } else {
    const double t = std::get<UntilTime>(stop).t;
    if (t < 0) throw std::domain_error("yule_simulate: negative time");
    for (std::size_t n = 1;; ++n) {
      now += exponential(rng, static_cast<double>(n));
      path.push_jump(now, uniform_index(rng, n));
      if (now > t) break;
    }
  }
  return path;
}

/// The jump-chain trees T_0, ..., T_jumps.
inline std::vector<BinaryTree> embedded_bst(const YulePath& path) {
  std::vector<BinaryTree> out;
  out.reserve(path.jumps() + 1);
  BinaryTree t;
  out.push_back(t);
  for (const auto& w : path.splits()) {
    t.split(w);
    out.push_back(t);
  }
  return out;
}

/// n e^{-tau_n}.
inline double xi_estimate(const YulePath& path, std::size_t n) {
  if (n > path.jumps()) throw std::out_of_range("xi_estimate: n beyond simulated horizon");
  return static_cast<double>(n) * std::exp(-path.jump_time(n));
}

/// count(u0) / count(u) in a tree.
inline double subtree_proportion(const BinaryTree& tree, const NodeWord& u) {
  const auto whole = subtree_leaf_count(tree, u);
  if (!whole || *whole < 2) throw std::invalid_argument("subtree_proportion: " + u.to_string() + " is not internal");
  return static_cast<double>(*subtree_leaf_count(tree, u.child(0))) / static_cast<double>(*whole);
}

inline double subtree_proportion_uniforms(const YulePath& path, const NodeWord& u, std::size_t n) {
  return subtree_proportion(path.tree_at_jump(n), u);
}

/// Depth of the leaf that splits first strictly after time t.
inline int next_insertion_depth(const YulePath& path, double t) {
  const auto& times = path.jump_times();
  const auto it = std::upper_bound(times.begin() + 1, times.end(), t);
  if (it == times.end()) throw std::out_of_range("next_insertion_depth: no jump after t on this path");
  return path.splits()[static_cast<std::size_t>(it - times.begin()) - 1].depth();
}

/// E z^{d(t)} = (e^{t(2z-1)} - 1) / ((e^t - 1)(2z - 1)), continuous at 2z = 1.
inline double insertion_depth_pgf(double t, double z) {
  if (t <= 0) throw std::domain_error("insertion_depth_pgf: t must be positive");
  const double a = 2.0 * z - 1.0;
  const double denom = std::expm1(t);
  if (std::abs(a * t) < 1e-8) return t * (1.0 + a * t / 2.0) / denom;
  return std::expm1(t * a) / (denom * a);
}

/// tau_n alone: a sum of independent Exp(k), k = 1..n.
template <class Rng>
double sample_jump_time(std::size_t n, Rng& rng) {
  double tau = 0.0;
  for (std::size_t k = 1; k <= n; ++k) tau += exponential(rng, static_cast<double>(k));
  return tau;
}

/// P(N_t = k) = e^{-t} (1 - e^{-t})^{k-1}.
inline double yule_leaf_count_pmf(double t, std::uint64_t k) {
  if (k == 0) return 0.0;
  return std::exp(-t + static_cast<double>(k - 1) * std::log(-std::expm1(-t)));
}

/// Mass of each fragment, 2^-|u|, summed over leaves.
inline long double fragment_mass(const BinaryTree& tree) {
  long double m = 0;
  for (auto id : tree.leaf_ids()) m += interval_of(tree.word(id)).length();
  return m;
}

inline void write_jump_times_csv(std::ostream& os, const YulePath& path) {
  os << "n,tau_n\n";
  for (std::size_t n = 0; n <= path.jumps(); ++n) os << n << ',' << path.jump_time(n) << '\n';
}

}  // namespace yulebst
