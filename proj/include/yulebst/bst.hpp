#pragma once

// The random-permutation BST chain: key-based construction, the uniform-leaf
// Markov chain on tree shapes, and cheap samplers for insertion depths.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "yulebst/rng.hpp"
#include "yulebst/tree.hpp"

namespace yulebst {

/// Tree after n insertions plus the depths d_0 .. d_{n-1} of the leaves
/// that received each key.
struct BstChain {
  BinaryTree tree;
  std::vector<std::uint16_t> depth_history;

  std::size_t n() const { return depth_history.size(); }
};

/// One transition: a uniformly chosen leaf is split.
template <class Rng>
void bst_step(BstChain& chain, Rng& rng) {
  const auto slot = uniform_index(rng, chain.tree.leaf_count());
  chain.depth_history.push_back(static_cast<std::uint16_t>(chain.tree.split_slot(slot)));
}

template <class Rng>
BstChain bst_chain(std::size_t n, Rng& rng) {
  BstChain chain;
  chain.depth_history.reserve(n);
  for (std::size_t i = 0; i < n; ++i) bst_step(chain, rng);
  return chain;
}

/// Distinct keys in (0, 1).
class KeySequence {
 public:
  explicit KeySequence(std::vector<double> keys) : keys_(std::move(keys)) {
    for (double k : keys_)
      if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("KeySequence: keys must lie in (0,1)");
    std::vector<double> sorted = keys_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("KeySequence: duplicate keys");
  }

  template <class Rng>
  static KeySequence uniform(std::size_t n, Rng& rng) {
    std::vector<double> keys(n);
    for (auto& k : keys) k = uniform01(rng);
    return KeySequence(std::move(keys));
  }

  std::span<const double> keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }

 private:
  std::vector<double> keys_;
};

/// A labeled BST: the insertion trace (key, node that received it) and the
/// underlying unlabeled tree.
struct LabeledBst {
  std::vector<std::pair<double, NodeWord>> trace;
  BinaryTree tree;
};

inline LabeledBst build_from_keys(const KeySequence& keys) {
  LabeledBst out;
  std::vector<double> label;  // by node id; internal nodes only carry one
  label.push_back(0.0);
  for (double key : keys.keys()) {
    BinaryTree::NodeId id = 0;
    NodeWord w;
    while (out.tree.first_child(id) != BinaryTree::kNone) {
      const int bit = key < label[static_cast<std::size_t>(id)] ? 0 : 1;
      id = out.tree.first_child(id) + bit;
      w = w.child(bit);
    }
    out.tree.split_slot(out.tree.leaf_slot(id));
    label[static_cast<std::size_t>(id)] = key;
    label.resize(out.tree.node_count(), 0.0);
    out.trace.emplace_back(key, w);
  }
  return out;
}

/// R_k = #{j <= k : x_j <= x_k}.
inline std::vector<int> sequential_ranks(const KeySequence& keys) {
  const auto x = keys.keys();
  std::vector<int> ranks(x.size());
  // Insertion into a sorted prefix; O(n^2) worst case is fine for the sizes
  // where the ranks themselves are inspected.
  std::vector<double> sorted;
  sorted.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto pos = std::upper_bound(sorted.begin(), sorted.end(), x[k]);
    ranks[k] = static_cast<int>(pos - sorted.begin()) + 1;
    sorted.insert(pos, x[k]);
  }
  return ranks;
}

/// Exact sample of d_n, the depth at which key n+1 lands in a BST built from
/// n i.i.d. uniform keys.
///
/// Only keys that fall inside the current bracket (L, R) around the new key
/// become its ancestors, so the gaps between such keys are geometric and the
/// whole insertion path costs O(d_n) draws instead of O(n).
template <class Rng>
int sample_insertion_depth(std::uint64_t n, Rng& rng) {
  const double y = uniform01(rng);
  double lo = 0.0, hi = 1.0;
  std::uint64_t seen = 0;
  int depth = 0;
  for (;;) {
    const double width = hi - lo;
    const std::uint64_t skip = geometric_failures(rng, width);
    if (skip >= n - seen) break;
    seen += skip + 1;
    const double key = lo + width * uniform01(rng);
    if (key < y) lo = key; else hi = key;
    ++depth;
  }
  return depth;
}

/// The chain observed only through its leaf depths.
///
/// The profile is itself Markov (the split leaf is uniform), so storing one
/// byte per leaf is enough for profile, path length and insertion depths.
class ProfileChain {
 public:
  ProfileChain() : depths_{0}, profile_{{1}} {}

  void reserve(std::size_t n) { depths_.reserve(n + 1); }

  template <class Rng>
  int step(Rng& rng) {
    const auto slot = uniform_index(rng, depths_.size());
    const int d = depths_[slot];
    if (d + 1 > 255) throw std::length_error("ProfileChain: depth exceeds 255");
    depths_[slot] = static_cast<std::uint8_t>(d + 1);
    depths_.push_back(static_cast<std::uint8_t>(d + 1));
    auto& c = profile_.counts;
    if (c.size() < static_cast<std::size_t>(d) + 2) c.resize(static_cast<std::size_t>(d) + 2, 0);
    c[static_cast<std::size_t>(d)] -= 1;
    c[static_cast<std::size_t>(d) + 1] += 2;
    path_length_ += static_cast<std::uint64_t>(d) + 2;
    return d;
  }

  template <class Rng>
  void advance_to(std::size_t n, Rng& rng) {
    while (this->n() < n) step(rng);
  }

  std::size_t n() const { return depths_.size() - 1; }
  const Profile& profile() const { return profile_; }
  std::uint64_t path_length() const { return path_length_; }
  std::span<const std::uint8_t> leaf_depths() const { return depths_; }

 private:
  std::vector<std::uint8_t> depths_;
  Profile profile_;
  std::uint64_t path_length_ = 0;
};

struct TrajectoryRow {
  std::size_t n;
  int insertion_depth;  // d_n
  int saturation;       // h_n
  int height;           // H_n
};

/// (n, d_n, h_n, H_n) for n = 0 .. steps-1, where h_n, H_n describe the tree
/// before insertion n.
template <class Rng>
std::vector<TrajectoryRow> bst_trajectory(std::size_t steps, Rng& rng) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(steps);
  BstChain chain;
  int h = 0, H = 0;
  for (std::size_t n = 0; n < steps; ++n) {
    const int hn = h, Hn = H;
    bst_step(chain, rng);
    const int d = chain.depth_history.back();
    rows.push_back({n, d, hn, Hn});
    H = std::max(H, d + 1);
    if (d == h && chain.tree.profile().at(static_cast<std::size_t>(h)) == 0) h = chain.tree.profile().min_depth();
  }
  return rows;
}

inline void write_trajectory_csv(std::ostream& os, std::span<const TrajectoryRow> rows) {
  os << "n,d_n,h_n,H_n\n";
  for (const auto& r : rows) os << r.n << ',' << r.insertion_depth << ',' << r.saturation << ',' << r.height << '\n';
}

}  // namespace yulebst
