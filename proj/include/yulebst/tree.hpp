#pragma once

// Complete binary trees as prefix-closed sets of binary words.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace yulebst {

/// A finite word over {0,1}. The empty word is the root.
///
/// Letter j (0-based, read from the root) is stored in bit j of `bits`.
class NodeWord {
 public:
  static constexpr int kMaxDepth = 64;

  constexpr NodeWord() = default;

  /// Parses "0110"; "" and "e" both denote the root.
  static NodeWord parse(std::string_view text) {
    NodeWord w;
    if (text == "e") return w;
    for (char c : text) {
      if (c != '0' && c != '1') throw std::invalid_argument("NodeWord: letters must be 0 or 1");
      w = w.child(c - '0');
    }
    return w;
  }

  constexpr int depth() const { return depth_; }
  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool is_root() const { return depth_ == 0; }

  constexpr int letter(int j) const { return static_cast<int>((bits_ >> j) & 1u); }

  constexpr NodeWord child(int bit) const {
    if (depth_ >= kMaxDepth) throw std::length_error("NodeWord: depth limit of 64 exceeded");
    NodeWord w = *this;
    w.bits_ |= static_cast<std::uint64_t>(bit & 1) << depth_;
    ++w.depth_;
    return w;
  }

  constexpr NodeWord parent() const {
    if (depth_ == 0) throw std::logic_error("NodeWord: root has no parent");
    NodeWord w = *this;
    --w.depth_;
    w.bits_ &= ~(std::uint64_t{1} << w.depth_);
    return w;
  }

  constexpr NodeWord prefix(int length) const {
    NodeWord w;
    w.depth_ = static_cast<std::uint8_t>(length);
    w.bits_ = length >= 64 ? bits_ : (bits_ & ((std::uint64_t{1} << length) - 1));
    return w;
  }

  constexpr bool is_prefix_of(const NodeWord& other) const {
    return depth_ <= other.depth_ && other.prefix(depth_) == *this;
  }

  std::string to_string() const {
    if (depth_ == 0) return "e";
    std::string s;
    s.reserve(depth_);
    for (int j = 0; j < depth_; ++j) s.push_back(static_cast<char>('0' + letter(j)));
    return s;
  }

  constexpr bool operator==(const NodeWord&) const = default;

  // Shortlex order: by depth, then lexicographic on letters.
  constexpr std::strong_ordering operator<=>(const NodeWord& o) const {
    if (depth_ != o.depth_) return depth_ <=> o.depth_;
    for (int j = 0; j < depth_; ++j) {
      if (letter(j) != o.letter(j)) return letter(j) <=> o.letter(j);
    }
    return std::strong_ordering::equal;
  }

 private:
  std::uint64_t bits_ = 0;
  std::uint8_t depth_ = 0;
};

/// Leaf counts by depth.
struct Profile {
  std::vector<std::uint64_t> counts;  // counts[k] = number of leaves at depth k

  std::uint64_t at(std::size_t k) const { return k < counts.size() ? counts[k] : 0; }

  std::uint64_t leaves() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }

  int min_depth() const {
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (counts[k] != 0) return static_cast<int>(k);
    return -1;
  }

  int max_depth() const {
    for (std::size_t k = counts.size(); k-- > 0;)
      if (counts[k] != 0) return static_cast<int>(k);
    return -1;
  }

  /// External path length, the sum of leaf depths.
  std::uint64_t path_length() const {
    std::uint64_t s = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) s += k * counts[k];
    return s;
  }

  /// Exact test of sum_k counts[k] 2^-k == 1 by carrying pairs upward.
  bool satisfies_kraft() const {
    const int top = max_depth();
    if (top < 0) return false;
    std::uint64_t carry = 0;
    for (int k = top; k > 0; --k) {
      carry += counts[static_cast<std::size_t>(k)];
      if (carry % 2 != 0) return false;
      carry /= 2;
    }
    return carry + counts[0] == 1;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (counts[k] != 0) j[std::to_string(k)] = counts[k];
    return j;
  }

  bool operator==(const Profile& o) const {
    const std::size_t m = std::max(counts.size(), o.counts.size());
    for (std::size_t k = 0; k < m; ++k)
      if (at(k) != o.at(k)) return false;
    return true;
  }
};

/// A complete binary tree: the root is present, the set is prefix-closed and
/// children come in pairs.
///
/// Nodes live in a flat array; the two children of a node are adjacent, and
/// leaves are kept in an indexable array with swap-remove so that a uniform
/// leaf can be drawn and split in O(1).
class BinaryTree {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kNone = -1;

  BinaryTree() {
    nodes_.push_back(Node{NodeWord{}, kNone, kNone, 0});
    leaves_.push_back(0);
    profile_.counts.assign(1, 1);
  }

  std::size_t internal_count() const { return (nodes_.size() - 1) / 2; }
  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

  std::optional<NodeId> find(const NodeWord& w) const {
    NodeId id = 0;
    for (int j = 0; j < w.depth(); ++j) {
      const NodeId first = nodes_[static_cast<std::size_t>(id)].first_child;
      if (first == kNone) return std::nullopt;
      id = first + w.letter(j);
    }
    return id;
  }

  bool contains(const NodeWord& w) const { return find(w).has_value(); }

  bool is_leaf(const NodeWord& w) const {
    const auto id = find(w);
    return id && node(*id).first_child == kNone;
  }

  /// Splits `leaf` into leaf0 and leaf1. Throws if `leaf` is absent or internal.
  void split(const NodeWord& leaf) {
    const auto id = find(leaf);
    if (!id) throw std::invalid_argument("split: " + leaf.to_string() + " is not in the tree");
    if (node(*id).first_child != kNone)
      throw std::invalid_argument("split: " + leaf.to_string() + " is an internal node");
    split_slot(static_cast<std::size_t>(node(*id).leaf_slot));
  }

  /// Splits the leaf stored in `slot` of the leaf array; returns its depth.
  int split_slot(std::size_t slot) {
    const NodeId id = leaves_[slot];
    const NodeWord w = node(id).word;
    const NodeId first = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{w.child(0), id, kNone, static_cast<NodeId>(slot)});
    nodes_.push_back(Node{w.child(1), id, kNone, static_cast<NodeId>(leaves_.size())});
    nodes_[static_cast<std::size_t>(id)].first_child = first;
    nodes_[static_cast<std::size_t>(id)].leaf_slot = kNone;
    leaves_[slot] = first;
    leaves_.push_back(first + 1);

    const auto d = static_cast<std::size_t>(w.depth());
    if (profile_.counts.size() < d + 2) profile_.counts.resize(d + 2, 0);
    profile_.counts[d] -= 1;
    profile_.counts[d + 1] += 2;
#ifdef YULEBST_CHECK_INVARIANTS
    if (!check_invariants()) throw std::logic_error("BinaryTree invariant violated after split");
#endif
    return w.depth();
  }

  std::span<const NodeId> leaf_ids() const { return leaves_; }
  const NodeWord& word(NodeId id) const { return node(id).word; }
  NodeWord leaf_word(std::size_t slot) const { return node(leaves_[slot]).word; }
  std::size_t leaf_slot(NodeId id) const { return static_cast<std::size_t>(node(id).leaf_slot); }
  NodeId first_child(NodeId id) const { return node(id).first_child; }

  std::vector<NodeWord> leaves() const {
    std::vector<NodeWord> out;
    out.reserve(leaves_.size());
    for (NodeId id : leaves_) out.push_back(node(id).word);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<NodeWord> nodes() const {
    std::vector<NodeWord> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back(n.word);
    std::sort(out.begin(), out.end());
    return out;
  }

  const Profile& profile() const { return profile_; }

  /// Preorder shape code: '1' for an internal node, '0' for a leaf.
  std::string preorder_code() const {
    std::string code;
    code.reserve(nodes_.size());
    std::vector<NodeId> stack{0};
    while (!stack.empty()) {
      const NodeId id = stack.back();
      stack.pop_back();
      const NodeId first = node(id).first_child;
      if (first == kNone) {
        code.push_back('0');
      } else {
        code.push_back('1');
        stack.push_back(first + 1);
        stack.push_back(first);
      }
    }
    return code;
  }

  static BinaryTree from_preorder(std::string_view code) {
    BinaryTree t;
    std::vector<NodeWord> pending{NodeWord{}};
    std::size_t pos = 0;
    while (!pending.empty()) {
      if (pos >= code.size()) throw std::invalid_argument("preorder code truncated");
      const NodeWord w = pending.back();
      pending.pop_back();
      const char c = code[pos++];
      if (c == '1') {
        t.split(w);
        pending.push_back(w.child(1));
        pending.push_back(w.child(0));
      } else if (c != '0') {
        throw std::invalid_argument("preorder code must contain only 0 and 1");
      }
    }
    if (pos != code.size()) throw std::invalid_argument("preorder code has trailing symbols");
    return t;
  }

  /// Full structural check: root present, prefix-closed, paired children,
  /// leaves = internal + 1, Kraft equality and a consistent cached profile.
  bool check_invariants() const {
    if (nodes_.empty() || !node(0).word.is_root()) return false;
    std::size_t leaf_total = 0;
    Profile recount;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (i != 0) {
        if (n.parent == kNone) return false;
        if (node(n.parent).word != n.word.parent()) return false;
        if (node(n.parent).first_child + n.word.letter(n.word.depth() - 1) != static_cast<NodeId>(i))
          return false;
      }
      if (n.first_child == kNone) {
        ++leaf_total;
        if (n.leaf_slot == kNone || leaves_[static_cast<std::size_t>(n.leaf_slot)] != static_cast<NodeId>(i))
          return false;
        const auto d = static_cast<std::size_t>(n.word.depth());
        if (recount.counts.size() <= d) recount.counts.resize(d + 1, 0);
        ++recount.counts[d];
      } else if (static_cast<std::size_t>(n.first_child) + 1 >= nodes_.size()) {
        return false;
      }
    }
    return leaf_total == leaves_.size() && leaf_total == internal_count() + 1 &&
           recount == profile_ && recount.satisfies_kraft();
  }

  bool operator==(const BinaryTree& o) const { return preorder_code() == o.preorder_code(); }

 private:
  struct Node {
    NodeWord word;
    NodeId parent;
    NodeId first_child;  // the second child is first_child + 1
    NodeId leaf_slot;    // index into leaves_, or kNone when internal
  };

  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

  std::vector<Node> nodes_;
  std::vector<NodeId> leaves_;
  Profile profile_;
};

/// Value-returning split: the tree with `leaf` replaced by leaf0, leaf1.
inline BinaryTree split_leaf(BinaryTree tree, const NodeWord& leaf) {
  tree.split(leaf);
  return tree;
}

inline Profile profile(const BinaryTree& tree) { return tree.profile(); }

/// Saturation level and height.
inline std::pair<int, int> extremal_depths(const BinaryTree& tree) {
  const Profile& p = tree.profile();
  return {p.min_depth(), p.max_depth()};
}

/// Number of leaves below (or equal to) every node.
inline std::map<NodeWord, std::uint64_t> subtree_leaf_counts(const BinaryTree& tree) {
  // Children are always stored after their parent, so a reverse sweep
  // visits every node after both of its children.
  std::vector<std::uint64_t> count(tree.node_count(), 0);
  for (auto id = static_cast<BinaryTree::NodeId>(tree.node_count()); id-- > 0;) {
    const auto first = tree.first_child(id);
    count[static_cast<std::size_t>(id)] =
        first == BinaryTree::kNone
            ? 1
            : count[static_cast<std::size_t>(first)] + count[static_cast<std::size_t>(first) + 1];
  }
  std::map<NodeWord, std::uint64_t> out;
  for (std::size_t i = 0; i < count.size(); ++i)
    out.emplace(tree.word(static_cast<BinaryTree::NodeId>(i)), count[i]);
  return out;
}

/// Leaf count of the subtree rooted at `u`, or nullopt when `u` is absent.
inline std::optional<std::uint64_t> subtree_leaf_count(const BinaryTree& tree, const NodeWord& u) {
  const auto root = tree.find(u);
  if (!root) return std::nullopt;
  std::uint64_t leaves = 0;
  std::vector<BinaryTree::NodeId> stack{*root};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    const auto first = tree.first_child(id);
    if (first == BinaryTree::kNone) {
      ++leaves;
    } else {
      stack.push_back(first);
      stack.push_back(first + 1);
    }
  }
  return leaves;
}

}  // namespace yulebst
