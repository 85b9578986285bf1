#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hscan/error.hpp"

namespace hscan {

using JointIndex = std::uint32_t;
using OptJoint = std::optional<JointIndex>;

// Parent-index forest in topological order: every non-root joint has a parent
// with a smaller index. Immutable once built.
class Skeleton {
 public:
  Skeleton() = default;

  std::size_t size() const noexcept { return parent_.size(); }
  OptJoint parent(JointIndex i) const { return parent_[i]; }
  std::span<const OptJoint> parents() const noexcept { return parent_; }

  const std::vector<std::string>& names() const noexcept { return names_; }
  bool has_names() const noexcept { return !names_.empty(); }

  bool is_root(JointIndex i) const { return !parent_[i].has_value(); }
  bool is_leaf(JointIndex i) const { return child_count_[i] == 0; }
  std::size_t child_count(JointIndex i) const { return child_count_[i]; }

  std::size_t root_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(parent_.begin(), parent_.end(), [](OptJoint p) { return !p; }));
  }

  std::vector<JointIndex> leaves() const {
    std::vector<JointIndex> out;
    for (JointIndex i = 0; i < size(); ++i)
      if (child_count_[i] == 0) out.push_back(i);
    return out;
  }

 private:
  friend Skeleton build_skeleton(std::vector<OptJoint>, std::vector<std::string>);

  std::vector<OptJoint> parent_;
  std::vector<std::string> names_;
  std::vector<std::uint32_t> child_count_;
};

namespace detail {

inline void check_range(std::span<const OptJoint> parents) {
  const std::size_t n = parents.size();
  if (n == 0) throw Error(ErrorCode::Empty, "skeleton has no joints");
  for (std::size_t i = 0; i < n; ++i)
    if (parents[i] && *parents[i] >= n)
      throw Error(ErrorCode::OutOfRange, "joint " + std::to_string(i) + " has parent " +
                                             std::to_string(*parents[i]) + " >= " +
                                             std::to_string(n));
}

// Marks every joint reachable from a root; anything left over sits on a cycle
// (or hangs below one).
inline void check_acyclic(std::span<const OptJoint> parents) {
  const std::size_t n = parents.size();
  enum : std::uint8_t { kUnseen, kOnPath, kDone };
  std::vector<std::uint8_t> state(n, kUnseen);
  std::vector<JointIndex> path;
  for (JointIndex start = 0; start < n; ++start) {
    if (state[start] != kUnseen) continue;
    path.clear();
    OptJoint cur = start;
    while (cur && state[*cur] == kUnseen) {
      state[*cur] = kOnPath;
      path.push_back(*cur);
      cur = parents[*cur];
    }
    if (cur && state[*cur] == kOnPath)
      throw Error(ErrorCode::CycleDetected, "parent chain through joint " +
                                                std::to_string(*cur) + " loops");
    for (JointIndex j : path) state[j] = kDone;
  }
}

}  // namespace detail

inline Skeleton build_skeleton(std::vector<OptJoint> parents,
                               std::vector<std::string> names = {}) {
  detail::check_range(parents);
  detail::check_acyclic(parents);
  const std::size_t n = parents.size();
  for (std::size_t i = 0; i < n; ++i)
    if (parents[i] && *parents[i] >= i)
      throw Error(ErrorCode::ForwardParent,
                  "joint " + std::to_string(i) + " has parent " + std::to_string(*parents[i]) +
                      " which is not earlier in the order; reindex first");
  if (!names.empty() && names.size() != n)
    throw Error(ErrorCode::LengthMismatch, "names length differs from joint count");

  Skeleton s;
  s.child_count_.assign(n, 0);
  for (const auto& p : parents)
    if (p) ++s.child_count_[*p];
  s.parent_ = std::move(parents);
  s.names_ = std::move(names);
  return s;
}

struct Reindexed {
  Skeleton skeleton;
  std::vector<JointIndex> permutation;  // old index -> new index
};

// Depth-first preorder from each root; roots and children both visited in
// ascending old index.
inline Reindexed reindex_topological(std::span<const OptJoint> parents,
                                     std::span<const std::string> names = {}) {
  detail::check_range(parents);
  const std::size_t n = parents.size();

  std::vector<std::uint32_t> child_begin(n + 1, 0);
  for (const auto& p : parents)
    if (p) ++child_begin[*p + 1];
  for (std::size_t i = 0; i < n; ++i) child_begin[i + 1] += child_begin[i];
  std::vector<JointIndex> children(child_begin[n]);
  {
    auto fill = child_begin;
    for (JointIndex i = 0; i < n; ++i)
      if (parents[i]) children[fill[*parents[i]]++] = i;
  }

  constexpr JointIndex kUnassigned = ~JointIndex{0};
  std::vector<JointIndex> perm(n, kUnassigned);
  JointIndex next = 0;
  std::vector<JointIndex> stack;
  for (JointIndex root = 0; root < n; ++root) {
    if (parents[root]) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      const JointIndex cur = stack.back();
      stack.pop_back();
      perm[cur] = next++;
      for (auto c = child_begin[cur + 1]; c-- > child_begin[cur];) stack.push_back(children[c]);
    }
  }
  if (next != n) throw Error(ErrorCode::CycleDetected, "joints unreachable from any root");

  std::vector<OptJoint> new_parents(n);
  std::vector<std::string> new_names(names.empty() ? 0 : n);
  for (JointIndex old = 0; old < n; ++old) {
    if (parents[old]) new_parents[perm[old]] = perm[*parents[old]];
    if (!names.empty()) new_names[perm[old]] = names[old];
  }
  return {build_skeleton(std::move(new_parents), std::move(new_names)), std::move(perm)};
}

struct DepthMap {
  std::vector<std::uint32_t> depth;
  std::uint32_t max_depth = 0;
};

inline DepthMap compute_depths(const Skeleton& s) {
  DepthMap d;
  d.depth.resize(s.size());
  for (JointIndex i = 0; i < s.size(); ++i) {
    const auto p = s.parent(i);
    d.depth[i] = p ? d.depth[*p] + 1 : 0;
    d.max_depth = std::max(d.max_depth, d.depth[i]);
  }
  return d;
}

// floor(log2(n)) + 1 power-of-two levels, enough to reach any ancestor of an
// n-joint skeleton.
inline std::size_t lift_levels(std::size_t n) { return std::bit_width(n); }

// Binary-lifting table: ancestor(i, k) is the 2^k-th ancestor of i.
class LiftTable {
 public:
  LiftTable() = default;
  LiftTable(std::size_t n, std::size_t levels) : n_(n), levels_(levels), table_(n * levels) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t levels() const noexcept { return levels_; }

  OptJoint ancestor(JointIndex i, std::size_t k) const {
    return k < levels_ ? table_[i * levels_ + k] : std::nullopt;
  }
  void set(JointIndex i, std::size_t k, OptJoint a) { table_[i * levels_ + k] = a; }

 private:
  std::size_t n_ = 0;
  std::size_t levels_ = 0;
  std::vector<OptJoint> table_;
};

inline LiftTable build_lift_table(const Skeleton& s) {
  const std::size_t n = s.size();
  LiftTable t(n, lift_levels(n));
  // Parents precede children, so row p is complete before any child reads it.
  for (JointIndex i = 0; i < n; ++i) {
    t.set(i, 0, s.parent(i));
    for (std::size_t k = 0; k + 1 < t.levels(); ++k) {
      const auto mid = t.ancestor(i, k);
      t.set(i, k + 1, mid ? t.ancestor(*mid, k) : std::nullopt);
    }
  }
  return t;
}

// The j-th level ancestor of i, found by composing power-of-two hops.
// j == 0 yields i itself.
inline OptJoint multi_parent(const LiftTable& lift, JointIndex i, std::uint64_t j) {
  if (i >= lift.size())
    throw Error(ErrorCode::IndexOutOfRange,
                "joint " + std::to_string(i) + " outside table of " + std::to_string(lift.size()));
  OptJoint cur = i;
  for (std::size_t k = 0; j != 0 && cur; ++k, j >>= 1) {
    if ((j & 1) == 0) continue;
    if (k >= lift.levels()) return std::nullopt;
    cur = lift.ancestor(*cur, k);
  }
  return j == 0 ? cur : std::nullopt;
}

// Fixed-size blocks of consecutive joints plus the two lookups the blocked
// scans need: block-clamped lifting and the nearest out-of-block ancestor.
class BlockLayout {
 public:
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t size() const noexcept { return block_of_.size(); }
  std::size_t block_count() const noexcept {
    return (size() + block_size_ - 1) / block_size_;
  }

  std::uint32_t block_of(JointIndex i) const { return block_of_[i]; }
  OptJoint max_parent_out_block(JointIndex i) const { return max_parent_out_block_[i]; }
  const LiftTable& in_block_lift() const noexcept { return in_block_lift_; }

  OptJoint in_block_ancestor(JointIndex i, std::size_t k) const {
    return in_block_lift_.ancestor(i, k);
  }
  // j-th ancestor of i when it lies in i's block, absent otherwise.
  OptJoint in_block_multi_parent(JointIndex i, std::uint64_t j) const {
    return multi_parent(in_block_lift_, i, j);
  }

 private:
  friend BlockLayout build_block_layout(const Skeleton&, std::size_t);

  std::size_t block_size_ = 0;
  std::vector<std::uint32_t> block_of_;
  std::vector<OptJoint> max_parent_out_block_;
  LiftTable in_block_lift_;
};

inline constexpr std::size_t kDefaultBlockSize = 64;

inline BlockLayout build_block_layout(const Skeleton& s, std::size_t block_size = kDefaultBlockSize) {
  if (block_size < 2)
    throw Error(ErrorCode::InvalidBlockSize,
                "block size must be at least 2, got " + std::to_string(block_size));
  const std::size_t n = s.size();
  BlockLayout b;
  b.block_size_ = block_size;
  b.block_of_.resize(n);
  b.max_parent_out_block_.resize(n);
  b.in_block_lift_ = LiftTable(n, lift_levels(n));
  auto& lift = b.in_block_lift_;
  for (JointIndex i = 0; i < n; ++i) {
    b.block_of_[i] = static_cast<std::uint32_t>(i / block_size);
    const auto p = s.parent(i);
    const bool parent_inside = p && b.block_of_[*p] == b.block_of_[i];
    if (!p)
      b.max_parent_out_block_[i] = std::nullopt;
    else if (!parent_inside)
      b.max_parent_out_block_[i] = p;
    else
      b.max_parent_out_block_[i] = b.max_parent_out_block_[*p];

    lift.set(i, 0, parent_inside ? p : std::nullopt);
    for (std::size_t k = 0; k + 1 < lift.levels(); ++k) {
      const auto mid = lift.ancestor(i, k);
      lift.set(i, k + 1, mid ? lift.ancestor(*mid, k) : std::nullopt);
    }
  }
  return b;
}

}  // namespace hscan
