#pragma once

#include <array>
#include <bit>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hscan/error.hpp"
#include "hscan/exec.hpp"
#include "hscan/pose.hpp"
#include "hscan/skeleton.hpp"

// Hierarchy scans: local pose -> model pose, where each joint's model
// transform is the product of local transforms from its root down to itself.

namespace hscan {

enum class Algorithm { Oracle, Gateau, Leaf, Doubling, Blocked, Compressed };

inline constexpr std::array<Algorithm, 6> kAllAlgorithms = {
    Algorithm::Oracle,  Algorithm::Gateau,  Algorithm::Leaf,
    Algorithm::Doubling, Algorithm::Blocked, Algorithm::Compressed};

// The parallel variants; what "all" means on the command line.
inline constexpr std::array<Algorithm, 5> kParallelAlgorithms = {
    Algorithm::Gateau, Algorithm::Leaf, Algorithm::Doubling, Algorithm::Blocked,
    Algorithm::Compressed};

constexpr std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Oracle: return "oracle";
    case Algorithm::Gateau: return "gateau";
    case Algorithm::Leaf: return "leaf";
    case Algorithm::Doubling: return "doubling";
    case Algorithm::Blocked: return "blocked";
    case Algorithm::Compressed: return "compressed";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (Algorithm a : kAllAlgorithms)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

// True when the algorithm multiplies in exactly the oracle's order.
constexpr bool matches_oracle_bitwise(Algorithm a) noexcept {
  return a == Algorithm::Oracle || a == Algorithm::Gateau || a == Algorithm::Leaf;
}

template <class T>
struct ScanResult {
  Pose<T> model_pose;
  exec::ExecStats stats;
};

struct ScanTables {
  LiftTable lift;
  BlockLayout layout;
};

inline ScanTables build_scan_tables(const Skeleton& s, std::size_t block_size = kDefaultBlockSize) {
  return {build_lift_table(s), build_block_layout(s, block_size)};
}

// Number of in-block doubling rounds needed to cover a whole block.
inline std::size_t in_block_rounds(std::size_t block_size) {
  return std::bit_width(block_size - 1);
}

// Run length of the compressed scan's serial stage: ceil(sqrt(block_size)),
// which is 8 for 64-joint blocks.
inline std::size_t compressed_stride(std::size_t block_size) {
  std::size_t s = 1;
  while (s * s < block_size) ++s;
  return s;
}

// Upper bound on in-block multiplies per thread for the compressed scan
// (7 + 7 = 14 for 64-joint blocks).
inline std::size_t compressed_in_block_bound(std::size_t block_size) {
  const std::size_t s = compressed_stride(block_size);
  return (s - 1) + ((block_size + s - 1) / s - 1);
}

namespace detail {

template <class T>
void check_local(const Skeleton& s, const Pose<T>& local) {
  if (local.space != Space::Local)
    throw Error(ErrorCode::WrongSpaceTag,
                std::string("scan expects a local pose, got ") + to_string(local.space));
  if (local.size() != s.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(local.size()) + " transforms for " +
                                               std::to_string(s.size()) + " joints");
}

template <class T>
ScanResult<T> finish(exec::ExecResult<T>&& r) {
  return {Pose<T>{std::move(r.values), Space::Model}, std::move(r.stats)};
}

// Walks the out-of-block ancestors of the calling thread, one per block.
template <class T>
exec::Phase<T> cross_block_phase(const BlockLayout& layout) {
  return {exec::BarrierKind::Global, 0, exec::ThreadDomain::AllJoints, "cross_block",
          [&layout](exec::ThreadContext<T>& ctx) {
            const JointIndex i = ctx.thread_id();
            OptJoint j = layout.max_parent_out_block(i);
            if (!j) return;
            Transform<T> acc = ctx.read(i);
            for (; j; j = layout.max_parent_out_block(*j)) acc = ctx.compose(ctx.read(*j), acc);
            ctx.write(i, acc);
          }};
}

}  // namespace detail

// Sequential reference: one pass in index order.
template <class T>
ScanResult<T> oracle_scan(const Skeleton& s, const Pose<T>& local) {
  detail::check_local(s, local);
  const std::size_t n = s.size();
  ScanResult<T> r;
  r.model_pose.space = Space::Model;
  r.model_pose.transforms.resize(n);
  for (JointIndex i = 0; i < n; ++i) {
    const auto p = s.parent(i);
    r.model_pose[i] = p ? compose(r.model_pose[*p], local[i]) : local[i];
  }
  auto& st = r.stats;
  st.per_thread_mults.assign(n, 0);
  st.active.assign(n, 0);
  st.active[0] = 1;
  st.per_thread_mults[0] = n - s.root_count();
  st.max_mults = st.total_mults = st.per_thread_mults[0];
  st.stage_max_mults["sequential"] = st.max_mults;
  return r;
}

// One thread per joint walking its whole ancestor chain. The chain is
// gathered first and multiplied root-first, so results match the oracle
// bit for bit.
template <class T>
exec::Program<T> gateau_program(const Skeleton& s) {
  return {{exec::BarrierKind::Global, 0, exec::ThreadDomain::AllJoints, "walk",
           [&s](exec::ThreadContext<T>& ctx) {
             thread_local std::vector<JointIndex> chain;
             chain.clear();
             for (OptJoint c = ctx.thread_id(); c; c = s.parent(*c)) chain.push_back(*c);
             Transform<T> acc = ctx.read(chain.back());
             for (auto k = chain.size() - 1; k-- > 0;) acc = ctx.compose(acc, ctx.read(chain[k]));
             ctx.write(ctx.thread_id(), acc);
           }}};
}

// One thread per leaf, filling every joint on its root-to-leaf path.
// Shared ancestors are written by several threads with identical values.
template <class T>
exec::Program<T> leaf_program(const Skeleton& s) {
  return {{exec::BarrierKind::Global, 0, exec::ThreadDomain::LeavesOnly, "walk",
           [&s](exec::ThreadContext<T>& ctx) {
             thread_local std::vector<JointIndex> path;
             path.clear();
             for (OptJoint c = ctx.thread_id(); c; c = s.parent(*c)) path.push_back(*c);
             Transform<T> acc = ctx.read(path.back());
             ctx.write(path.back(), acc);
             for (auto k = path.size() - 1; k-- > 0;) {
               acc = ctx.compose(acc, ctx.read(path[k]));
               ctx.write(path[k], acc);
             }
           }}};
}

// Ancestor doubling: in round d every joint left-multiplies by the value of
// its 2^(d-1)-th ancestor. ceil(log2(maxdepth + 1)) rounds.
template <class T>
exec::Program<T> doubling_program(const Skeleton& s, const LiftTable& lift) {
  const std::size_t rounds = std::bit_width(compute_depths(s).max_depth);
  exec::Program<T> prog;
  for (std::size_t k = 0; k < rounds; ++k)
    prog.push_back({exec::BarrierKind::Global, 0, exec::ThreadDomain::AllJoints, "doubling",
                    [&lift, k](exec::ThreadContext<T>& ctx) {
                      const JointIndex i = ctx.thread_id();
                      if (const auto a = lift.ancestor(i, k))
                        ctx.write(i, ctx.compose(ctx.read(*a), ctx.read(i)));
                    }});
  return prog;
}

// Doubling restricted to each block (hops leaving the block count as absent),
// then one cross-block walk.
template <class T>
exec::Program<T> blocked_program(const BlockLayout& layout) {
  exec::Program<T> prog;
  for (std::size_t k = 0; k < in_block_rounds(layout.block_size()); ++k)
    prog.push_back({exec::BarrierKind::Global, 0, exec::ThreadDomain::AllJoints, "in_block",
                    [&layout, k](exec::ThreadContext<T>& ctx) {
                      const JointIndex i = ctx.thread_id();
                      if (const auto a = layout.in_block_ancestor(i, k))
                        ctx.write(i, ctx.compose(ctx.read(*a), ctx.read(i)));
                    }});
  prog.push_back(detail::cross_block_phase<T>(layout));
  return prog;
}

// Two group-synchronised in-block stages (a serial run of up to stride-1
// parents, then up to ceil(block/stride)-1 hops of stride joints), then the
// cross-block walk.
template <class T>
exec::Program<T> compressed_program(const BlockLayout& layout) {
  const std::size_t b = layout.block_size();
  const std::size_t stride = compressed_stride(b);
  const std::size_t run_steps = stride - 1;
  const std::size_t hop_steps = (b + stride - 1) / stride - 1;
  exec::Program<T> prog;
  prog.push_back({exec::BarrierKind::Group, b, exec::ThreadDomain::AllJoints, "in_block",
                  [&layout, run_steps](exec::ThreadContext<T>& ctx) {
                    const JointIndex i = ctx.thread_id();
                    OptJoint cur = layout.in_block_ancestor(i, 0);
                    if (!cur) return;
                    Transform<T> acc = ctx.read(i);
                    for (std::size_t step = 0; step < run_steps && cur; ++step) {
                      acc = ctx.compose(ctx.read(*cur), acc);
                      cur = layout.in_block_ancestor(*cur, 0);
                    }
                    ctx.write(i, acc);
                  }});
  prog.push_back({exec::BarrierKind::Group, b, exec::ThreadDomain::AllJoints, "in_block",
                  [&layout, stride, hop_steps](exec::ThreadContext<T>& ctx) {
                    const JointIndex i = ctx.thread_id();
                    OptJoint cur = layout.in_block_multi_parent(i, stride);
                    if (!cur) return;
                    Transform<T> acc = ctx.read(i);
                    for (std::size_t step = 0; step < hop_steps && cur; ++step) {
                      acc = ctx.compose(ctx.read(*cur), acc);
                      cur = layout.in_block_multi_parent(*cur, stride);
                    }
                    ctx.write(i, acc);
                  }});
  prog.push_back(detail::cross_block_phase<T>(layout));
  return prog;
}

template <class T>
ScanResult<T> gateau_scan(const Skeleton& s, const Pose<T>& local,
                          const exec::ExecConfig& cfg = {}) {
  detail::check_local(s, local);
  return detail::finish(exec::run<T>(gateau_program<T>(s), local.transforms, s, cfg));
}

template <class T>
ScanResult<T> leaf_scan(const Skeleton& s, const Pose<T>& local,
                        const exec::ExecConfig& cfg = {}) {
  detail::check_local(s, local);
  return detail::finish(exec::run<T>(leaf_program<T>(s), local.transforms, s, cfg));
}

template <class T>
ScanResult<T> doubling_scan(const Skeleton& s, const LiftTable& lift, const Pose<T>& local,
                            const exec::ExecConfig& cfg = {},
                            const exec::PhaseObserver<T>& observer = {}) {
  detail::check_local(s, local);
  return detail::finish(
      exec::run<T>(doubling_program<T>(s, lift), local.transforms, s, cfg, observer));
}

template <class T>
ScanResult<T> blocked_scan(const Skeleton& s, const BlockLayout& layout, const Pose<T>& local,
                           const exec::ExecConfig& cfg = {}) {
  detail::check_local(s, local);
  if (layout.size() != s.size())
    throw Error(ErrorCode::LengthMismatch, "block layout built for another skeleton");
  return detail::finish(exec::run<T>(blocked_program<T>(layout), local.transforms, s, cfg));
}

template <class T>
ScanResult<T> compressed_scan(const Skeleton& s, const BlockLayout& layout, const Pose<T>& local,
                              const exec::ExecConfig& cfg = {}) {
  detail::check_local(s, local);
  if (layout.size() != s.size())
    throw Error(ErrorCode::LengthMismatch, "block layout built for another skeleton");
  return detail::finish(exec::run<T>(compressed_program<T>(layout), local.transforms, s, cfg));
}

template <class T>
ScanResult<T> run_scan(Algorithm a, const Skeleton& s, const ScanTables& tables,
                       const Pose<T>& local, const exec::ExecConfig& cfg = {}) {
  switch (a) {
    case Algorithm::Oracle: return oracle_scan(s, local);
    case Algorithm::Gateau: return gateau_scan(s, local, cfg);
    case Algorithm::Leaf: return leaf_scan(s, local, cfg);
    case Algorithm::Doubling: return doubling_scan(s, tables.lift, local, cfg);
    case Algorithm::Blocked: return blocked_scan(s, tables.layout, local, cfg);
    case Algorithm::Compressed: return compressed_scan(s, tables.layout, local, cfg);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown algorithm");
}

}  // namespace hscan
