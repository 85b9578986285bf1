#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hscan/error.hpp"
#include "hscan/skeleton.hpp"
#include "hscan/transform.hpp"

// A deterministic stand-in for a compute dispatch. A program is a list of
// phases separated by barriers; inside a phase every logical thread reads the
// snapshot committed by the previous barrier (plus its own writes) and its
// writes become visible only after the phase ends.

namespace hscan::exec {

enum class BarrierKind { Global, Group };
enum class ThreadDomain { AllJoints, LeavesOnly };

template <class T>
class ThreadContext;

template <class T>
struct Phase {
  BarrierKind barrier = BarrierKind::Global;
  std::size_t group_size = 0;  // Group phases only; reads must stay inside the group
  ThreadDomain domain = ThreadDomain::AllJoints;
  std::string stage;  // consecutive phases with one stage name share a counter
  std::function<void(ThreadContext<T>&)> body;
};

template <class T>
using Program = std::vector<Phase<T>>;

struct ExecStats {
  std::vector<std::uint64_t> per_thread_mults;  // indexed by thread id (a joint index)
  std::vector<std::uint8_t> active;             // thread ran in at least one phase
  std::uint64_t max_mults = 0;
  std::uint64_t total_mults = 0;
  std::uint64_t global_barriers = 0;
  std::uint64_t group_barriers = 0;
  std::uint64_t phases = 0;
  std::vector<std::uint64_t> phase_mults;  // total multiplies in each phase
  std::map<std::string, std::uint64_t> stage_max_mults;

  std::size_t thread_count() const {
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
  }

  // multiplies -> number of active threads that performed that many
  std::map<std::uint64_t, std::uint64_t> histogram() const {
    std::map<std::uint64_t, std::uint64_t> h;
    for (std::size_t i = 0; i < per_thread_mults.size(); ++i)
      if (active[i]) ++h[per_thread_mults[i]];
    return h;
  }

  friend bool operator==(const ExecStats&, const ExecStats&) = default;
};

struct ExecConfig {
  unsigned workers = 1;        // host threads used to execute logical threads
  bool reverse_order = false;  // run logical threads back to front
};

template <class T>
struct ExecResult {
  std::vector<Transform<T>> values;
  ExecStats stats;
};

template <class T>
using PhaseObserver = std::function<void(std::size_t phase, std::span<const Transform<T>>)>;

namespace detail {

template <class T>
struct PendingWrite {
  JointIndex thread;
  JointIndex cell;
  Transform<T> value;
};

}  // namespace detail

template <class T>
class ThreadContext {
 public:
  JointIndex thread_id() const noexcept { return thread_; }
  std::size_t size() const noexcept { return snapshot_.size(); }

  Transform<T> read(JointIndex cell) const {
    check(cell);
    if (group_size_ != 0 && cell / group_size_ != thread_ / group_size_)
      throw Error(ErrorCode::InvalidSpec, "thread " + std::to_string(thread_) +
                                              " read cell " + std::to_string(cell) +
                                              " outside its barrier group");
    for (auto k = pending_->size(); k-- > own_begin_;)
      if ((*pending_)[k].cell == cell) return (*pending_)[k].value;
    return snapshot_[cell];
  }

  void write(JointIndex cell, const Transform<T>& value) {
    check(cell);
    pending_->push_back({thread_, cell, value});
  }

  // The only counted operation: one transform composition.
  Transform<T> compose(const Transform<T>& parent, const Transform<T>& child) {
    ++mults_;
    return hscan::compose(parent, child);
  }

 private:
  template <class U>
  friend ExecResult<U> run(const Program<U>&, std::span<const Transform<U>>, const Skeleton&,
                           const ExecConfig&, const PhaseObserver<U>&);

  ThreadContext(std::span<const Transform<T>> snapshot, std::vector<detail::PendingWrite<T>>* pending,
                std::size_t group_size)
      : snapshot_(snapshot), pending_(pending), group_size_(group_size) {}

  void check(JointIndex cell) const {
    if (cell >= snapshot_.size())
      throw Error(ErrorCode::IndexOutOfRange, "cell " + std::to_string(cell));
  }

  std::span<const Transform<T>> snapshot_;
  std::vector<detail::PendingWrite<T>>* pending_;
  std::size_t group_size_ = 0;
  std::size_t own_begin_ = 0;
  JointIndex thread_ = 0;
  std::uint64_t mults_ = 0;
};

template <class T>
ExecResult<T> run(const Program<T>& program, std::span<const Transform<T>> initial,
                  const Skeleton& skeleton, const ExecConfig& config = {},
                  const PhaseObserver<T>& observer = {}) {
  const std::size_t n = skeleton.size();
  if (initial.size() != n)
    throw Error(ErrorCode::LengthMismatch, std::to_string(initial.size()) + " values for " +
                                               std::to_string(n) + " joints");

  ExecResult<T> result;
  ExecStats& stats = result.stats;
  stats.per_thread_mults.assign(n, 0);
  stats.active.assign(n, 0);

  std::vector<Transform<T>> current(initial.begin(), initial.end());
  std::vector<Transform<T>> next;
  std::vector<std::uint64_t> stamp(n, 0);
  std::vector<std::uint64_t> stage_mults(n, 0);

  std::vector<JointIndex> all_joints(n);
  for (JointIndex i = 0; i < n; ++i) all_joints[i] = i;
  const std::vector<JointIndex> leaves = skeleton.leaves();

  const unsigned workers = std::max(1u, config.workers);
  std::vector<std::vector<detail::PendingWrite<T>>> pending(workers);

  for (std::size_t p = 0; p < program.size(); ++p) {
    const Phase<T>& phase = program[p];
    if (phase.barrier == BarrierKind::Group && phase.group_size == 0)
      throw Error(ErrorCode::InvalidSpec, "group phase without a group size");
    const std::size_t group = phase.barrier == BarrierKind::Group ? phase.group_size : 0;
    if (p == 0 || phase.stage != program[p - 1].stage) std::fill(stage_mults.begin(), stage_mults.end(), 0);

    const std::vector<JointIndex>& threads =
        phase.domain == ThreadDomain::AllJoints ? all_joints : leaves;
    const std::size_t chunk = (threads.size() + workers - 1) / workers;
    std::vector<std::uint64_t> chunk_mults(workers, 0);

    auto run_chunk = [&](unsigned w) {
      auto& out = pending[w];
      out.clear();
      const std::size_t lo = std::min(threads.size(), w * chunk);
      const std::size_t hi = std::min(threads.size(), lo + chunk);
      ThreadContext<T> ctx(current, &out, group);
      for (std::size_t k = lo; k < hi; ++k) {
        const JointIndex tid = threads[config.reverse_order ? hi - 1 - (k - lo) : k];
        ctx.thread_ = tid;
        ctx.own_begin_ = out.size();
        ctx.mults_ = 0;
        phase.body(ctx);
        stats.per_thread_mults[tid] += ctx.mults_;
        chunk_mults[w] += ctx.mults_;
        stage_mults[tid] += ctx.mults_;
        stats.active[tid] = 1;
      }
    };

    if (workers == 1) {
      run_chunk(0);
    } else {
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          try {
            run_chunk(w);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    // Commit in chunk order. Duplicate writes must agree bit for bit.
    next = current;
    const std::uint64_t tag = p + 1;
    for (const auto& chunk_writes : pending)
      for (const auto& wr : chunk_writes) {
        if (stamp[wr.cell] == tag) {
          if (!bit_equal(next[wr.cell], wr.value))
            throw Error(ErrorCode::WriteConflict,
                        "phase " + std::to_string(p) + ": thread " + std::to_string(wr.thread) +
                            " wrote a different value to cell " + std::to_string(wr.cell));
          continue;
        }
        stamp[wr.cell] = tag;
        next[wr.cell] = wr.value;
      }
    current.swap(next);

    ++stats.phases;
    stats.phase_mults.push_back(std::accumulate(chunk_mults.begin(), chunk_mults.end(), std::uint64_t{0}));
    if (phase.barrier == BarrierKind::Global)
      ++stats.global_barriers;
    else
      ++stats.group_barriers;
    auto& stage_max = stats.stage_max_mults[phase.stage];
    for (JointIndex t : threads) stage_max = std::max(stage_max, stage_mults[t]);

    if (observer) observer(p, current);
  }

  for (std::uint64_t m : stats.per_thread_mults) {
    stats.total_mults += m;
    stats.max_mults = std::max(stats.max_mults, m);
  }
  result.values = std::move(current);
  return result;
}

}  // namespace hscan::exec
