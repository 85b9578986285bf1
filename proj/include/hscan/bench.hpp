#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hscan/corpus.hpp"
#include "hscan/io.hpp"
#include "hscan/pose.hpp"
#include "hscan/scan.hpp"

// Harness operations behind the CLI: oracle verification, counter sweeps and
// the end-to-end skinning dump.

namespace hscan::bench {

using corpus::Precision;

inline constexpr double tolerance(Precision p) { return p == Precision::Double ? 1e-9 : 1e-3; }

inline constexpr int kVerifySamples = 16;

// Runs fn(i) for i in [0, count) on up to `workers` host threads. Results must
// be written to per-index slots by the caller.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Comparison {
  double max_error = 0;
  bool bit_identical = true;
};

template <class T>
Comparison compare(const Pose<T>& got, const Pose<T>& want) {
  Comparison c;
  for (std::size_t i = 0; i < want.size(); ++i) {
    const double e = relative_frobenius_error(got[i], want[i]);
    // overflowed poses give inf/NaN; never let them pass
    c.max_error = std::isfinite(e) ? std::max(c.max_error, e) : std::numeric_limits<double>::infinity();
    if (!bit_equal(got[i], want[i])) c.bit_identical = false;
  }
  return c;
}

// ---- verify --------------------------------------------------------------

struct VerifyRow {
  std::string skeleton;
  Algorithm algorithm;
  double max_error = 0;
  bool bit_identical = true;
  bool pass = true;
};

struct VerifyReport {
  std::vector<VerifyRow> rows;
  double tolerance = 0;
  bool pass = true;

  io::json to_json() const {
    io::json rows_json = io::json::array();
    for (const auto& r : rows)
      rows_json.push_back({{"skeleton", r.skeleton},
                           {"algorithm", to_string(r.algorithm)},
                           {"max_error", r.max_error},
                           {"bit_identical", r.bit_identical},
                           {"pass", r.pass}});
    return {{"tolerance", tolerance}, {"pass", pass}, {"rows", std::move(rows_json)}};
  }
};

struct RunOptions {
  Precision precision = Precision::Double;
  std::size_t block_size = kDefaultBlockSize;
  unsigned workers = 1;  // skeleton-level parallelism
};

namespace detail {

template <class T>
std::vector<VerifyRow> verify_entry(const corpus::Entry& e, const std::vector<Algorithm>& algs,
                                    const RunOptions& opt) {
  const auto tables = build_scan_tables(e.skeleton, opt.block_size);
  std::vector<VerifyRow> rows;
  for (Algorithm a : algs) rows.push_back({e.name, a});
  for (int k = 0; k < kVerifySamples; ++k) {
    const double t = e.clip.duration * k / kVerifySamples;
    const auto local = sample_clip<T>(e.clip, e.skeleton, t, Wrap::Loop);
    const auto truth = oracle_scan(e.skeleton, local);
    for (auto& row : rows) {
      const auto got = run_scan(row.algorithm, e.skeleton, tables, local);
      const auto c = compare(got.model_pose, truth.model_pose);
      row.max_error = std::max(row.max_error, c.max_error);
      row.bit_identical = row.bit_identical && c.bit_identical;
    }
  }
  for (auto& row : rows) row.pass = row.max_error <= tolerance(opt.precision);
  return rows;
}

}  // namespace detail

inline VerifyReport verify(const std::vector<corpus::Entry>& entries,
                           const std::vector<Algorithm>& algs, const RunOptions& opt = {}) {
  std::vector<std::vector<VerifyRow>> per(entries.size());
  parallel_for(entries.size(), opt.workers, [&](std::size_t i) {
    per[i] = opt.precision == Precision::Double
                 ? detail::verify_entry<double>(entries[i], algs, opt)
                 : detail::verify_entry<float>(entries[i], algs, opt);
  });
  VerifyReport rep;
  rep.tolerance = tolerance(opt.precision);
  for (auto& rows : per)
    for (auto& r : rows) {
      rep.pass = rep.pass && r.pass;
      rep.rows.push_back(std::move(r));
    }
  return rep;
}

// ---- bench ---------------------------------------------------------------

struct BarrierWeights {
  double global = 4.0;
  double group = 1.0;
};

struct BenchRow {
  std::size_t depth = 0;
  Algorithm algorithm = Algorithm::Oracle;
  std::uint64_t max_mults = 0;
  std::uint64_t total_mults = 0;
  std::uint64_t global_barriers = 0;
  std::uint64_t group_barriers = 0;
  std::uint64_t in_block_max_mults = 0;
  std::uint64_t joints = 0;
  std::uint64_t skeletons = 0;
  double modeled_cost = 0;
  double max_error = 0;
  double wall_clock_ms = 0;
  bool verified = true;
};

struct BenchConfig {
  corpus::Generator generator = corpus::Generator::RandomTree;
  std::size_t joints = 300;           // ignored for chains (joints = depth + 1)
  std::vector<std::size_t> depths = {15, 30, 60, 120};
  std::size_t characters = 100;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algorithms{kParallelAlgorithms.begin(), kParallelAlgorithms.end()};
  BarrierWeights weights;
  bool allow_unverified = false;
  RunOptions run;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  BarrierWeights weights;
  std::size_t block_size = kDefaultBlockSize;
  Precision precision = Precision::Double;
  std::size_t dropped_unverified = 0;

  static constexpr const char* kCsvHeader =
      "depth,algorithm,max_mults,total_mults,global_barriers,group_barriers,modeled_cost,verified";

  // No wall-clock column: the CSV is byte-reproducible.
  std::string to_csv() const {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    char cost[64];
    for (const auto& r : rows) {
      std::snprintf(cost, sizeof cost, "%.17g", r.modeled_cost);
      os << r.depth << ',' << to_string(r.algorithm) << ',' << r.max_mults << ','
         << r.total_mults << ',' << r.global_barriers << ',' << r.group_barriers << ',' << cost
         << ',' << (r.verified ? "true" : "false") << '\n';
    }
    return os.str();
  }

  io::json to_json(bool include_wall_clock = true) const {
    io::json rows_json = io::json::array();
    for (const auto& r : rows) {
      io::json j{{"depth", r.depth},
                 {"algorithm", to_string(r.algorithm)},
                 {"max_mults", r.max_mults},
                 {"total_mults", r.total_mults},
                 {"global_barriers", r.global_barriers},
                 {"group_barriers", r.group_barriers},
                 {"in_block_max_mults", r.in_block_max_mults},
                 {"joints", r.joints},
                 {"skeletons", r.skeletons},
                 {"modeled_cost", r.modeled_cost},
                 {"max_error", r.max_error},
                 {"verified", r.verified}};
      if (include_wall_clock) j["wall_clock_ms"] = r.wall_clock_ms;
      rows_json.push_back(std::move(j));
    }
    return {{"cost_model",
             {{"formula",
               "total_mults + w_global * global_barriers * joints + w_group * group_barriers * joints"},
              {"w_global", weights.global},
              {"w_group", weights.group},
              {"note", "invented weights; raw counters are the primary data"}}},
            {"block_size", block_size},
            {"precision", to_string(precision)},
            {"compressed_in_block_bound", compressed_in_block_bound(block_size)},
            {"compressed_in_block_nominal", 16},
            {"dropped_unverified", dropped_unverified},
            {"rows", std::move(rows_json)}};
  }
};

namespace detail {

struct SkeletonRun {
  exec::ExecStats stats;
  double error = 0;
  double ms = 0;
};

template <class T>
std::vector<SkeletonRun> bench_entry(const corpus::Entry& e, const std::vector<Algorithm>& algs,
                                     const RunOptions& opt) {
  const auto tables = build_scan_tables(e.skeleton, opt.block_size);
  const auto local = sample_clip<T>(e.clip, e.skeleton, 0.5 * e.clip.duration);
  const auto truth = oracle_scan(e.skeleton, local);
  std::vector<SkeletonRun> out;
  for (Algorithm a : algs) {
    const auto start = std::chrono::steady_clock::now();
    auto r = run_scan(a, e.skeleton, tables, local);
    const auto stop = std::chrono::steady_clock::now();
    out.push_back({std::move(r.stats), compare(r.model_pose, truth.model_pose).max_error,
                   std::chrono::duration<double, std::milli>(stop - start).count()});
  }
  return out;
}

}  // namespace detail

// Aggregates one depth point. Barrier counts are per dispatch (max over
// skeletons), multiplies are summed, joints is the batch size.
inline std::vector<BenchRow> bench_depth(std::size_t depth, const std::vector<corpus::Entry>& entries,
                                         const BenchConfig& cfg) {
  std::vector<std::vector<detail::SkeletonRun>> per(entries.size());
  const RunOptions& opt = cfg.run;
  parallel_for(entries.size(), opt.workers, [&](std::size_t i) {
    per[i] = opt.precision == Precision::Double
                 ? detail::bench_entry<double>(entries[i], cfg.algorithms, opt)
                 : detail::bench_entry<float>(entries[i], cfg.algorithms, opt);
  });
  std::uint64_t joints = 0;
  for (const auto& e : entries) joints += e.skeleton.size();

  std::vector<BenchRow> rows;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    BenchRow row;
    row.depth = depth;
    row.algorithm = cfg.algorithms[a];
    row.joints = joints;
    row.skeletons = entries.size();
    for (const auto& runs : per) {
      const auto& r = runs[a];
      row.max_mults = std::max(row.max_mults, r.stats.max_mults);
      row.total_mults += r.stats.total_mults;
      row.global_barriers = std::max(row.global_barriers, r.stats.global_barriers);
      row.group_barriers = std::max(row.group_barriers, r.stats.group_barriers);
      if (auto it = r.stats.stage_max_mults.find("in_block"); it != r.stats.stage_max_mults.end())
        row.in_block_max_mults = std::max(row.in_block_max_mults, it->second);
      row.max_error = std::max(row.max_error, r.error);
      row.wall_clock_ms += r.ms;
    }
    row.verified = row.max_error <= tolerance(opt.precision);
    row.modeled_cost = static_cast<double>(row.total_mults) +
                       cfg.weights.global * double(row.global_barriers) * double(joints) +
                       cfg.weights.group * double(row.group_barriers) * double(joints);
    rows.push_back(row);
  }
  return rows;
}

inline void sort_rows(std::vector<BenchRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return static_cast<int>(a.algorithm) < static_cast<int>(b.algorithm);
  });
}

inline BenchReport finish_report(std::vector<BenchRow> rows, const BenchConfig& cfg) {
  BenchReport rep;
  rep.weights = cfg.weights;
  rep.block_size = cfg.run.block_size;
  rep.precision = cfg.run.precision;
  sort_rows(rows);
  for (auto& r : rows) {
    if (!r.verified && !cfg.allow_unverified) {
      ++rep.dropped_unverified;
      continue;
    }
    rep.rows.push_back(r);
  }
  return rep;
}

inline corpus::CorpusSpec sweep_spec(const BenchConfig& cfg, std::size_t depth) {
  corpus::CorpusSpec spec;
  spec.generator = cfg.generator;
  spec.joints_per_skeleton = cfg.generator == corpus::Generator::Chain ? depth + 1 : cfg.joints;
  spec.target_depth = depth;
  spec.skeleton_count = cfg.characters;
  spec.seed = corpus::splitmix64(cfg.seed ^ depth);
  spec.precision = cfg.run.precision;
  return spec;
}

// Generates a corpus per depth point and measures every algorithm on it.
inline BenchReport run_sweep(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  for (std::size_t depth : cfg.depths) {
    const auto entries = corpus::generate(sweep_spec(cfg, depth));
    auto r = bench_depth(depth, entries, cfg);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return finish_report(std::move(rows), cfg);
}

// Groups an existing corpus by max depth; one row set per distinct depth.
inline BenchReport run_on_corpus(const std::vector<corpus::Entry>& entries, const BenchConfig& cfg) {
  std::map<std::size_t, std::vector<corpus::Entry>> by_depth;
  for (const auto& e : entries) by_depth[compute_depths(e.skeleton).max_depth].push_back(e);
  std::vector<BenchRow> rows;
  for (const auto& [depth, group] : by_depth) {
    auto r = bench_depth(depth, group, cfg);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return finish_report(std::move(rows), cfg);
}

// ---- skin ----------------------------------------------------------------

template <class T>
struct SkinResult {
  std::string skeleton;
  Pose<T> skin;
};

// Bind pose is the clip at t = 0, scanned with the same algorithm as the
// animated pose; skin = model(t) * inverse(bind model).
template <class T>
std::vector<SkinResult<T>> skin_poses(const std::vector<corpus::Entry>& entries, double time,
                                      Algorithm alg, const RunOptions& opt = {}) {
  std::vector<SkinResult<T>> out(entries.size());
  parallel_for(entries.size(), opt.workers, [&](std::size_t i) {
    const auto& e = entries[i];
    const auto tables = build_scan_tables(e.skeleton, opt.block_size);
    const auto bind = run_scan(alg, e.skeleton, tables, sample_clip<T>(e.clip, e.skeleton, 0.0));
    const auto inv_bind = inverse_bind_from_model(bind.model_pose);
    const auto model = run_scan(alg, e.skeleton, tables, sample_clip<T>(e.clip, e.skeleton, time));
    out[i] = {e.name, bind_skin(model.model_pose, std::span<const Transform<T>>(inv_bind))};
  });
  return out;
}

template <class T>
io::json skin_to_json(const std::vector<SkinResult<T>>& results, double time, Algorithm alg) {
  io::json sk = io::json::array();
  for (const auto& r : results) {
    io::json mats = io::json::array();
    for (const auto& t : r.skin.transforms) mats.push_back(io::transform_to_json(t));
    sk.push_back({{"skeleton", r.skeleton}, {"skin", std::move(mats)}});
  }
  return {{"algorithm", to_string(alg)}, {"time", time}, {"layout", "row-major 4x4"},
          {"skeletons", std::move(sk)}};
}

}  // namespace hscan::bench
