#include <gtest/gtest.h>

#include "hscan/bench.hpp"
#include "test_support.hpp"

namespace hscan {
namespace {

using Tf = Transform<double>;

std::vector<corpus::Entry> small_corpus(std::size_t count, std::size_t depth, std::uint64_t seed) {
  corpus::CorpusSpec spec;
  spec.joints_per_skeleton = 200;
  spec.target_depth = depth;
  spec.skeleton_count = count;
  spec.seed = seed;
  return corpus::generate(spec);
}

const bench::BenchRow& row_for(const bench::BenchReport& rep, std::size_t depth, Algorithm a) {
  for (const auto& r : rep.rows)
    if (r.depth == depth && r.algorithm == a) return r;
  throw std::runtime_error("missing row");
}

TEST(Compare, NonFiniteNeverPasses) {
  Pose<double> want{{Tf::identity(), Tf::identity()}, Space::Model};
  Pose<double> got = want;
  got[0].m[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(bench::compare(got, want).max_error <= 1.0);
  got[0] = want[0];
  EXPECT_EQ(bench::compare(got, want).max_error, 0.0);
  EXPECT_TRUE(bench::compare(got, want).bit_identical);
}

TEST(Verify, AllAlgorithmsPass) {
  const auto entries = small_corpus(4, 70, 3);
  const auto rep = bench::verify(entries, {kAllAlgorithms.begin(), kAllAlgorithms.end()}, {});
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.rows.size(), 4u * 6u);
  for (const auto& r : rep.rows) {
    EXPECT_LE(r.max_error, 1e-9);
    if (matches_oracle_bitwise(r.algorithm)) {
      EXPECT_TRUE(r.bit_identical) << to_string(r.algorithm);
      EXPECT_EQ(r.max_error, 0.0);
    }
  }
}

TEST(Verify, SinglePrecisionTolerance) {
  bench::RunOptions opt;
  opt.precision = corpus::Precision::Single;
  const auto rep = bench::verify(small_corpus(2, 120, 4), {kParallelAlgorithms.begin(),
                                                           kParallelAlgorithms.end()}, opt);
  EXPECT_EQ(rep.tolerance, 1e-3);
  EXPECT_TRUE(rep.pass);
}

TEST(Verify, WorkersDoNotChangeReport) {
  const auto entries = small_corpus(6, 40, 9);
  const std::vector<Algorithm> algs{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  bench::RunOptions par;
  par.workers = 4;
  EXPECT_EQ(bench::verify(entries, algs).to_json().dump(), bench::verify(entries, algs, par).to_json().dump());
}

bench::BenchConfig small_sweep() {
  bench::BenchConfig cfg;
  cfg.characters = 3;
  cfg.joints = 300;
  return cfg;
}

TEST(Bench, SweepHasOneRowPerDepthAndAlgorithm) {
  const auto rep = bench::run_sweep(small_sweep());
  ASSERT_EQ(rep.rows.size(), 20u);
  EXPECT_EQ(rep.dropped_unverified, 0u);
  for (const auto& r : rep.rows) {
    EXPECT_TRUE(r.verified);
    EXPECT_EQ(r.joints, 900u);
    EXPECT_EQ(r.skeletons, 3u);
    EXPECT_EQ(r.modeled_cost, double(r.total_mults) + 4.0 * double(r.global_barriers) * 900.0 +
                                  1.0 * double(r.group_barriers) * 900.0);
  }
  for (std::size_t d : {15u, 30u, 60u, 120u}) {
    EXPECT_EQ(row_for(rep, d, Algorithm::Gateau).max_mults, d);
    EXPECT_EQ(row_for(rep, d, Algorithm::Leaf).max_mults, d);
    EXPECT_LE(row_for(rep, d, Algorithm::Compressed).in_block_max_mults, 14u);
  }
}

TEST(Bench, ChainCounters) {
  auto cfg = small_sweep();
  cfg.generator = corpus::Generator::Chain;
  cfg.characters = 1;
  cfg.depths = {299};
  const auto rep = bench::run_sweep(cfg);
  EXPECT_EQ(row_for(rep, 299, Algorithm::Doubling).global_barriers, 9u);
  EXPECT_LE(row_for(rep, 299, Algorithm::Blocked).max_mults, 11u);
  const auto& c = row_for(rep, 299, Algorithm::Compressed);
  EXPECT_LE(c.max_mults, 19u);
  EXPECT_EQ(c.group_barriers, 2u);
  EXPECT_EQ(c.global_barriers, 1u);
  EXPECT_EQ(row_for(rep, 299, Algorithm::Gateau).joints, 300u);
}

TEST(Bench, DeepChainFavoursCompressed) {
  auto cfg = small_sweep();
  cfg.generator = corpus::Generator::Chain;
  cfg.characters = 1;
  cfg.depths = {120};
  const auto rep = bench::run_sweep(cfg);
  EXPECT_EQ(row_for(rep, 120, Algorithm::Gateau).max_mults, 120u);
  EXPECT_LT(row_for(rep, 120, Algorithm::Compressed).max_mults, 120u);
}

TEST(Bench, CsvHeaderAndDeterminism) {
  const auto a = bench::run_sweep(small_sweep());
  auto cfg = small_sweep();
  cfg.run.workers = 3;
  const auto b = bench::run_sweep(cfg);
  const auto csv = a.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "depth,algorithm,max_mults,total_mults,global_barriers,group_barriers,modeled_cost,verified");
  EXPECT_EQ(csv, b.to_csv());
  EXPECT_EQ(a.to_json(false).dump(), b.to_json(false).dump());
  EXPECT_FALSE(a.to_json(false)["rows"][0].contains("wall_clock_ms"));
  EXPECT_TRUE(a.to_json(true)["rows"][0].contains("wall_clock_ms"));
}

TEST(Bench, WeightsOnlyAffectCost) {
  auto cfg = small_sweep();
  cfg.depths = {30};
  const auto a = bench::run_sweep(cfg);
  cfg.weights = {0, 0};
  const auto b = bench::run_sweep(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].total_mults, b.rows[i].total_mults);
    EXPECT_EQ(b.rows[i].modeled_cost, double(b.rows[i].total_mults));
  }
}

TEST(Bench, CorpusIsGroupedByDepth) {
  auto entries = small_corpus(2, 20, 1);
  const auto more = small_corpus(3, 50, 2);
  entries.insert(entries.end(), more.begin(), more.end());
  bench::BenchConfig cfg;
  const auto rep = bench::run_on_corpus(entries, cfg);
  ASSERT_EQ(rep.rows.size(), 10u);
  EXPECT_EQ(rep.rows.front().depth, 20u);
  EXPECT_EQ(rep.rows.front().skeletons, 2u);
  EXPECT_EQ(rep.rows.back().depth, 50u);
  EXPECT_EQ(rep.rows.back().skeletons, 3u);
}

TEST(Skin, IdentityAtBindTime) {
  const auto entries = small_corpus(3, 100, 11);
  for (Algorithm a : kAllAlgorithms) {
    const auto res = bench::skin_poses<double>(entries, 0.0, a);
    for (const auto& r : res)
      for (const auto& t : r.skin.transforms)
        for (int k = 0; k < 16; ++k) ASSERT_NEAR(t.m[k], Tf::identity().m[k], 1e-12) << to_string(a);
  }
}

TEST(Skin, TranslationClipAtHalfTime) {
  corpus::Entry e;
  e.name = "slide";
  e.skeleton = build_skeleton({std::nullopt, 0});
  e.clip.duration = 1;
  const Trs<double> rest{{0, 0, 0}, {}, {1, 1, 1}};
  Trs<double> moved = rest;
  moved.translation = {2, 0, 0};
  e.clip.tracks = {{{0.0, rest}, {1.0, moved}}, {{0.0, rest}}};
  const auto res = bench::skin_poses<double>({e}, 0.5, Algorithm::Compressed);
  // Root moves by 1 along x; the child follows.
  for (const auto& t : res[0].skin.transforms) {
    EXPECT_DOUBLE_EQ(t(0, 3), 1.0);
    EXPECT_DOUBLE_EQ(t(1, 3), 0.0);
  }
}

TEST(Skin, AlgorithmsAgreeWithOracle) {
  const auto entries = small_corpus(3, 120, 13);
  const auto want = bench::skin_poses<double>(entries, 0.37, Algorithm::Oracle);
  for (Algorithm a : kParallelAlgorithms) {
    const auto got = bench::skin_poses<double>(entries, 0.37, a);
    for (std::size_t i = 0; i < entries.size(); ++i)
      for (std::size_t j = 0; j < entries[i].skeleton.size(); ++j) {
        const auto& g = got[i].skin[j];
        const auto& w = want[i].skin[j];
        double err = 0;
        for (int k = 0; k < 16; ++k) err = std::max(err, std::abs(g.m[k] - w.m[k]));
        ASSERT_LE(err, 1e-9) << to_string(a);
      }
  }
  const auto doc = bench::skin_to_json(want, 0.37, Algorithm::Oracle);
  EXPECT_EQ(doc["skeletons"].size(), 3u);
  EXPECT_EQ(doc["skeletons"][0]["skin"][0].size(), 16u);
}

}  // namespace
}  // namespace hscan
