// hscan: corpus generation, oracle verification, counter benchmarks and the
// skinning dump. Exit codes: 0 success, 1 verification failure, 2 I/O or
// spec error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hscan/hscan.hpp"

namespace {

using namespace hscan;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitError = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& raw,
                                        bool default_includes_oracle) {
  std::vector<Algorithm> out;
  auto add = [&](Algorithm a) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  };
  std::vector<std::string> names;
  for (const auto& r : raw)
    for (auto& s : split(r, ',')) names.push_back(s);
  if (names.empty()) names.push_back("all");
  for (const auto& name : names) {
    if (name == "all") {
      if (default_includes_oracle) add(Algorithm::Oracle);
      for (Algorithm a : kParallelAlgorithms) add(a);
    } else if (auto a = parse_algorithm(name)) {
      add(*a);
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown algorithm '" + name + "'");
    }
  }
  return out;
}

corpus::Precision parse_precision_flag(const std::string& s) {
  if (auto p = corpus::parse_precision(s)) return *p;
  throw Error(ErrorCode::InvalidSpec, "precision must be single or double");
}

bench::BarrierWeights parse_weights(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw Error(ErrorCode::InvalidSpec, "--barrier-weights expects g,l");
  try {
    return {std::stod(parts[0]), std::stod(parts[1])};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidSpec, "--barrier-weights expects two numbers");
  }
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    io::write_text_file(out_path, text);
}

std::vector<corpus::Entry> load_entries(const std::string& dir) {
  std::vector<corpus::Entry> out;
  for (auto& le : corpus::load(dir)) {
    if (le.reindexed)
      std::cerr << "note: " << le.entry.name << " was not in topological order; reindexed\n";
    out.push_back(std::move(le.entry));
  }
  return out;
}

struct Common {
  std::uint64_t seed = 0;
  std::string precision = "double";
  std::size_t block_size = kDefaultBlockSize;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--precision", c.precision, "single or double")
      ->check(CLI::IsMember({"single", "double"}));
  cmd->add_option("--block-size", c.block_size, "Joints per block for blocked scans")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
  cmd->add_option("--threads", c.threads, "Host threads (skeleton-level parallelism)")
      ->check(CLI::Range(1u, 1024u));
}

bench::RunOptions run_options(const Common& c) {
  return {parse_precision_flag(c.precision), c.block_size, c.threads};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchy scan library harness"};
  app.require_subcommand(1);

  Common gen_c, ver_c, bench_c, skin_c;

  // generate
  auto* gen = app.add_subcommand("generate", "Write a seeded skeleton + clip corpus");
  add_common(gen, gen_c);
  std::string gen_kind = "random_tree";
  std::size_t gen_joints = 300, gen_depth = 0, gen_count = 1;
  gen->add_option("--generator", gen_kind, "chain, random_tree or character_like")
      ->check(CLI::IsMember({"chain", "random_tree", "character_like"}));
  gen->add_option("--joints", gen_joints, "Joints per skeleton");
  gen->add_option("--depth", gen_depth, "Target hierarchy depth (default 120; chains: joints-1)");
  gen->add_option("--count,--characters", gen_count, "Number of skeletons");

  // verify
  auto* ver = app.add_subcommand("verify", "Compare algorithms against the oracle scan");
  add_common(ver, ver_c);
  std::string ver_corpus;
  std::vector<std::string> ver_algs;
  ver->add_option("--corpus", ver_corpus, "Corpus directory")->required();
  ver->add_option("--algorithms", ver_algs, "Comma-separated algorithm ids or 'all'");

  // bench
  auto* bch = app.add_subcommand("bench", "Counter sweep over hierarchy depth");
  add_common(bch, bench_c);
  std::string bench_corpus, bench_kind = "random_tree", bench_format = "csv", weights = "4,1";
  std::string depths = "15,30,60,120";
  std::size_t bench_joints = 300, characters = 100;
  bool allow_unverified = false;
  std::vector<std::string> bench_algs;
  bch->add_option("--corpus", bench_corpus, "Use an existing corpus instead of a sweep");
  bch->add_option("--generator", bench_kind, "Sweep generator")
      ->check(CLI::IsMember({"chain", "random_tree", "character_like"}));
  bch->add_option("--joints", bench_joints, "Joints per skeleton (ignored for chains)");
  bch->add_option("--depths", depths, "Comma-separated depth sweep");
  bch->add_option("--characters", characters, "Skeletons per depth point");
  bch->add_option("--algorithms", bench_algs, "Comma-separated algorithm ids or 'all'");
  bch->add_option("--format", bench_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  bch->add_option("--barrier-weights", weights, "Cost weights g,l for global/group barriers");
  bch->add_flag("--allow-unverified", allow_unverified, "Emit rows that failed verification");

  // skin
  auto* skn = app.add_subcommand("skin", "Run sample -> scan -> bind and dump skin matrices");
  add_common(skn, skin_c);
  std::string skin_corpus, skin_alg = "compressed";
  double clip_time = 0.0;
  skn->add_option("--corpus", skin_corpus, "Corpus directory")->required();
  skn->add_option("--time", clip_time, "Clip time in seconds");
  skn->add_option("--algorithm", skin_alg, "Algorithm id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (gen->parsed()) {
      corpus::CorpusSpec spec;
      spec.generator = *corpus::parse_generator(gen_kind);
      spec.joints_per_skeleton = gen_joints;
      spec.target_depth = gen_depth != 0 ? gen_depth
                          : spec.generator == corpus::Generator::Chain
                              ? gen_joints - 1
                              : std::min<std::size_t>(120, gen_joints - 1);
      spec.skeleton_count = gen_count;
      spec.seed = gen_c.seed;
      spec.precision = parse_precision_flag(gen_c.precision);
      if (gen_c.out.empty()) throw Error(ErrorCode::InvalidSpec, "generate needs --out <dir>");
      corpus::write(gen_c.out, spec, corpus::generate(spec));
      std::cerr << "wrote " << spec.skeleton_count << " skeletons to " << gen_c.out << "\n";
      return kExitOk;
    }

    if (ver->parsed()) {
      const auto entries = load_entries(ver_corpus);
      const auto report = bench::verify(entries, parse_algorithms(ver_algs, true), run_options(ver_c));
      emit(ver_c.out, report.to_json().dump(1) + "\n");
      double worst = 0;
      for (const auto& r : report.rows) worst = std::max(worst, r.max_error);
      std::cerr << (report.pass ? "PASS" : "FAIL") << ": max relative error " << worst
                << " (tolerance " << report.tolerance << ")\n";
      return report.pass ? kExitOk : kExitVerifyFailed;
    }

    if (bch->parsed()) {
      bench::BenchConfig cfg;
      cfg.generator = *corpus::parse_generator(bench_kind);
      cfg.joints = bench_joints;
      cfg.depths.clear();
      for (const auto& d : split(depths, ',')) cfg.depths.push_back(std::stoul(d));
      cfg.characters = characters;
      cfg.seed = bench_c.seed;
      cfg.algorithms = parse_algorithms(bench_algs, false);
      cfg.weights = parse_weights(weights);
      cfg.allow_unverified = allow_unverified;
      cfg.run = run_options(bench_c);
      const auto report = bench_corpus.empty()
                              ? bench::run_sweep(cfg)
                              : bench::run_on_corpus(load_entries(bench_corpus), cfg);
      emit(bench_c.out, bench_format == "csv" ? report.to_csv() : report.to_json().dump(1) + "\n");
      if (report.dropped_unverified > 0) {
        std::cerr << report.dropped_unverified << " rows failed verification and were dropped\n";
        return kExitVerifyFailed;
      }
      bool all_verified = true;
      for (const auto& r : report.rows) all_verified = all_verified && r.verified;
      return all_verified ? kExitOk : kExitVerifyFailed;
    }

    if (skn->parsed()) {
      const auto alg = parse_algorithm(skin_alg);
      if (!alg) throw Error(ErrorCode::InvalidSpec, "unknown algorithm '" + skin_alg + "'");
      const auto entries = load_entries(skin_corpus);
      const auto opt = run_options(skin_c);
      const auto doc = opt.precision == corpus::Precision::Double
                           ? bench::skin_to_json(bench::skin_poses<double>(entries, clip_time, *alg, opt),
                                                 clip_time, *alg)
                           : bench::skin_to_json(bench::skin_poses<float>(entries, clip_time, *alg, opt),
                                                 clip_time, *alg);
      emit(skin_c.out, doc.dump() + "\n");
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ToleranceExceeded ? kExitVerifyFailed : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
