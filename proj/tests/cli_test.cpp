#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

const fs::path kWork = fs::temp_directory_path() / ("hscan_cli_test_" + std::to_string(::getpid()));

int run(const std::string& args, const std::string& out_name = "stdout.txt") {
  const std::string cmd = std::string(HSCAN_CLI_PATH) + " " + args + " > " +
                          (kWork / out_name).string() + " 2> " + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    ASSERT_EQ(run("generate --generator random_tree --joints 120 --depth 40 --count 3 --seed 4 --out " +
                  (kWork / "corpus").string()),
              0);
  }
  std::string corpus() const { return (kWork / "corpus").string(); }
};

TEST_F(Cli, GenerateWritesFiles) {
  EXPECT_TRUE(fs::exists(kWork / "corpus" / "corpus.json"));
  EXPECT_TRUE(fs::exists(kWork / "corpus" / "skeleton_0002.json"));
  EXPECT_TRUE(fs::exists(kWork / "corpus" / "clip_0002.json"));
  EXPECT_EQ(run("generate --generator chain --joints 300 --out " + (kWork / "chain").string()), 0);
}

TEST_F(Cli, VerifyPasses) {
  EXPECT_EQ(run("verify --corpus " + corpus()), 0);
  const auto doc = nlohmann::json::parse(slurp(kWork / "stdout.txt"));
  EXPECT_TRUE(doc["pass"].get<bool>());
  EXPECT_EQ(doc["rows"].size(), 3u * 6u);
  EXPECT_EQ(run("verify --algorithms gateau,compressed --precision single --corpus " + corpus()), 0);
}

TEST_F(Cli, BenchCsvIsReproducible) {
  const std::string args = "bench --depths 15,30 --characters 2 --joints 100 --format csv";
  ASSERT_EQ(run(args, "a.csv"), 0);
  ASSERT_EQ(run(args + " --threads 3", "b.csv"), 0);
  const auto a = slurp(kWork / "a.csv");
  EXPECT_EQ(a, slurp(kWork / "b.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')),
            "depth,algorithm,max_mults,total_mults,global_barriers,group_barriers,modeled_cost,verified");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 5);
}

TEST_F(Cli, BenchJsonOnCorpus) {
  ASSERT_EQ(run("bench --format json --barrier-weights 2,0.5 --corpus " + corpus()), 0);
  const auto doc = nlohmann::json::parse(slurp(kWork / "stdout.txt"));
  EXPECT_EQ(doc["cost_model"]["w_global"], 2.0);
  EXPECT_EQ(doc["rows"].size(), 5u);
  EXPECT_EQ(doc["rows"][0]["depth"], 40);
}

TEST_F(Cli, SkinDump) {
  const auto out = (kWork / "skin.json").string();
  ASSERT_EQ(run("skin --time 0 --algorithm blocked --corpus " + corpus() + " --out " + out), 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  ASSERT_EQ(doc["skeletons"].size(), 3u);
  const auto& m = doc["skeletons"][0]["skin"][5];
  for (int k = 0; k < 16; ++k) EXPECT_NEAR(m[k].get<double>(), k % 5 == 0 ? 1.0 : 0.0, 1e-12);
}

TEST_F(Cli, ErrorsExitWithTwo) {
  EXPECT_EQ(run("verify --corpus " + (kWork / "missing").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("bench --algorithms warp"), 2);
  EXPECT_EQ(run("generate --generator random_tree --joints 10 --depth 10 --out " +
                (kWork / "bad").string()),
            2);

  const auto broken = kWork / "broken";
  ASSERT_EQ(run("generate --count 2 --joints 60 --depth 20 --out " + broken.string()), 0);
  std::ofstream(broken / "skeleton_0000.json") << R"({"joints": [{"parent": 1}, {"parent": 0}]})";
  EXPECT_EQ(run("verify --corpus " + broken.string()), 2);
  const auto err = slurp(kWork / "stderr.txt");
  EXPECT_NE(err.find("skeleton_0000.json"), std::string::npos) << err;
  EXPECT_NE(err.find("CycleDetected"), std::string::npos) << err;
}

TEST_F(Cli, UnverifiableBenchExitsWithOne) {
  // Scale 1e6 per joint overflows single precision a few joints down the
  // chain, so no algorithm can be verified.
  const auto dir = kWork / "drift";
  ASSERT_EQ(run("generate --generator chain --joints 40 --out " + dir.string()), 0);
  std::ostringstream clip;
  clip << R"({"duration": 1, "tracks": [)";
  for (int j = 0; j < 40; ++j)
    clip << (j ? "," : "") << R"([{"t": 0, "pos": [0.3, 0.1, 0], "rot": [0.8, 0.6, 0, 0], "scale": [1e6, 1e6, 1e6]}])";
  clip << "]}";
  std::ofstream(dir / "clip_0000.json") << clip.str();
  EXPECT_EQ(run("bench --precision single --format csv --corpus " + dir.string()), 1);
  EXPECT_EQ(run("bench --precision single --format csv --allow-unverified --corpus " + dir.string()), 1);
  EXPECT_NE(slurp(kWork / "stdout.txt").find("false"), std::string::npos);
}

}  // namespace
