#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  std::string cmd = std::string(GAPGAME_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("gapgame_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kConfigs = GAPGAME_CONFIG_DIR;

}  // namespace

TEST(Cli, SolveRatePrintsClosedForm) {
  auto dir = scratch("solve");
  Result r = run("solve-rate --scenario all-zero --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("rate = 7.8125e-07"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "solve_rate.csv"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("solve-rate --scenario all-zero --bogus-flag 3").code, 1);
  EXPECT_EQ(run("solve-rate").code, 1);
  EXPECT_EQ(run("solve-rate --scenario nope").code, 1);
  EXPECT_EQ(run("solve-rate --scenario all-zero --r 1 --base-reward 5").code, 1);
}

TEST(Cli, ErrorMessagesNameTheProblem) {
  auto dir = scratch("errors");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"players": [{"groups": [{"rigs": -2, "start_time_normalized": 0}]}]})";
  Result bad = run("solve-rate --config " + (dir / "bad.json").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("players[0].groups[0].rigs"), std::string::npos) << bad.out;
  std::ofstream(dir / "late.json") << R"({"players": [{"groups": [{"rigs": 2, "start_time_normalized": 1.5}]}]})";
  Result late = run("solve-rate --config " + (dir / "late.json").string());
  EXPECT_EQ(late.code, 1);
  EXPECT_NE(late.out.find("infeasible"), std::string::npos) << late.out;
}

TEST(Cli, FlagsOverrideConfig) {
  auto dir = scratch("override");
  Result r = run("utility --config " + kConfigs + "/mixed_size_1.json --r 0.5 --setting LowOpex --out-dir " +
                 dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_DOUBLE_EQ(m["parameters"]["params"]["base_reward"].get<double>(), 5000.0);
  EXPECT_DOUBLE_EQ(m["parameters"]["params"]["opex_rate"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(m["parameters"]["params"]["capex_rate"].get<double>(), 0.02);
  // explicit rate beats the preset
  Result r2 = run("utility --config " + kConfigs + "/mixed_size_1.json --setting LowOpex --opex-rate 0.5 --out-dir " +
                  dir.string());
  ASSERT_EQ(r2.code, 0) << r2.out;
  m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_DOUBLE_EQ(m["parameters"]["params"]["opex_rate"].get<double>(), 0.5);
}

TEST(Cli, EquilibriumWritesScheduleAndTrace) {
  auto dir = scratch("equilibrium");
  Result r = run("equilibrium --config " + kConfigs + "/mixed_size_1.json --seed 7 --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::string csv = slurp(dir / "equilibrium.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "player,group,rigs,start_normalized,utility,normalized_utility");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_TRUE(fs::exists(dir / "trace.csv"));
}

TEST(Cli, NonConvergenceExitsTwoWithPartialOutput) {
  auto dir = scratch("noconv");
  // holding the rate fixed during a sweep cycles on this game
  Result r = run("equilibrium --scenario mixed-size-1 --lambda-mode fixed --out-dir " + dir.string());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_TRUE(fs::exists(dir / "equilibrium.csv"));
  EXPECT_NE(r.out.find("NOT converged"), std::string::npos);
}

TEST(Cli, ManifestReplayReproducesOutputs) {
  auto a = scratch("replay_a");
  auto b = scratch("replay_b");
  Result first = run("sweep --players 2 4 --settings MidOC --r 0.5 2 --seed 11 --threads 2 --out-dir " + a.string());
  ASSERT_EQ(first.code, 0) << first.out;
  Result again = run("--replay " + (a / "manifest.json").string() + " --out-dir " + b.string());
  ASSERT_EQ(again.code, 0) << again.out;
  EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
  EXPECT_EQ(slurp(a / "coalition.csv"), slurp(b / "coalition.csv"));
  auto m = nlohmann::json::parse(slurp(b / "manifest.json"));
  EXPECT_EQ(m["seed"].get<int>(), 11);
  EXPECT_EQ(m["subcommand"].get<std::string>(), "sweep");
}

TEST(Cli, SimulateAndBestResponse) {
  auto dir = scratch("sim");
  Result s = run("simulate --scenario split-gap --setting MidOC --r 1 --blocks 2000 --replications 2 --out-dir " +
                 dir.string());
  EXPECT_EQ(s.code, 0) << s.out;
  EXPECT_TRUE(fs::exists(dir / "simulate.csv"));
  Result b = run("best-response --scenario opponents-3 --player 0 --out-dir " + dir.string());
  EXPECT_EQ(b.code, 0) << b.out;
  EXPECT_TRUE(fs::exists(dir / "best_response.csv"));
  Result c = run("utility --scenario opponents-1 --curve-player 0 --curve-points 11 --out-dir " + dir.string());
  EXPECT_EQ(c.code, 0) << c.out;
  std::string curve = slurp(dir / "utility_curve.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 12);
}

TEST(Cli, FeeFit) {
  auto dir = scratch("fee");
  fs::create_directories(dir);
  std::ofstream(dir / "fees.csv") << "timestamp_seconds,fees_total\n0,5\n10,25\n20,45\n30,3\n40,23\n";
  Result r = run("fee-fit --input " + (dir / "fees.csv").string() + " --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("2 windows"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mean slope 2"), std::string::npos) << r.out;
  EXPECT_EQ(run("fee-fit --input /nonexistent.csv --out-dir " + dir.string()).code, 1);
}

TEST(Cli, MinBrrAndBitcoin) {
  auto dir = scratch("brr");
  Result r = run("min-brr --settings LowOpex --players 2 4 --x 0.05 --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  std::string csv = slurp(dir / "min_brr.csv");
  EXPECT_NE(csv.find("LowOpex,2,0.05,0"), std::string::npos) << csv;
  Result b = run("bitcoin-case --miners 2 --out-dir " + dir.string());
  EXPECT_EQ(b.code, 0) << b.out;
  EXPECT_NE(b.out.find("MidOC"), std::string::npos) << b.out;
}

TEST(Cli, ValidateSubsetPasses) {
  auto dir = scratch("validate");
  Result r = run("validate --only pdf-normalization --only difficulty-closed-forms --out-dir " + dir.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS pdf-normalization"), std::string::npos);
  EXPECT_EQ(run("validate --only no-such-criterion --out-dir " + dir.string()).code, 1);
}
