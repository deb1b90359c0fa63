#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = bdar::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("bdar_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateWritesSummary) {
  const auto r = run({"simulate", "--n", "50", "--C", "1", "--d", "1", "--lambda", "0.05", "--steps", "2000000",
                      "--seed", "7", "--out", out("sim")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "sim" / "summary.json"));
  EXPECT_EQ(s.at("schema_version"), 1);
  EXPECT_EQ(s.at("zeta").size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "sim" / "snapshots.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "sim" / "phi.csv"));
}

TEST_F(CliTest, SameSeedGivesIdenticalFiles) {
  for (const char* name : {"a", "b"}) {
    const auto r = run({"simulate", "--n", "12", "--C", "2", "--d", "2", "--lambda", "0.5", "--steps", "200000",
                        "--seed", "3", "--dump-state", "--out", out(name)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* file : {"snapshots.csv", "phi.csv", "summary.csv", "final_state.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / file), slurp(dir_ / "b" / file)) << file;
  }
}

TEST_F(CliTest, MissingRequiredFlagIsUsageError) {
  const auto r = run({"simulate", "--C", "1", "--d", "1", "--lambda", "0.05", "--steps", "10"});
  EXPECT_EQ(r.code, bdar::cli::kUsage);
  EXPECT_NE(r.err.find("--n"), std::string::npos);
  EXPECT_EQ(run({}).code, bdar::cli::kUsage);
  EXPECT_EQ(run({"bogus"}).code, bdar::cli::kUsage);
  EXPECT_EQ(run({"simulate", "--n", "x"}).code, bdar::cli::kUsage);
}

TEST_F(CliTest, FixedpointRow) {
  const auto r = run({"fixedpoint", "--C", "1", "--d", "1", "--lambda", "0.0833333333333333333,0.05", "--out", out("fp")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "fp" / "summary.json"));
  ASSERT_EQ(s.at("rows").size(), 2u);
  EXPECT_NEAR(s.at("rows")[0].at("eta")[0].get<double>(), 0.911795257036132489, 1e-8);
  EXPECT_EQ(s.at("rows")[0].at("status"), "ok");
}

TEST_F(CliTest, FixedpointSweepConverges) {
  const auto r = run({"fixedpoint", "--C", "1", "--d", "1", "--lambda", "0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08",
                      "--out", out("fp")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "fp" / "summary.json"));
  for (const auto& row : s.at("rows")) EXPECT_LE(row.at("diameter").get<double>(), 1e-9);
}

TEST_F(CliTest, FixedpointMiddleRegimeFlagsOnly) {
  const auto r = run({"fixedpoint", "--C", "20", "--d", "1", "--lambda", "5", "--out", out("fp")});
  EXPECT_NE(r.code, bdar::cli::kUsage);
  EXPECT_TRUE(fs::exists(dir_ / "fp" / "fixedpoint.csv"));
}

TEST_F(CliTest, CoupleCoalescence) {
  const auto r = run({"couple", "--n", "10", "--C", "1", "--d", "1", "--lambda", "0.05", "--replicas", "100",
                      "--seed", "1", "--out", out("co")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "co" / "summary.json"));
  EXPECT_GE(s.at("coalesced_fraction").get<double>(), 0.9);
  const std::string csv = slurp(dir_ / "co" / "coalescence.csv");
  EXPECT_EQ(csv.rfind("replica,seed,hitting_time_or_censored\n", 0), 0u);
}

TEST_F(CliTest, CoupleAllCensoredFails) {
  const auto r = run({"couple", "--n", "10", "--C", "1", "--d", "1", "--lambda", "0.05", "--replicas", "3",
                      "--steps", "2", "--out", out("co")});
  EXPECT_EQ(r.code, bdar::cli::kExperimentFailure);
  EXPECT_NE(slurp(dir_ / "co" / "coalescence.csv").find("censored"), std::string::npos);
}

TEST_F(CliTest, CoupleContractionReportsFactor) {
  const auto r = run({"couple", "--mode", "contraction", "--n", "10", "--C", "1", "--d", "1", "--lambda", "0.05",
                      "--replicas", "500", "--out", out("ct")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "ct" / "summary.json"));
  EXPECT_NEAR(s.at("theoretical_factor").get<double>(), 0.991534, 1e-6);
}

TEST_F(CliTest, ZeroReplicasIsUsageError) {
  EXPECT_EQ(run({"couple", "--n", "10", "--C", "1", "--d", "1", "--lambda", "0.05", "--replicas", "0"}).code,
            bdar::cli::kUsage);
}

TEST_F(CliTest, OracleSmallAndRefused) {
  auto r = run({"oracle", "--n", "3", "--C", "1", "--d", "1", "--lambda", "0.05", "--compare-sim", "--steps",
                "100000", "--dump-p", "--out", out("or")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "or" / "oracle.json"));
  EXPECT_EQ(s.at("pi").size(), 14u);
  EXPECT_TRUE(s.contains("simulation"));
  EXPECT_TRUE(fs::exists(dir_ / "or" / "P.csv"));
  r = run({"oracle", "--n", "10", "--C", "1", "--d", "1", "--lambda", "0.05", "--out", out("big")});
  EXPECT_EQ(r.code, bdar::cli::kResourceGuard);
  EXPECT_NE(r.err.find("feasible states"), std::string::npos);
}

TEST_F(CliTest, OdeConvergesAndRejectsBadStep) {
  auto r = run({"ode", "--C", "1", "--d", "1", "--lambda", "0.0833333333333333333", "--xi0", "0,1", "--t-end", "200",
                "--dt", "0.001", "--out", out("ode")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "ode" / "summary.json"));
  EXPECT_LE(s.at("distance_to_eta_star").get<double>(), 1e-8);
  EXPECT_EQ(run({"ode", "--C", "1", "--d", "1", "--lambda", "0.1", "--dt", "-0.1"}).code, bdar::cli::kUsage);
  EXPECT_EQ(run({"ode", "--C", "1", "--d", "1", "--lambda", "0.1", "--xi0", "0.5,0.7"}).code, bdar::cli::kUsage);
}

TEST_F(CliTest, Concentration) {
  auto r = run({"concentration", "--n", "16", "--C", "1", "--d", "1", "--lambda", "0.05", "--replicas", "100",
                "--out", out("conc")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "conc" / "tails.csv"));
  EXPECT_EQ(run({"concentration", "--n", "16", "--C", "1", "--d", "1", "--lambda", "0.05", "--replicas", "50"}).code,
            bdar::cli::kUsage);
  EXPECT_EQ(run({"concentration", "--n", "16", "--C", "1", "--d", "1", "--lambda", "0.05", "--replicas", "100",
                 "--node", "17"})
                .code,
            bdar::cli::kUsage);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  {
    std::ofstream f(dir_ / "cfg.json");
    f << R"({"n": 3, "C": 1, "d": 1, "lambda": 0.05})";
  }
  auto r = run({"oracle", "--config", out("cfg.json"), "--C", "2", "--out", out("or")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(slurp(dir_ / "or" / "oracle.json"));
  EXPECT_EQ(s.at("settings").at("C"), 2);
  EXPECT_EQ(s.at("settings").at("n"), 3);
  EXPECT_EQ(s.at("states"), 85);
}

TEST(CliBinary, HelpExitsZero) {
  const std::string cmd = std::string(BDAR_TOOL_PATH) + " --help > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}
