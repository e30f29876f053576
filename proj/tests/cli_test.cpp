#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Invocation {
  int status = -1;
  std::string out;
};

Invocation run(const std::string& args) {
  const std::string command = std::string(SIGDET_CLI_PATH) + " " + args + " 2>/dev/null";
  Invocation r;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string f;
  while (std::getline(in, f, ',')) out.push_back(f);
  return out;
}

const std::string kConfigs = SIGDET_SAMPLE_CONFIGS;

TEST(Cli, CounterexampleSinglePoint) {
  const Invocation r = run("counterexample --K 1.5 --r1 0.4 --mu 100");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "profile,closed_form,exact,abs_difference");
  EXPECT_NEAR(std::stod(fields(rows[1])[2]), 3.4, 1e-12);
  EXPECT_NEAR(std::stod(fields(rows[2])[2]), 3.3, 1e-12);
  EXPECT_NEAR(std::stod(fields(rows[3])[2]), 3.2, 1e-12);
  EXPECT_NEAR(std::stod(fields(rows[4])[1]), 0.1, 1e-12);
  EXPECT_NE(rows[5].find("strictly better"), std::string::npos);
}

TEST(Cli, CounterexampleGrid) {
  const Invocation r = run("counterexample --grid --steps 4");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  EXPECT_EQ(rows[0], "K,r1,cost_ex1,cost_ex2,cost_non_threshold,gap");
  EXPECT_EQ(rows.size(), 1u + 3u * 4u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto f = fields(rows[k]);
    const double r1 = std::stod(f[1]);
    if (r1 < 2.0 / 3.0) {
      EXPECT_GT(std::stod(f[5]), 0.0) << rows[k];
    }
  }
}

TEST(Cli, EvaluateBothMethods) {
  const Invocation r = run("evaluate --profiles ex1,non_threshold --method both --samples 20000 --seed 3");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "profile,method,expected_cost,operational,terminal,error_prob,stderr,samples");
  EXPECT_EQ(fields(rows[1])[1], "exact");
  EXPECT_EQ(fields(rows[2])[1], "mc");
  EXPECT_EQ(fields(rows[2])[7], "20000");
  // Same seed, same answer.
  EXPECT_EQ(run("evaluate --profiles ex1,non_threshold --method both --samples 20000 --seed 3").out, r.out);
}

TEST(Cli, EvaluatePresetProfiles) {
  const Invocation r = run("evaluate --preset counterexample --K 1.5 --r1 0.4 --profiles ex1,ex2,non_threshold");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(std::stod(fields(rows[1])[2]), 3.4, 1e-12);
  EXPECT_NEAR(std::stod(fields(rows[2])[2]), 3.3, 1e-12);
  EXPECT_NEAR(std::stod(fields(rows[3])[2]), 3.2, 1e-12);
}

TEST(Cli, MonteCarloReportsStandardError) {
  const Invocation r = run("evaluate --profiles non_threshold --method mc --samples 100000 --seed 7");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(std::stod(fields(rows[1])[6]), 0.0);
}

TEST(Cli, EvaluateSampleFiles) {
  const Invocation r = run("evaluate --scenario " + kConfigs + "/counterexample_full.json --profile " + kConfigs +
                           "/profile_threshold.json --profile " + kConfigs + "/profile_ex1.json");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(fields(rows[1])[0], "profile_threshold");
  EXPECT_NEAR(std::stod(fields(rows[1])[2]), 3.4, 1e-12);
  EXPECT_NEAR(std::stod(fields(rows[2])[2]), 3.4, 1e-12);
}

TEST(Cli, BestResponseWritesTables) {
  const auto dir = std::filesystem::temp_directory_path() / "sigdet_cli_test_out";
  std::filesystem::remove_all(dir);
  const Invocation r =
      run("best-response --profiles non_threshold --sensor 2 --oracle --iterate 2 --out-dir " + dir.string());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("info_state_sufficiency,pass"), std::string::npos);
  EXPECT_NE(r.out.find("interval_structure,pass"), std::string::npos);
  for (const char* name : {"value_table.csv", "structure.csv", "plot_series.csv"}) {
    std::ifstream in(dir / name);
    EXPECT_TRUE(in.good()) << name;
  }
  std::filesystem::remove_all(dir);
}

TEST(Cli, IterateTraceIsMonotone) {
  const Invocation r = run("iterate --scenario " + kConfigs + "/two_way.json --profiles default --rounds 3");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows[0], "step,round,sensor,cost");
  double previous = 1e300;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto f = fields(rows[k]);
    if (f.size() != 4) continue;
    const double cost = std::stod(f[3]);
    EXPECT_LE(cost, previous + 1e-12);
    previous = cost;
  }
}

TEST(Cli, SimulateFixedObservations) {
  const Invocation r = run("simulate --profiles ex1 --observations \"1,0,0;0,1,1\"");
  ASSERT_EQ(r.status, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  const auto f = fields(rows[1]);
  // Sensor 2 stops at t=1 with 0; sensor 1 repeats it at t=2.
  EXPECT_EQ(f[4], "2 1");
  EXPECT_EQ(f[5], "0 0");
}

TEST(Cli, ScenarioValidate) {
  EXPECT_EQ(run("scenario validate --scenario " + kConfigs + "/one_way_hedge.json").status, 0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("evaluate --method nope --profiles ex1").status, 2);
  EXPECT_EQ(run("counterexample --K 2.5").status, 2);
  EXPECT_EQ(run("evaluate --profiles ex7").status, 2);
  EXPECT_EQ(run("evaluate").status, 2);
  EXPECT_EQ(run("evaluate --profile /nonexistent/profile.json").status, 2);
  EXPECT_EQ(run("no-such-command").status, 2);
  EXPECT_EQ(run("scenario validate --scenario /nonexistent.json").status, 2);
  EXPECT_EQ(run("evaluate --scenario " + kConfigs + "/two_way.json --profiles ex1").status, 2);
}

TEST(Cli, BudgetExitsThree) {
  const auto path = std::filesystem::temp_directory_path() / "sigdet_cli_big.json";
  std::ofstream(path) << R"({"preset": "no-comm", "params": {"sensors": 4, "horizon": 8}})";
  EXPECT_EQ(run("evaluate --scenario " + path.string() + " --profiles default").status, 3);
  std::filesystem::remove(path);
}

TEST(Cli, OracleOverBudgetExitsThree) {
  EXPECT_EQ(run("best-response --profiles non_threshold --sensor 1 --oracle").status, 3);
}

TEST(Cli, VerifierFailureExitsFour) {
  // A negative tolerance makes every structural check fail.
  EXPECT_EQ(run("best-response --profiles ex1 --sensor 1 --tol -1").status, 4);
}

}  // namespace
