/*
 * Copyright 2026 The gibbs-ibp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("gibbs_ibp_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Exit status of the tool; output goes to log.txt in the test directory.
  int run(const std::string& args) const {
    const std::string cmd = std::string(GIBBS_IBP_CLI) + " " + args + " > " + (dir_ / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out(const std::string& name) const { return "--out-dir " + (dir_ / name).string(); }

  std::string read(const std::string& path) const {
    std::ifstream in(dir_ / path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::vector<std::vector<std::string>> csv(const std::string& path) const {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read(path));
    for (std::string line; std::getline(in, line);) {
      // Commas inside double quotes do not split; the quotes are kept.
      std::vector<std::string> cells(1);
      bool quoted = false;
      for (char c : line) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
          cells.emplace_back();
        } else {
          cells.back() += c;
        }
      }
      rows.push_back(cells);
    }
    return rows;
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateIsDeterministic) {
  ASSERT_EQ(run("simulate --model py --alpha 0.5 --theta 1 --gamma 3 --n 20 --seed 7 " + out("a")), 0);
  ASSERT_EQ(run("simulate --model py --alpha 0.5 --theta 1 --gamma 3 --n 20 --seed 7 " + out("b")), 0);
  ASSERT_EQ(run("simulate --model py --alpha 0.5 --theta 1 --gamma 3 --n 20 --seed 8 " + out("c")), 0);
  EXPECT_EQ(read("a/allocation.csv"), read("b/allocation.csv"));
  EXPECT_EQ(read("a/statistics.csv"), read("b/statistics.csv"));
  EXPECT_NE(read("a/allocation.csv"), read("c/allocation.csv"));
  const auto stats = csv("a/statistics.csv");
  ASSERT_EQ(stats.size(), 21u);
  EXPECT_EQ(stats[0], (std::vector<std::string>{"j", "K_j", "multiplicity"}));
  const auto manifest = nlohmann::json::parse(read("a/manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "simulate");
  EXPECT_EQ(manifest["seed"], 7);
}

TEST_F(CliTest, ConfigReplayReproducesOutput) {
  ASSERT_EQ(run("simulate --model ngg --alpha 0.4 --beta 2 --mc-samples 20000 --gamma 2 --n 15 --seed 3 " + out("a")),
            0);
  ASSERT_EQ(run("--config " + (dir_ / "a/run.ini").string() + " " + out("b")), 0);
  EXPECT_EQ(read("a/allocation.csv"), read("b/allocation.csv"));
  EXPECT_EQ(read("a/statistics.csv"), read("b/statistics.csv"));
}

TEST_F(CliTest, ZeroMassGivesHeaderOnly) {
  ASSERT_EQ(run("simulate --gamma 0 --n 4 " + out("a")), 0);
  EXPECT_EQ(read("a/allocation.csv"), "customer\n");
}

TEST_F(CliTest, DirichletFeatureCountAveragesHarmonicSum) {
  double total = 0.0;
  const int seeds = 300;
  for (int s = 1; s <= seeds; ++s) {
    ASSERT_EQ(run("simulate --model dp --theta 1 --gamma 1 --n 3 --seed " + std::to_string(s) + " " + out("a")), 0);
    total += std::stod(csv("a/statistics.csv").back()[1]);
  }
  // K_3 ~ Poisson(11/6).
  EXPECT_NEAR(total / seeds, 11.0 / 6.0, 4.0 * std::sqrt(11.0 / 6.0 / seeds));
}

TEST_F(CliTest, PrimitivesTable) {
  ASSERT_EQ(run("primitives --model py --alpha 0.5 --theta 1 --n 5 " + out("py")), 0);
  const auto py = csv("py/primitives.csv");
  EXPECT_EQ(py[0], (std::vector<std::string>{"m", "g10", "g11", "s", "gs1"}));
  ASSERT_EQ(py.size(), 6u);
  EXPECT_EQ(py[1][1], "nan");
  EXPECT_NEAR(std::stod(py[2][1]), 0.5, 1e-14);
  EXPECT_NEAR(std::stod(py[2][2]), 0.75, 1e-14);
  ASSERT_EQ(run("primitives --model dp --theta 1 --n 30 " + out("dp")), 0);
  const auto dp = csv("dp/primitives.csv");
  for (std::size_t m = 0; m < 30; ++m) EXPECT_NEAR(std::stod(dp[m + 1][2]), 1.0 / static_cast<double>(m + 1), 1e-13);
}

TEST_F(CliTest, StatsTrajectories) {
  ASSERT_EQ(run("stats --models dp:1 py:0.5:1 --gamma 2 --n-max 10000 " + out("a")), 0);
  const auto rows = csv("a/stats.csv");
  ASSERT_EQ(rows.size(), 1u + 2u * 10000u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"model", "n", "expected_K", "expected_K1", "scaled_K", "limit"}));
  double harmonic = 0.0;
  for (std::size_t n = 1; n <= 100; ++n) {
    harmonic += 1.0 / static_cast<double>(n);
    EXPECT_NEAR(std::stod(rows[n][2]), 2.0 * harmonic, 1e-10);
  }
  // PY(1/2, 1): E[K_n] / (gamma sqrt(n)) -> 4 / sqrt(pi) = 2.2568.
  EXPECT_NEAR(std::stod(rows.back()[4]), 2.2568, 0.05 * 2.2568);
  ASSERT_EQ(run("stats --n-max 1 " + out("b")), 0);
  EXPECT_EQ(csv("b/stats.csv").size(), 2u);
  EXPECT_EQ(run("stats --models py:0.5 " + out("c")), 2);
}

TEST_F(CliTest, CalibratedStatsShowHeavierNggTail) {
  ASSERT_EQ(run("stats --calibrated --n-max 5000 " + out("a")), 0);
  double py = 0.0, ngg = 0.0, py50 = 0.0, ngg50 = 0.0;
  for (const auto& row : csv("a/stats.csv")) {
    if (row[1] == "5000" && row[0].rfind("\"py", 0) == 0) py = std::stod(row[2]);
    if (row[1] == "5000" && row[0].rfind("\"ngg", 0) == 0) ngg = std::stod(row[2]);
    if (row[1] == "50" && row[0].rfind("\"py", 0) == 0) py50 = std::stod(row[2]);
    if (row[1] == "50" && row[0].rfind("\"ngg", 0) == 0) ngg50 = std::stod(row[2]);
  }
  EXPECT_NEAR(py50, 25.0, 0.05);
  EXPECT_NEAR(ngg50, 25.0, 0.05);
  EXPECT_GT(ngg, py);
}

TEST_F(CliTest, Calibrate) {
  ASSERT_EQ(run("calibrate --model py --alpha 0.5 --target 25 " + out("a")), 0);
  const auto j = nlohmann::json::parse(read("a/calibration.json"));
  EXPECT_NEAR(j["achieved"].get<double>(), 25.0, 0.05);
  EXPECT_EQ(j["parameter_name"], "theta");
  ASSERT_EQ(run("calibrate --model py --alpha 0.5 --target 25 " + out("b")), 0);
  EXPECT_EQ(read("a/calibration.json"), read("b/calibration.json"));
  EXPECT_EQ(run("calibrate --model py --alpha 0.5 --target 80 " + out("c")), 2);
  EXPECT_NE(read("log.txt").find("target"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run("simulate --no-such-flag"), 2);
  EXPECT_EQ(run("simulate --model gamma"), 2);
  EXPECT_EQ(run("simulate --model py --alpha 1.5 " + out("a")), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("fit --data " + (dir_ / "missing.csv").string() + " " + out("a")), 2);
  EXPECT_NE(read("log.txt").find("missing.csv"), std::string::npos);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(CliTest, NumericFailureExitCode) {
  {
    std::ofstream data(dir_ / "nan.csv");
    data << "y1,y2\n1,nan\n0.5,2\n3,1\n";
  }
  EXPECT_EQ(run("fit --data " + (dir_ / "nan.csv").string() + " --iterations 2 " + out("a")), 3);
}

TEST_F(CliTest, SynthesizeThenFit) {
  ASSERT_EQ(run("synthesize --n 20 --p 5 --singletons 2 --seed 4 " + out("data")), 0);
  EXPECT_EQ(csv("data/truth_allocation.csv")[0].size(), 5u);
  const std::string fit = "fit --model py --data " + (dir_ / "data/data.csv").string() +
                          " --iterations 30 --burn-in 10 --thin 5 --chains 2 --seed 9 ";
  ASSERT_EQ(run(fit + out("a")), 0);
  ASSERT_EQ(run(fit + out("b")), 0);
  EXPECT_EQ(read("a/samples.csv"), read("b/samples.csv"));
  // Two chains of iteration 0 plus 15, 20, 25, 30.
  EXPECT_EQ(csv("a/samples.csv").size(), 1u + 2u * 5u);
  const auto manifest = nlohmann::json::parse(read("a/manifest.json"));
  EXPECT_EQ(manifest["chain"]["chains"], 2);
  EXPECT_EQ(manifest["chain"]["n"], 20);
}

TEST_F(CliTest, GewekeTable) {
  ASSERT_EQ(run("geweke --rounds 2000 --batches 20 " + out("a")), 0);
  const auto rows = csv("a/geweke.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"statistic", "marginal_mean", "successive_mean", "z"}));
  EXPECT_GE(rows.size(), 7u);
  EXPECT_NE(read("log.txt").find("statistic"), std::string::npos);
}

TEST_F(CliTest, StructuralCurves) {
  ASSERT_EQ(run("structural --model py --alpha 0.5 --theta 1 --grid 3 --max-depth 2 " + out("a")), 0);
  const auto rows = csv("a/structural.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(std::stod(rows[2][1]), 0.6366197723675814, 1e-14);
  EXPECT_EQ(csv("a/superposition.csv").size(), 1u + 3u * 3u);
  ASSERT_EQ(run("structural --model nig --beta 1 --grid 3 " + out("b")), 0);
  EXPECT_FALSE(fs::exists(dir_ / "b/superposition.csv"));
}

TEST_F(CliTest, CacheDirectoryFromEnvironment) {
  const auto cache = dir_ / "cache";
  const std::string env = "GIBBS_IBP_CACHE_DIR=" + cache.string() + " ";
  const std::string cmd = env + GIBBS_IBP_CLI + " primitives --model ngg --alpha 0.5 --beta 1 --n 20 " + out("a") +
                          " > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(cache));
  EXPECT_FALSE(fs::is_empty(cache));
}

}  // namespace
