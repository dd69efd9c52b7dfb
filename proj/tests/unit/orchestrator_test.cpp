// Copyright 2026 The dosbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dosbench/orchestrator.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "dosbench/error.hpp"

namespace dosbench::orchestrator {
namespace {

namespace fs = std::filesystem;

class OrchestratorTest : public ::testing::Test {
 protected:
  fs::path dir_ = fs::temp_directory_path() / "dosbench_orchestrator_test";
  void SetUp() override {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static ExperimentConfig short_gnss(int repetitions, const std::string& preset) {
    ExperimentConfig c;
    c.scenario = Scenario::kGnss;
    c.repetitions = repetitions;
    c.gnss.preset = preset;
    c.gnss.time_scale = 60.0;
    return c;
  }
};

TEST(ConfigTest, JsonRoundTrip) {
  const auto j = nlohmann::json::parse(R"({
    "scenario": "gnss", "duration_s": 40, "attack_start_s": 15, "repetitions": 3, "seed": 7,
    "flood": {"target": "10.0.0.5:7", "attackers": 2, "rate_pps": 5000, "mode": "udp"},
    "gnss": {"preset": "double", "time_scale": 10},
    "workload": {"iterations": 200, "dt_ms": 20}
  })");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.scenario, Scenario::kGnss);
  EXPECT_DOUBLE_EQ(c.duration_s, 40.0);
  EXPECT_DOUBLE_EQ(c.attack_start_s, 15.0);
  EXPECT_EQ(c.flood.target, (Endpoint{"10.0.0.5", 7}));
  EXPECT_EQ(c.flood.attacker_count, 2);
  EXPECT_EQ(c.workload.iterations, 200u);
  EXPECT_DOUBLE_EQ(c.workload.mpc.dt, 0.020);
  const auto again = config_from_json(to_json(c));
  EXPECT_EQ(config_hash(again), config_hash(c));
  auto other = c;
  other.seed = 8;
  EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(ConfigTest, EffectiveScriptFollowsAttackStart) {
  ExperimentConfig c;
  c.attack_start_s = 14.0;
  c.gnss.preset = "single";
  EXPECT_DOUBLE_EQ(effective_script(c)->start_s, 14.0);
  c.gnss.preset = "none";
  EXPECT_FALSE(effective_script(c));
}

TEST(ConfigTest, Rejections) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"scenario": "mars"})")), Error);
  ExperimentConfig c;
  c.repetitions = 0;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.attack_start_s = 31.0;
  EXPECT_THROW(validate(c), Error);
}

TEST_F(OrchestratorTest, NullExperiment) {
  const auto report = run_gnss_experiment(short_gnss(1, "none"), RunMode::kScripted, dir_);
  ASSERT_EQ(report.gnss_runs.size(), 1u);
  ASSERT_TRUE(report.gnss_runs[0].ok);
  const double ref = *report.pooled_reference.mean_rate_hz;
  const double att = *report.pooled_attack.mean_rate_hz;
  EXPECT_NEAR(att / ref, 1.0, 0.1);
  EXPECT_TRUE(fs::exists(dir_ / "run-0" / "capture.anb"));
  EXPECT_TRUE(fs::exists(dir_ / "run-0" / "meta.json"));
  EXPECT_TRUE(fs::exists(dir_ / "report.json"));
  EXPECT_TRUE(fs::exists(dir_ / "plots" / "rates.csv"));
}

TEST_F(OrchestratorTest, ScriptedRunsAreReproducible) {
  const auto config = short_gnss(2, "single");
  run_gnss_experiment(config, RunMode::kScripted, dir_ / "a");
  run_gnss_experiment(config, RunMode::kScripted, dir_ / "b");
  for (int k = 0; k < 2; ++k) {
    const auto name = "run-" + std::to_string(k);
    const auto a = codec::decode_file(dir_ / "a" / name / "capture.anb").samples;
    const auto b = codec::decode_file(dir_ / "b" / name / "capture.anb").samples;
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
  }
}

TEST_F(OrchestratorTest, ReanalysisMatchesReport) {
  const auto config = short_gnss(2, "double");
  const auto report = run_gnss_experiment(config, RunMode::kScripted, dir_);
  const auto again = reanalyze_gnss(config, dir_);
  EXPECT_EQ(to_json(again.pooled_attack), to_json(report.pooled_attack));
  EXPECT_EQ(to_json(again.pooled_reference), to_json(report.pooled_reference));
  const auto stored = nlohmann::json::parse(std::ifstream(dir_ / "report.json"));
  EXPECT_EQ(stored["config_hash"], config_hash(config));
}

TEST_F(OrchestratorTest, UnreachableDeviceFailsExperiment) {
  auto config = short_gnss(2, "none");
  config.duration_s = 2.0;
  config.attack_start_s = 1.0;
  config.guard_s = 0.5;
  config.gnss.spawn_sim = false;
  config.gnss.device = {"127.0.0.1", 1};
  try {
    run_gnss_experiment(config, RunMode::kLive, dir_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExperiment);
  }
  const auto stored = nlohmann::json::parse(std::ifstream(dir_ / "report.json"));
  EXPECT_FALSE(stored["runs"][0]["ok"].get<bool>());
}

TEST_F(OrchestratorTest, AdStackSmoke) {
  ExperimentConfig config;
  config.scenario = Scenario::kAdStack;
  config.repetitions = 1;
  config.workload.iterations = 100;
  config.flood.target_rate_pps = 1000;
  const auto report = run_adstack_experiment(config, RunMode::kScripted, dir_);
  ASSERT_EQ(report.pairs.size(), 1u);
  EXPECT_EQ(report.pairs[0].reference.count, 100u);
  EXPECT_EQ(report.pairs[0].attack.count, 100u);
  ASSERT_TRUE(report.pairs[0].flood);
  EXPECT_GT(report.pairs[0].flood->packets_sent, 0u);
  EXPECT_TRUE(fs::exists(dir_ / "run-0" / "reference.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "run-0" / "attack.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "plots" / "latency_attack_hist.csv"));
}

// Runs in a forked child that drops to an unprivileged uid when started as
// root, so the raw socket open fails for real.
void run_unprivileged_raw_flood(const fs::path& dir) {
  if (::geteuid() == 0 && ::setresuid(65534, 65534, 65534) != 0) std::_Exit(2);
  ExperimentConfig config;
  config.scenario = Scenario::kAdStack;
  config.repetitions = 1;
  config.workload.iterations = 50;
  config.flood.target_rate_pps = 1000;
  config.flood.transport_mode = forge::TransportMode::kRawIcmp;
  const auto report = run_adstack_experiment(config, RunMode::kLive, dir);
  const bool fell_back = !report.warnings.empty() && report.pairs.size() == 1 &&
                         report.pairs[0].flood && report.pairs[0].flood->packets_sent > 0;
  std::_Exit(fell_back ? 0 : 1);
}

TEST_F(OrchestratorTest, RawModeFallsBackWhenUnprivileged) {
  const fs::path out = dir_ / "unprivileged";
  fs::create_directories(out);
  fs::permissions(dir_, fs::perms::all);
  fs::permissions(out, fs::perms::all);
  EXPECT_EXIT(run_unprivileged_raw_flood(out), ::testing::ExitedWithCode(0), "");
}

}  // namespace
}  // namespace dosbench::orchestrator
