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

// Experiment runner: repetitions, timed attack start, phase bookkeeping,
// pooled reporting.

#ifndef DOSBENCH_ORCHESTRATOR_HPP_
#define DOSBENCH_ORCHESTRATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dosbench/control_workload.hpp"
#include "dosbench/device_sim.hpp"
#include "dosbench/packet_forge.hpp"
#include "dosbench/stream_codec.hpp"
#include "dosbench/timing_analysis.hpp"

namespace dosbench::orchestrator {

enum class Scenario { kAdStack, kGnss };
enum class RunMode { kScripted, kLive };

std::string_view to_string(Scenario scenario) noexcept;
std::string_view to_string(RunMode mode) noexcept;

struct GnssTarget {
  // Live mode without spawn_sim: the device to capture from.
  Endpoint device{"127.0.0.1", device::kDefaultPort};
  // Live mode: run an in-process device simulator on `device` (port 0 picks
  // a free port) and flood it.
  bool spawn_sim = true;
  // Scripted mode: named preset unless `script` is given.
  std::string preset = "single";
  std::optional<device::DegradationScript> script;
  // Scripted mode runs this many simulated seconds per wall second.
  double time_scale = 30.0;
  device::DeviceConfig device_config;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kGnss;
  double duration_s = 30.0;
  double attack_start_s = 10.0;
  int repetitions = 10;
  std::uint64_t seed = 1;
  // Half-width of the discarded band around the attack start.
  double guard_s = 2.0;
  forge::FloodConfig flood;
  GnssTarget gnss;
  workload::WorkloadConfig workload;
};

void validate(const ExperimentConfig& config);

/// Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);
// FNV-1a 64 of the canonical JSON form, hex.
std::string config_hash(const ExperimentConfig& config);

// The degradation script a scripted GNSS run will use (nullopt for "none").
std::optional<device::DegradationScript> effective_script(const ExperimentConfig& config);

struct GnssRun {
  int index = 0;
  bool ok = false;
  std::string error;
  std::uint64_t seed = 0;
  codec::CaptureSummary capture;
  codec::CaptureMeta meta;
  std::optional<device::RunSummary> device;
  std::optional<forge::FloodStats> flood;
  analysis::CaptureAnalysis analysis;
};

struct AdStackPair {
  int index = 0;
  analysis::LatencySummary reference;
  analysis::LatencySummary attack;
  std::optional<forge::FloodStats> flood;
};

struct AggregateReport {
  Scenario scenario = Scenario::kGnss;
  RunMode mode = RunMode::kScripted;
  std::string config_hash;
  std::int64_t started_wall_us = 0;
  std::int64_t finished_wall_us = 0;
  std::vector<std::string> warnings;

  // GNSS scenario.
  std::vector<GnssRun> gnss_runs;
  analysis::PhaseMetrics pooled_reference;
  analysis::PhaseMetrics pooled_attack;

  // AD-stack scenario.
  std::vector<AdStackPair> pairs;
  std::optional<analysis::LatencySummary> pooled_reference_latency;
  std::optional<analysis::LatencySummary> pooled_attack_latency;
};

nlohmann::json to_json(const AggregateReport& report);

/// Per repetition: capture from t = 0, degrade (scripted) or flood (live)
/// from attack_start_s, stop at duration_s, then decode and analyze. Writes
/// run-<k>/capture.anb, run-<k>/meta.json, report.json and plots/ under
/// out_dir. A failed capture marks that run failed; if every run fails,
/// throws Error(kExperiment).
AggregateReport run_gnss_experiment(const ExperimentConfig& config, RunMode mode,
                                    const std::filesystem::path& out_dir);

/// Paired control-workload runs, reference then under flood, repeated
/// config.repetitions times. Falls back to udp mode (with a warning) when
/// raw ICMP is not permitted.
AggregateReport run_adstack_experiment(const ExperimentConfig& config, RunMode mode,
                                       const std::filesystem::path& out_dir);

AggregateReport run_experiment(const ExperimentConfig& config, RunMode mode,
                               const std::filesystem::path& out_dir);

/// Rebuilds the GNSS pooled metrics purely from stored captures and
/// metadata in out_dir.
AggregateReport reanalyze_gnss(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace dosbench::orchestrator

#endif  // DOSBENCH_ORCHESTRATOR_HPP_
