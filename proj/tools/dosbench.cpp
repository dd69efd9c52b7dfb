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

// dosbench: command-line front end for the flood, workload, device
// simulator, recorder, analysis and experiment orchestration.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "dosbench/control_workload.hpp"
#include "dosbench/device_sim.hpp"
#include "dosbench/error.hpp"
#include "dosbench/orchestrator.hpp"
#include "dosbench/packet_forge.hpp"
#include "dosbench/stream_codec.hpp"
#include "dosbench/timing_analysis.hpp"

namespace fs = std::filesystem;
using namespace dosbench;

namespace {

// SIGINT/SIGTERM are blocked in every thread and collected by a dedicated
// waiter, which turns them into a stop request.
class SignalStop {
 public:
  SignalStop() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    sigaddset(&set_, SIGUSR1);  // internal wake-up at shutdown
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    waiter_ = std::jthread([this] {
      int sig = 0;
      if (sigwait(&set_, &sig) == 0 && sig != SIGUSR1) {
        spdlog::info("signal {} received, stopping", sig);
        source_.request_stop();
      }
    });
  }
  ~SignalStop() {
    // Wake the waiter so it can exit.
    pthread_kill(waiter_.native_handle(), SIGUSR1);
  }

  std::stop_token token() const { return source_.get_token(); }

 private:
  sigset_t set_{};
  std::stop_source source_;
  std::jthread waiter_;
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void write_plot_data(const fs::path& dir, const std::vector<SolutionSample>& samples,
                     const analysis::CaptureAnalysis& result) {
  fs::create_directories(dir);
  analysis::write_increments_csv(dir / "increments.csv", analysis::to_timing_series(samples),
                                 result.t0_us);
  analysis::write_positions_csv(dir / "positions.csv", samples);
}

}  // namespace

int main(int argc, char** argv) {
  SignalStop signals;

  CLI::App app{"DoS timing benchmark for networked control and GNSS/INS streams"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // flood
  auto* flood_cmd = app.add_subcommand("flood", "Send an ICMP echo flood");
  forge::FloodConfig flood_config;
  std::string flood_target = "127.0.0.1:9";
  std::string flood_mode = "udp";
  flood_cmd->add_option("--target", flood_target, "host[:port]")->capture_default_str();
  flood_cmd->add_option("--rate", flood_config.target_rate_pps, "Aggregate packets per second")
      ->capture_default_str();
  flood_cmd->add_option("--attackers", flood_config.attacker_count, "Concurrent senders")
      ->capture_default_str();
  flood_cmd->add_option("--duration", flood_config.duration_s, "Seconds")->capture_default_str();
  flood_cmd->add_option("--payload-len", flood_config.payload_len, "Echo payload bytes")
      ->capture_default_str();
  flood_cmd->add_option("--mode", flood_mode, "icmp or udp")
      ->check(CLI::IsMember({"icmp", "udp"}))
      ->capture_default_str();

  // workload
  auto* workload_cmd = app.add_subcommand("workload", "Run the MPC control-loop benchmark");
  workload::WorkloadConfig workload_config;
  double dt_ms = workload_config.mpc.dt * 1e3;
  std::string workload_out;
  workload_cmd->add_option("--iterations", workload_config.iterations)->capture_default_str();
  workload_cmd->add_option("--dt-ms", dt_ms, "Control period in ms")->capture_default_str();
  workload_cmd->add_option("--horizon", workload_config.mpc.horizon)->capture_default_str();
  workload_cmd->add_option("--out", workload_out, "Latency CSV")->required();

  // device-sim
  auto* sim_cmd = app.add_subcommand("device-sim", "Serve simulated GNSS/INS solutions over TCP");
  std::string sim_listen = "127.0.0.1";
  std::uint16_t sim_port = device::kDefaultPort;
  double sim_duration = 30.0;
  std::string sim_script;
  std::string sim_preset = "none";
  std::uint64_t sim_seed = 1;
  device::StreamOptions sim_options;
  sim_cmd->add_option("--listen", sim_listen, "Bind address")->capture_default_str();
  sim_cmd->add_option("--port", sim_port)->capture_default_str();
  sim_cmd->add_option("--duration", sim_duration, "Simulated seconds")->capture_default_str();
  auto* script_opt = sim_cmd->add_option("--script", sim_script, "DegradationScript JSON file");
  sim_cmd->add_option("--preset", sim_preset)
      ->check(CLI::IsMember({"none", "single", "double"}))
      ->excludes(script_opt)
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed)->capture_default_str();
  sim_cmd->add_option("--time-scale", sim_options.time_scale, "Simulated seconds per wall second")
      ->capture_default_str();
  sim_cmd->add_flag("--live-clock", sim_options.live_clock,
                    "Stamp system time from the host clock at emission");

  // record
  auto* record_cmd = app.add_subcommand("record", "Record a device stream to an .anb file");
  std::string record_endpoint = "127.0.0.1:6001";
  std::string record_out;
  std::string record_meta;
  double record_duration = 30.0;
  std::optional<std::uint64_t> record_tow_origin;
  record_cmd->add_option("--endpoint", record_endpoint, "host[:port]")->capture_default_str();
  record_cmd->add_option("--out", record_out, "Capture file")->required();
  record_cmd->add_option("--meta", record_meta, "Sidecar JSON (default: <out>.json)");
  record_cmd->add_option("--duration", record_duration, "Seconds")->capture_default_str();
  record_cmd->add_option("--tow-origin-us", record_tow_origin, "tow of run start, if known");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Timing metrics of a recorded capture");
  std::string analyze_capture;
  std::string analyze_meta;
  double attack_at = 10.0;
  double analyze_duration = 30.0;
  double guard = 2.0;
  std::string analyze_out;
  std::string analyze_plots;
  analyze_cmd->add_option("--capture", analyze_capture)->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--meta", analyze_meta)->check(CLI::ExistingFile);
  analyze_cmd->add_option("--attack-at", attack_at, "Attack start, run-relative s")
      ->capture_default_str();
  analyze_cmd->add_option("--duration", analyze_duration, "Run length, s")->capture_default_str();
  analyze_cmd->add_option("--guard", guard, "Discarded band around the attack start, s")
      ->capture_default_str();
  analyze_cmd->add_option("--out", analyze_out)->required();
  analyze_cmd->add_option("--emit-plot-data", analyze_plots, "Directory for CSV plot data");

  // analyze-latency
  auto* latency_cmd = app.add_subcommand("analyze-latency", "Statistics of a workload latency log");
  std::string latency_log;
  std::string latency_out;
  std::string latency_plots;
  latency_cmd->add_option("--log", latency_log)->required()->check(CLI::ExistingFile);
  latency_cmd->add_option("--out", latency_out)->required();
  latency_cmd->add_option("--emit-plot-data", latency_plots, "Directory for CSV plot data");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a repeated experiment from a JSON config");
  std::string run_config;
  std::string run_out;
  bool live = false;
  bool scripted = false;
  std::optional<int> run_repetitions;
  std::optional<double> run_duration;
  std::optional<double> run_attack_at;
  std::optional<std::uint64_t> run_seed;
  std::optional<double> run_time_scale;
  run_cmd->add_option("--config", run_config)->required()->check(CLI::ExistingFile);
  auto* live_flag = run_cmd->add_flag("--live", live, "Real flood against a live target");
  run_cmd->add_flag("--scripted", scripted, "Simulated degradation (default)")->excludes(live_flag);
  run_cmd->add_option("--out", run_out)->required();
  run_cmd->add_option("--repetitions", run_repetitions);
  run_cmd->add_option("--duration", run_duration);
  run_cmd->add_option("--attack-at", run_attack_at);
  run_cmd->add_option("--seed", run_seed);
  run_cmd->add_option("--time-scale", run_time_scale);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  const auto stop = signals.token();

  try {
    if (*flood_cmd) {
      flood_config.target = parse_endpoint(flood_target, 9);
      flood_config.transport_mode = forge::parse_transport_mode(flood_mode);
      const auto stats = forge::flood(flood_config, stop);
      nlohmann::json j{{"packets_sent", stats.packets_sent},
                       {"achieved_rate_pps", stats.achieved_rate_pps},
                       {"offered_rate_pps", stats.offered_rate_pps},
                       {"send_errors", stats.send_errors},
                       {"wall_duration_s", stats.wall_duration_s},
                       {"per_sender_sent", stats.per_sender_sent}};
      std::cout << j.dump(2) << '\n';
    } else if (*workload_cmd) {
      workload_config.mpc.dt = dt_ms * 1e-3;
      std::ofstream out(workload_out);
      if (!out) throw Error(ErrorCode::kIo, "cannot open " + workload_out);
      const auto run = workload::run_benchmark(workload_config, &out);
      if (auto summary = analysis::latency_summary(run.records)) {
        spdlog::info("{} iterations, median {:.1f} us, p99 {:.1f} us", summary->count,
                     summary->median_s * 1e6, summary->p99_s * 1e6);
      }
    } else if (*sim_cmd) {
      std::optional<device::DegradationScript> script =
          sim_script.empty() ? device::preset(sim_preset)
                             : std::optional(device::load_script(sim_script));
      device::DeviceConfig config;
      device::DeviceServer server({sim_listen, sim_port});
      spdlog::info("device-sim listening on {}:{}", sim_listen, server.port());
      const auto summary = server.run(config, script, sim_seed, sim_duration, sim_options, stop);
      spdlog::info("epochs {} emitted {} dropped {}+{} sent {} overflows {}",
                   summary.counters.epochs, summary.counters.emitted,
                   summary.counters.dropped_random, summary.counters.dropped_outage,
                   summary.frames_sent, summary.queue_overflows);
    } else if (*record_cmd) {
      const Endpoint endpoint = parse_endpoint(record_endpoint, device::kDefaultPort);
      const auto summary = codec::record(endpoint, record_out, record_duration, stop);
      codec::CaptureMeta meta;
      meta.start_wall_us = summary.start_wall_us;
      meta.endpoint = endpoint;
      meta.duration_s = summary.duration_s;
      meta.bytes = summary.bytes;
      meta.tow_origin_us = record_tow_origin;
      codec::write_capture_meta(record_meta.empty() ? record_out + ".json" : record_meta, meta);
      spdlog::info("recorded {} bytes in {:.2f} s, {} gaps", summary.bytes, summary.duration_s,
                   summary.gaps.size());
    } else if (*analyze_cmd) {
      std::optional<std::uint64_t> tow_origin;
      if (!analyze_meta.empty()) tow_origin = codec::read_capture_meta(analyze_meta).tow_origin_us;
      const auto window = analysis::PhaseWindow::around_attack(attack_at, analyze_duration, guard);
      const auto decoded = codec::decode_file(analyze_capture);
      auto result = analysis::analyze_samples(decoded.samples, window, tow_origin);
      result.diagnostics = decoded.diagnostics;
      write_json(analyze_out, analysis::to_json(result));
      if (!analyze_plots.empty()) write_plot_data(analyze_plots, decoded.samples, result);
    } else if (*latency_cmd) {
      std::ifstream in(latency_log);
      const auto records = workload::read_latency_csv(in);
      const auto summary = analysis::latency_summary(records);
      write_json(latency_out, summary ? analysis::to_json(*summary) : nlohmann::json());
      if (!latency_plots.empty() && summary) {
        fs::create_directories(latency_plots);
        analysis::write_histogram_csv(fs::path(latency_plots) / "latency_hist.csv",
                                      summary->histogram);
      }
    } else if (*run_cmd) {
      auto config = orchestrator::load_config(run_config);
      if (run_repetitions) config.repetitions = *run_repetitions;
      if (run_duration) config.duration_s = *run_duration;
      if (run_attack_at) config.attack_start_s = *run_attack_at;
      if (run_seed) config.seed = *run_seed;
      if (run_time_scale) config.gnss.time_scale = *run_time_scale;
      const auto mode = live ? orchestrator::RunMode::kLive : orchestrator::RunMode::kScripted;
      const auto report = orchestrator::run_experiment(config, mode, run_out);
      for (const auto& w : report.warnings) spdlog::warn("{}", w);
      spdlog::info("report written to {}", (fs::path(run_out) / "report.json").string());
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
