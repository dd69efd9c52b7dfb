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

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "dosbench/error.hpp"

namespace dosbench::orchestrator {
namespace fs = std::filesystem;

namespace {

std::int64_t wall_now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

fs::path run_dir(const fs::path& out_dir, int k) { return out_dir / ("run-" + std::to_string(k)); }

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

// Sleeps for `seconds` unless stop is requested first; true if it slept fully.
bool sleep_or_stop(std::stop_token stop, double seconds) {
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  return !cv.wait_for(lock, stop, std::chrono::duration<double>(seconds), [] { return false; });
}

/// Runs a flood, retrying in udp mode if raw sockets are not permitted.
/// Notes go to `warnings`; returns nullopt if the flood could not start.
std::optional<forge::FloodStats> flood_with_fallback(forge::FloodConfig config,
                                                     std::stop_token stop,
                                                     std::vector<std::string>& warnings) {
  try {
    return forge::flood(config, stop);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kPrivilege) {
      warnings.push_back(std::string("flood failed: ") + e.what());
      return std::nullopt;
    }
    warnings.push_back("raw ICMP not permitted; flood fell back to udp mode");
    config.transport_mode = forge::TransportMode::kUdpFallback;
  }
  try {
    return forge::flood(config, stop);
  } catch (const Error& e) {
    warnings.push_back(std::string("flood failed: ") + e.what());
    return std::nullopt;
  }
}

nlohmann::json to_json(const forge::FloodStats& s) {
  return {{"packets_sent", s.packets_sent},
          {"achieved_rate_pps", s.achieved_rate_pps},
          {"offered_rate_pps", s.offered_rate_pps},
          {"send_errors", s.send_errors},
          {"wall_duration_s", s.wall_duration_s},
          {"per_sender_sent", s.per_sender_sent}};
}

nlohmann::json to_json(const codec::CaptureSummary& s) {
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& g : s.gaps) gaps.push_back({{"offset_s", g.offset_s}, {"duration_s", g.duration_s}});
  return {{"bytes", s.bytes},
          {"duration_s", s.duration_s},
          {"start_wall_us", s.start_wall_us},
          {"gaps", gaps},
          {"early_termination", s.early_termination}};
}

nlohmann::json to_json(const device::RunSummary& s) {
  return {{"epochs", s.counters.epochs},
          {"emitted", s.counters.emitted},
          {"dropped_random", s.counters.dropped_random},
          {"dropped_outage", s.counters.dropped_outage},
          {"frames_queued", s.frames_queued},
          {"queue_overflows", s.queue_overflows},
          {"frames_sent", s.frames_sent},
          {"clients_served", s.clients_served},
          {"disconnects", s.disconnects},
          {"wall_duration_s", s.wall_duration_s}};
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& value) {
  return value ? to_json(*value) : nlohmann::json();
}

analysis::PhaseWindow window_for(const ExperimentConfig& c) {
  return analysis::PhaseWindow::around_attack(c.attack_start_s, c.duration_s, c.guard_s);
}

// Decodes a stored capture, analyzes it and writes its plot data.
void analyze_run(GnssRun& run, const fs::path& capture, const analysis::PhaseWindow& window,
                 const fs::path& plots) {
  const auto decoded = codec::decode_file(capture);
  run.analysis = analysis::analyze_samples(decoded.samples, window, run.meta.tow_origin_us);
  run.analysis.diagnostics = decoded.diagnostics;
  const auto series = analysis::to_timing_series(decoded.samples);
  const std::string prefix = "run-" + std::to_string(run.index);
  analysis::write_increments_csv(plots / (prefix + "_increments.csv"), series, run.analysis.t0_us);
  analysis::write_positions_csv(plots / (prefix + "_positions.csv"), decoded.samples);
  run.ok = true;
}

GnssRun scripted_run(const ExperimentConfig& c, int k, const fs::path& dir, const fs::path& plots) {
  GnssRun run;
  run.index = k;
  run.seed = c.seed + static_cast<std::uint64_t>(k);
  const auto script = effective_script(c);

  device::DeviceServer server({"127.0.0.1", 0});
  device::StreamOptions options;
  options.time_scale = c.gnss.time_scale;
  options.wait_for_client = true;

  std::optional<device::RunSummary> summary;
  std::exception_ptr device_error;
  std::jthread device_thread([&](std::stop_token stop) {
    try {
      summary = server.run(c.gnss.device_config, script, run.seed, c.duration_s, options, stop);
    } catch (...) {
      device_error = std::current_exception();
    }
  });

  const Endpoint endpoint{"127.0.0.1", server.port()};
  const fs::path capture = dir / "capture.anb";
  // The simulator closes the stream at the end of the run; the extra wall
  // time only matters if it stalls.
  run.capture = codec::record(endpoint, capture, c.duration_s / c.gnss.time_scale + 5.0);
  device_thread.join();
  if (device_error) std::rethrow_exception(device_error);
  run.device = summary;

  run.meta.start_wall_us = run.capture.start_wall_us;
  run.meta.endpoint = endpoint;
  run.meta.duration_s = c.duration_s;
  run.meta.bytes = run.capture.bytes;
  run.meta.tow_origin_us = c.gnss.device_config.tow_origin_us;
  codec::write_capture_meta(dir / "meta.json", run.meta);

  analyze_run(run, capture, window_for(c), plots);
  return run;
}

GnssRun live_run(const ExperimentConfig& c, int k, const fs::path& dir, const fs::path& plots,
                 std::vector<std::string>& warnings) {
  GnssRun run;
  run.index = k;
  run.seed = c.seed + static_cast<std::uint64_t>(k);

  std::optional<device::DeviceServer> server;
  std::optional<device::RunSummary> summary;
  std::exception_ptr device_error;
  device::StreamOptions options;
  options.live_clock = true;
  options.wait_for_client = true;
  std::jthread device_thread;
  Endpoint endpoint = c.gnss.device;
  if (c.gnss.spawn_sim) {
    server.emplace(Endpoint{c.gnss.device.host, 0});
    endpoint = {c.gnss.device.host, server->port()};
    device_thread = std::jthread([&](std::stop_token stop) {
      try {
        summary = server->run(c.gnss.device_config, std::nullopt, run.seed, c.duration_s, options, stop);
      } catch (...) {
        device_error = std::current_exception();
      }
    });
  }

  std::vector<std::string> flood_warnings;
  std::optional<forge::FloodStats> flood_stats;
  std::jthread flood_thread([&](std::stop_token stop) {
    if (!sleep_or_stop(stop, c.attack_start_s)) return;
    forge::FloodConfig fc = c.flood;
    fc.duration_s = c.duration_s - c.attack_start_s;
    flood_stats = flood_with_fallback(fc, stop, flood_warnings);
  });

  const fs::path capture = dir / "capture.anb";
  try {
    run.capture = codec::record(endpoint, capture, c.duration_s);
  } catch (...) {
    flood_thread.request_stop();
    throw;
  }
  flood_thread.request_stop();
  flood_thread.join();
  if (device_thread.joinable()) device_thread.join();
  if (device_error) std::rethrow_exception(device_error);
  run.device = summary;
  run.flood = flood_stats;
  for (auto& w : flood_warnings) warnings.push_back("run-" + std::to_string(k) + ": " + w);

  run.meta.start_wall_us = run.capture.start_wall_us;
  run.meta.endpoint = endpoint;
  run.meta.duration_s = c.duration_s;
  run.meta.bytes = run.capture.bytes;
  if (c.gnss.spawn_sim) run.meta.tow_origin_us = c.gnss.device_config.tow_origin_us;
  codec::write_capture_meta(dir / "meta.json", run.meta);

  analyze_run(run, capture, window_for(c), plots);
  return run;
}

void pool_gnss(AggregateReport& report) {
  std::vector<analysis::TimingSeries> reference;
  std::vector<analysis::TimingSeries> attack;
  for (const auto& run : report.gnss_runs) {
    if (!run.ok) continue;
    reference.push_back(run.analysis.reference);
    attack.push_back(run.analysis.attack);
  }
  report.pooled_reference = analysis::pooled_phase_metrics(reference);
  report.pooled_attack = analysis::pooled_phase_metrics(attack);
}

void write_gnss_rates_csv(const fs::path& path, const AggregateReport& report) {
  std::ofstream out(path);
  out << "run,phase,samples,mean_rate_hz,longest_increment_s,dd_jitter_s\n";
  auto cell = [](const analysis::Metric& m) { return m ? std::to_string(*m) : std::string(); };
  auto row = [&](const std::string& run, const char* phase, const analysis::PhaseMetrics& m) {
    out << run << ',' << phase << ',' << m.samples << ',' << cell(m.mean_rate_hz) << ','
        << cell(m.longest_increment_s) << ',' << cell(m.dd_jitter_s) << '\n';
  };
  for (const auto& run : report.gnss_runs) {
    if (!run.ok) continue;
    row(std::to_string(run.index), "reference", run.analysis.reference_metrics);
    row(std::to_string(run.index), "attack", run.analysis.attack_metrics);
  }
  row("pooled", "reference", report.pooled_reference);
  row("pooled", "attack", report.pooled_attack);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(Scenario scenario) noexcept {
  return scenario == Scenario::kGnss ? "gnss" : "ad-stack";
}

std::string_view to_string(RunMode mode) noexcept {
  return mode == RunMode::kScripted ? "scripted" : "live";
}

void validate(const ExperimentConfig& c) {
  if (!(c.duration_s > 0.0)) throw Error(ErrorCode::kConfig, "duration_s must be > 0");
  if (!(c.attack_start_s < c.duration_s)) {
    throw Error(ErrorCode::kConfig, "attack_start_s must be before duration_s");
  }
  if (c.repetitions < 1) throw Error(ErrorCode::kConfig, "repetitions must be >= 1");
  if (!(c.gnss.time_scale > 0.0)) throw Error(ErrorCode::kConfig, "time_scale must be > 0");
  forge::validate(c.flood);
  if (c.scenario == Scenario::kGnss) {
    (void)window_for(c);
    device::validate(c.gnss.device_config.schedule);
    if (auto script = effective_script(c)) device::validate(*script, c.duration_s);
  } else if (c.workload.iterations < 1) {
    throw Error(ErrorCode::kConfig, "workload iterations must be >= 1");
  }
}

std::optional<device::DegradationScript> effective_script(const ExperimentConfig& c) {
  if (c.gnss.script) return c.gnss.script;
  auto script = device::preset(c.gnss.preset);
  if (script) script->start_s = c.attack_start_s;
  return script;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    const std::string scenario = j.value("scenario", std::string("gnss"));
    if (scenario == "gnss") {
      c.scenario = Scenario::kGnss;
    } else if (scenario == "ad-stack" || scenario == "adstack") {
      c.scenario = Scenario::kAdStack;
    } else {
      throw Error(ErrorCode::kConfig, "unknown scenario '" + scenario + "'");
    }
    c.duration_s = j.value("duration_s", c.duration_s);
    c.attack_start_s = j.value("attack_start_s", c.attack_start_s);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.seed = j.value("seed", c.seed);
    c.guard_s = j.value("guard_s", c.guard_s);

    if (j.contains("flood")) {
      const auto& f = j.at("flood");
      if (f.contains("target")) c.flood.target = parse_endpoint(f.at("target").get<std::string>(), 9);
      c.flood.attacker_count = f.value("attackers", c.flood.attacker_count);
      c.flood.target_rate_pps = f.value("rate_pps", c.flood.target_rate_pps);
      c.flood.payload_len = f.value("payload_len", c.flood.payload_len);
      c.flood.duration_s = f.value("duration_s", c.flood.duration_s);
      if (f.contains("mode")) c.flood.transport_mode = forge::parse_transport_mode(f.at("mode").get<std::string>());
    }
    if (j.contains("gnss")) {
      const auto& g = j.at("gnss");
      if (g.contains("device")) {
        c.gnss.device = parse_endpoint(g.at("device").get<std::string>(), device::kDefaultPort);
      }
      c.gnss.spawn_sim = g.value("spawn_sim", c.gnss.spawn_sim);
      c.gnss.preset = g.value("preset", c.gnss.preset);
      if (g.contains("script") && !g.at("script").is_null()) {
        c.gnss.script = device::script_from_json(g.at("script"));
      }
      c.gnss.time_scale = g.value("time_scale", c.gnss.time_scale);
      auto& dc = c.gnss.device_config;
      dc.schedule.nominal_rate_hz = g.value("nominal_rate_hz", dc.schedule.nominal_rate_hz);
      dc.schedule.imu_rate_hz = g.value("imu_rate_hz", dc.schedule.imu_rate_hz);
      dc.schedule.gnss_rate_hz = g.value("gnss_rate_hz", dc.schedule.gnss_rate_hz);
      dc.schedule.merge_window_s = g.value("merge_window_s", dc.schedule.merge_window_s);
      dc.schedule.spike_probability = g.value("spike_probability", dc.schedule.spike_probability);
      dc.schedule.spike_max_s = g.value("spike_max_s", dc.schedule.spike_max_s);
      dc.latency.mean_s = g.value("latency_mean_s", dc.latency.mean_s);
      dc.latency.spread_s = g.value("latency_spread_s", dc.latency.spread_s);
    }
    if (j.contains("workload")) {
      const auto& w = j.at("workload");
      c.workload.iterations = w.value("iterations", c.workload.iterations);
      c.workload.mpc.dt = w.value("dt_ms", c.workload.mpc.dt * 1e3) * 1e-3;
      c.workload.mpc.horizon = w.value("horizon", c.workload.mpc.horizon);
      c.workload.mpc.iterations = w.value("solver_iterations", c.workload.mpc.iterations);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad experiment config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const auto& dc = c.gnss.device_config;
  return {
      {"scenario", to_string(c.scenario)},
      {"duration_s", c.duration_s},
      {"attack_start_s", c.attack_start_s},
      {"repetitions", c.repetitions},
      {"seed", c.seed},
      {"guard_s", c.guard_s},
      {"flood",
       {{"target", c.flood.target.to_string()},
        {"attackers", c.flood.attacker_count},
        {"rate_pps", c.flood.target_rate_pps},
        {"payload_len", c.flood.payload_len},
        {"duration_s", c.flood.duration_s},
        {"mode", forge::to_string(c.flood.transport_mode)}}},
      {"gnss",
       {{"device", c.gnss.device.to_string()},
        {"spawn_sim", c.gnss.spawn_sim},
        {"preset", c.gnss.preset},
        {"script", c.gnss.script ? device::to_json(*c.gnss.script) : nlohmann::json()},
        {"time_scale", c.gnss.time_scale},
        {"nominal_rate_hz", dc.schedule.nominal_rate_hz},
        {"imu_rate_hz", dc.schedule.imu_rate_hz},
        {"gnss_rate_hz", dc.schedule.gnss_rate_hz},
        {"merge_window_s", dc.schedule.merge_window_s},
        {"spike_probability", dc.schedule.spike_probability},
        {"spike_max_s", dc.schedule.spike_max_s},
        {"latency_mean_s", dc.latency.mean_s},
        {"latency_spread_s", dc.latency.spread_s}}},
      {"workload",
       {{"iterations", c.workload.iterations},
        {"dt_ms", c.workload.mpc.dt * 1e3},
        {"horizon", c.workload.mpc.horizon},
        {"solver_iterations", c.workload.mpc.iterations}}},
  };
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, "bad JSON in " + path.string() + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(to_json(config).dump())));
  return buf;
}

nlohmann::json to_json(const AggregateReport& r) {
  nlohmann::json j{{"scenario", to_string(r.scenario)},
                   {"mode", to_string(r.mode)},
                   {"config_hash", r.config_hash},
                   {"started_wall_us", r.started_wall_us},
                   {"finished_wall_us", r.finished_wall_us},
                   {"warnings", r.warnings}};
  if (r.scenario == Scenario::kGnss) {
    nlohmann::json runs = nlohmann::json::array();
    nlohmann::json rates = nlohmann::json::array();
    for (const auto& run : r.gnss_runs) {
      nlohmann::json rj{{"index", run.index}, {"ok", run.ok}, {"seed", run.seed}};
      if (!run.ok) {
        rj["error"] = run.error;
      } else {
        rj["capture"] = to_json(run.capture);
        rj["device"] = optional_json(run.device);
        rj["flood"] = optional_json(run.flood);
        rj["analysis"] = analysis::to_json(run.analysis);
        if (run.flood) rates.push_back(run.flood->achieved_rate_pps);
      }
      runs.push_back(std::move(rj));
    }
    j["runs"] = std::move(runs);
    j["achieved_flood_rates_pps"] = std::move(rates);
    const auto& ref = r.pooled_reference.mean_rate_hz;
    const auto& att = r.pooled_attack.mean_rate_hz;
    j["pooled"] = {{"reference", analysis::to_json(r.pooled_reference)},
                   {"attack", analysis::to_json(r.pooled_attack)},
                   {"attack_rate_ratio",
                    (ref && att && *ref > 0.0) ? nlohmann::json(*att / *ref) : nlohmann::json()}};
  } else {
    nlohmann::json pairs = nlohmann::json::array();
    nlohmann::json rates = nlohmann::json::array();
    for (const auto& p : r.pairs) {
      pairs.push_back({{"index", p.index},
                       {"reference", analysis::to_json(p.reference, false)},
                       {"attack", analysis::to_json(p.attack, false)},
                       {"flood", optional_json(p.flood)}});
      if (p.flood) rates.push_back(p.flood->achieved_rate_pps);
    }
    j["pairs"] = std::move(pairs);
    j["achieved_flood_rates_pps"] = std::move(rates);
    j["pooled"] = {{"reference", optional_json(r.pooled_reference_latency)},
                   {"attack", optional_json(r.pooled_attack_latency)}};
  }
  return j;
}

AggregateReport run_gnss_experiment(const ExperimentConfig& config, RunMode mode,
                                    const fs::path& out_dir) {
  validate(config);
  AggregateReport report;
  report.scenario = Scenario::kGnss;
  report.mode = mode;
  report.config_hash = config_hash(config);
  report.started_wall_us = wall_now_us();

  const fs::path plots = out_dir / "plots";
  fs::create_directories(plots);
  write_json(out_dir / "config.json", to_json(config));

  for (int k = 0; k < config.repetitions; ++k) {
    const fs::path dir = run_dir(out_dir, k);
    fs::create_directories(dir);
    GnssRun run;
    try {
      run = mode == RunMode::kScripted ? scripted_run(config, k, dir, plots)
                                       : live_run(config, k, dir, plots, report.warnings);
    } catch (const std::exception& e) {
      run = GnssRun{};
      run.index = k;
      run.seed = config.seed + static_cast<std::uint64_t>(k);
      run.error = e.what();
      spdlog::warn("gnss run {} failed: {}", k, e.what());
    }
    report.gnss_runs.push_back(std::move(run));
  }

  pool_gnss(report);
  report.finished_wall_us = wall_now_us();
  const bool any_ok = std::any_of(report.gnss_runs.begin(), report.gnss_runs.end(),
                                  [](const GnssRun& r) { return r.ok; });
  write_json(out_dir / "report.json", to_json(report));
  if (!any_ok) throw Error(ErrorCode::kExperiment, "all GNSS runs failed");
  write_gnss_rates_csv(plots / "rates.csv", report);
  return report;
}

AggregateReport run_adstack_experiment(const ExperimentConfig& config, RunMode mode,
                                       const fs::path& out_dir) {
  validate(config);
  AggregateReport report;
  report.scenario = Scenario::kAdStack;
  report.mode = mode;
  report.config_hash = config_hash(config);
  report.started_wall_us = wall_now_us();

  const fs::path plots = out_dir / "plots";
  fs::create_directories(plots);
  write_json(out_dir / "config.json", to_json(config));

  forge::FloodConfig flood_config = config.flood;
  if (mode == RunMode::kScripted) {
    // Desk-scale stand-in: unprivileged loopback flood.
    flood_config.transport_mode = forge::TransportMode::kUdpFallback;
  }
  // The flood is stopped explicitly once the attack run finishes.
  flood_config.duration_s = 1e6;

  std::vector<double> pooled_reference;
  std::vector<double> pooled_attack;
  for (int k = 0; k < config.repetitions; ++k) {
    const fs::path dir = run_dir(out_dir, k);
    fs::create_directories(dir);
    AdStackPair pair;
    pair.index = k;

    std::ofstream reference_log(dir / "reference.csv");
    const auto reference = workload::run_benchmark(config.workload, &reference_log);

    std::vector<std::string> flood_warnings;
    std::optional<forge::FloodStats> flood_stats;
    workload::BenchmarkRun attack;
    {
      std::jthread flood_thread([&](std::stop_token stop) {
        flood_stats = flood_with_fallback(flood_config, stop, flood_warnings);
      });
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      std::ofstream attack_log(dir / "attack.csv");
      attack = workload::run_benchmark(config.workload, &attack_log);
    }
    pair.flood = flood_stats;
    for (auto& w : flood_warnings) report.warnings.push_back("pair-" + std::to_string(k) + ": " + w);

    const auto ref_d = analysis::durations_s(reference.records);
    const auto att_d = analysis::durations_s(attack.records);
    pair.reference = *analysis::summarize_durations(ref_d);
    pair.attack = *analysis::summarize_durations(att_d);
    pooled_reference.insert(pooled_reference.end(), ref_d.begin(), ref_d.end());
    pooled_attack.insert(pooled_attack.end(), att_d.begin(), att_d.end());
    report.pairs.push_back(std::move(pair));
  }

  report.pooled_reference_latency = analysis::summarize_durations(pooled_reference);
  report.pooled_attack_latency = analysis::summarize_durations(pooled_attack);
  analysis::write_histogram_csv(plots / "latency_reference_hist.csv",
                                report.pooled_reference_latency->histogram);
  analysis::write_histogram_csv(plots / "latency_attack_hist.csv",
                                report.pooled_attack_latency->histogram);
  report.finished_wall_us = wall_now_us();
  write_json(out_dir / "report.json", to_json(report));
  return report;
}

AggregateReport run_experiment(const ExperimentConfig& config, RunMode mode,
                               const fs::path& out_dir) {
  return config.scenario == Scenario::kGnss ? run_gnss_experiment(config, mode, out_dir)
                                            : run_adstack_experiment(config, mode, out_dir);
}

AggregateReport reanalyze_gnss(const ExperimentConfig& config, const fs::path& out_dir) {
  AggregateReport report;
  report.scenario = Scenario::kGnss;
  report.config_hash = config_hash(config);
  const auto window = window_for(config);
  for (int k = 0; k < config.repetitions; ++k) {
    const fs::path dir = run_dir(out_dir, k);
    GnssRun run;
    run.index = k;
    run.seed = config.seed + static_cast<std::uint64_t>(k);
    if (!fs::exists(dir / "capture.anb") || !fs::exists(dir / "meta.json")) {
      run.error = "missing capture";
      report.gnss_runs.push_back(std::move(run));
      continue;
    }
    run.meta = codec::read_capture_meta(dir / "meta.json");
    const auto decoded = codec::decode_file(dir / "capture.anb");
    run.analysis = analysis::analyze_samples(decoded.samples, window, run.meta.tow_origin_us);
    run.analysis.diagnostics = decoded.diagnostics;
    run.ok = true;
    report.gnss_runs.push_back(std::move(run));
  }
  pool_gnss(report);
  return report;
}

}  // namespace dosbench::orchestrator
