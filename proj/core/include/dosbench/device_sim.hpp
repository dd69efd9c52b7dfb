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

// Simulated GNSS/INS device: nonuniform fusion-driven sampling, stationary
// position noise, processing latency, scripted degradation, and a TCP server
// that streams the solutions with the stream_codec framing.

#ifndef DOSBENCH_DEVICE_SIM_HPP_
#define DOSBENCH_DEVICE_SIM_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stop_token>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dosbench/endpoint.hpp"
#include "dosbench/solution.hpp"

namespace dosbench::device {

inline constexpr std::uint16_t kDefaultPort = 6001;

using Rng = std::mt19937_64;

/// Two incoherent clocks: IMU epochs drive output, GNSS epochs that land
/// shortly after an IMU epoch replace it.
struct SamplingSchedule {
  double nominal_rate_hz = 60.0;
  double imu_rate_hz = 63.0;
  double gnss_rate_hz = 5.0;
  double merge_window_s = 0.006;
  double gnss_offset_s = 0.0037;
  // Rare processing stalls that skip epochs even without load.
  double spike_probability = 2e-4;
  double spike_max_s = 0.1;
};

// Medium output band accepted for nominal_rate_hz.
inline constexpr double kMinNominalRateHz = 55.0;
inline constexpr double kMaxNominalRateHz = 65.0;

void validate(const SamplingSchedule& schedule);

/// Next output epoch strictly after t_prev (run-relative seconds). Consumes
/// exactly two draws from rng per call.
double next_sample_time(const SamplingSchedule& schedule, Rng& rng, double t_prev);

// Uniform on [mean - spread, mean + spread], clamped at zero.
struct LatencyModel {
  double mean_s = 0.0;
  double spread_s = 0.0;

  double draw(Rng& rng) const;
};

struct OutageEvent {
  double start_s = 0.0;
  double duration_s = 0.0;
};

struct DegradationScript {
  double start_s = 10.0;
  double drop_probability = 0.0;
  std::vector<OutageEvent> outage_events;
  LatencyModel extra_latency;
};

// Throws Error(kConfig) for probabilities outside [0,1], overlapping
// outages, or outages outside [0, duration_s].
void validate(const DegradationScript& script, double duration_s);

/// Named presets: "none" (nullopt), "single", "double".
std::optional<DegradationScript> preset(std::string_view name);

nlohmann::json to_json(const DegradationScript& script);
DegradationScript script_from_json(const nlohmann::json& j);
DegradationScript load_script(const std::filesystem::path& path);

struct LocalPosition {
  double east_m = 0.0;
  double north_m = 0.0;
  double up_m = 0.0;
};

struct DeviceConfig {
  SamplingSchedule schedule;
  LatencyModel latency{0.030, 0.004};
  double noise_sigma_horizontal_m = 0.01;
  double noise_sigma_up_m = 0.02;
  LocalPosition truth;
  // Wednesday 00:00 of the GPS week.
  std::uint64_t tow_origin_us = 345'600'000'000ULL;
  // Device clock minus GPS time; arbitrary, cancels in double differences.
  std::uint64_t clock_offset_us = 2'500'000ULL;
  FixStatus fix_status = FixStatus::kFixed;
};

/// Solution for sampling epoch t (run-relative seconds). Position noise is
/// drawn from noise; processing latency from latency_rng.
SolutionSample generate_sample(const DeviceConfig& config, double t, const LocalPosition& truth,
                               Rng& noise, Rng& latency_rng);

struct DeviceCounters {
  std::uint64_t epochs = 0;
  std::uint64_t emitted = 0;
  std::uint64_t dropped_random = 0;
  std::uint64_t dropped_outage = 0;
};

struct EmittedSample {
  SolutionSample sample;
  double epoch_s = 0.0;  // run-relative sampling time
  double emit_s = 0.0;   // run-relative emission time
};

/// Deterministic sample source. Sampling, noise, latency and degradation
/// draw from separate seeded streams, so a script never perturbs the
/// samples it leaves untouched.
class DeviceModel {
 public:
  DeviceModel(DeviceConfig config, std::optional<DegradationScript> script, std::uint64_t seed);

  // Next surviving sample with epoch <= duration_s, or nullopt at the end.
  std::optional<EmittedSample> next(double duration_s);

  const DeviceCounters& counters() const noexcept { return counters_; }
  const DeviceConfig& config() const noexcept { return config_; }

 private:
  bool in_outage(double t) const;

  DeviceConfig config_;
  std::optional<DegradationScript> script_;
  Rng schedule_rng_;
  Rng noise_rng_;
  Rng latency_rng_;
  Rng drop_rng_;
  Rng extra_rng_;
  double t_prev_ = 0.0;
  std::uint64_t last_sys_us_ = 0;
  DeviceCounters counters_;
};

struct SimulatedRun {
  std::vector<SolutionSample> samples;
  DeviceCounters counters;
};

// Whole run without networking or real time.
SimulatedRun simulate(const DeviceConfig& config, const std::optional<DegradationScript>& script,
                      std::uint64_t seed, double duration_s);

struct StreamOptions {
  // Simulated seconds per wall second; > 1 accelerates scripted runs.
  double time_scale = 1.0;
  // Stamp sys_time_us from the host monotonic clock at emission instead of
  // the latency model, so real host load shows up in the stream.
  bool live_clock = false;
  // Start the run clock when the first client connects.
  bool wait_for_client = true;
  double client_wait_timeout_s = 10.0;
  std::size_t queue_capacity = 4096;
};

struct RunSummary {
  DeviceCounters counters;
  std::uint64_t frames_queued = 0;
  std::uint64_t queue_overflows = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t clients_served = 0;
  std::uint64_t disconnects = 0;
  double wall_duration_s = 0.0;
  bool client_timeout = false;
};

/// TCP server; binds in the constructor (Error(kEndpoint) on failure).
/// One generation loop feeds a bounded drop-oldest queue drained by a
/// writer thread, so a slow client never stalls sample generation.
class DeviceServer {
 public:
  explicit DeviceServer(const Endpoint& listen);
  ~DeviceServer();
  DeviceServer(const DeviceServer&) = delete;
  DeviceServer& operator=(const DeviceServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  RunSummary run(const DeviceConfig& config, const std::optional<DegradationScript>& script,
                 std::uint64_t seed, double duration_s, const StreamOptions& options,
                 std::stop_token stop = {});

 private:
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
};

RunSummary stream(const Endpoint& listen, const DeviceConfig& config,
                  const std::optional<DegradationScript>& script, std::uint64_t seed,
                  double duration_s, const StreamOptions& options = {},
                  std::stop_token stop = {});

}  // namespace dosbench::device

#endif  // DOSBENCH_DEVICE_SIM_HPP_
