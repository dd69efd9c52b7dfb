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

#include "dosbench/device_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "dosbench/error.hpp"

namespace dosbench::device {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed ^ splitmix64(stream)));
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::uint64_t to_us(double seconds) {
  return static_cast<std::uint64_t>(std::llround(seconds * 1e6));
}

}  // namespace

void validate(const SamplingSchedule& s) {
  if (!(s.nominal_rate_hz >= kMinNominalRateHz && s.nominal_rate_hz <= kMaxNominalRateHz)) {
    throw Error(ErrorCode::kConfig, "nominal_rate_hz outside the medium output band [55, 65]");
  }
  if (!(s.imu_rate_hz > 0.0) || !(s.gnss_rate_hz > 0.0)) {
    throw Error(ErrorCode::kConfig, "sensor rates must be positive");
  }
  if (!(s.merge_window_s >= 0.0) || s.merge_window_s >= 1.0 / s.imu_rate_hz) {
    throw Error(ErrorCode::kConfig, "merge_window_s must lie in [0, 1/imu_rate_hz)");
  }
  if (!(s.spike_probability >= 0.0 && s.spike_probability <= 1.0) || s.spike_max_s < 0.0) {
    throw Error(ErrorCode::kConfig, "invalid spike parameters");
  }
}

double next_sample_time(const SamplingSchedule& schedule, Rng& rng, double t_prev) {
  const double spike_draw = uniform01(rng);
  const double spike_len = uniform01(rng) * schedule.spike_max_s;
  double after = t_prev;
  if (spike_draw < schedule.spike_probability) after += spike_len;

  // Small epsilon keeps an epoch that sits exactly on t_prev from repeating.
  const double imu_index = std::floor(after * schedule.imu_rate_hz + 1e-9) + 1.0;
  const double t_imu = imu_index / schedule.imu_rate_hz;
  const double gnss_index =
      std::ceil((t_imu - schedule.gnss_offset_s) * schedule.gnss_rate_hz - 1e-9);
  const double t_gnss = schedule.gnss_offset_s + gnss_index / schedule.gnss_rate_hz;
  if (t_gnss >= t_imu && t_gnss - t_imu <= schedule.merge_window_s) return t_gnss;
  return t_imu;
}

double LatencyModel::draw(Rng& rng) const {
  const double u = uniform01(rng);
  return std::max(0.0, mean_s + spread_s * (2.0 * u - 1.0));
}

void validate(const DegradationScript& script, double duration_s) {
  if (!(script.drop_probability >= 0.0 && script.drop_probability <= 1.0)) {
    throw Error(ErrorCode::kConfig, "drop_probability must lie in [0, 1]");
  }
  if (!(script.start_s >= 0.0)) throw Error(ErrorCode::kConfig, "script start_s must be >= 0");
  if (script.extra_latency.spread_s < 0.0) {
    throw Error(ErrorCode::kConfig, "extra latency spread must be >= 0");
  }
  auto events = script.outage_events;
  std::sort(events.begin(), events.end(),
            [](const OutageEvent& a, const OutageEvent& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.start_s < 0.0 || e.duration_s <= 0.0 || e.start_s + e.duration_s > duration_s) {
      throw Error(ErrorCode::kConfig, "outage event outside the run duration");
    }
    if (i > 0 && events[i - 1].start_s + events[i - 1].duration_s > e.start_s) {
      throw Error(ErrorCode::kConfig, "outage events overlap");
    }
  }
}

std::optional<DegradationScript> preset(std::string_view name) {
  if (name == "none") return std::nullopt;
  DegradationScript script;
  script.start_s = 10.0;
  if (name == "single") {
    script.drop_probability = 0.5;
    return script;
  }
  if (name == "double") {
    script.drop_probability = 0.95;
    script.outage_events = {{15.0, 2.0}, {24.0, 1.0}};
    return script;
  }
  throw Error(ErrorCode::kConfig, "unknown preset '" + std::string(name) + "'");
}

nlohmann::json to_json(const DegradationScript& script) {
  nlohmann::json outages = nlohmann::json::array();
  for (const auto& e : script.outage_events) {
    outages.push_back({{"start_s", e.start_s}, {"duration_s", e.duration_s}});
  }
  return {
      {"start_s", script.start_s},
      {"drop_probability", script.drop_probability},
      {"outage_events", outages},
      {"extra_latency_s",
       {{"mean", script.extra_latency.mean_s}, {"spread", script.extra_latency.spread_s}}},
  };
}

DegradationScript script_from_json(const nlohmann::json& j) {
  DegradationScript script;
  try {
    script.start_s = j.value("start_s", script.start_s);
    script.drop_probability = j.value("drop_probability", 0.0);
    if (j.contains("outage_events")) {
      for (const auto& e : j.at("outage_events")) {
        script.outage_events.push_back(
            {e.at("start_s").get<double>(), e.at("duration_s").get<double>()});
      }
    }
    if (j.contains("extra_latency_s")) {
      const auto& l = j.at("extra_latency_s");
      script.extra_latency.mean_s = l.value("mean", 0.0);
      script.extra_latency.spread_s = l.value("spread", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad degradation script: ") + e.what());
  }
  return script;
}

DegradationScript load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return script_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, "bad JSON in " + path.string() + ": " + e.what());
  }
}

SolutionSample generate_sample(const DeviceConfig& config, double t, const LocalPosition& truth,
                               Rng& noise, Rng& latency_rng) {
  std::normal_distribution<double> standard(0.0, 1.0);
  const double de = standard(noise) * config.noise_sigma_horizontal_m;
  const double dn = standard(noise) * config.noise_sigma_horizontal_m;
  const double du = standard(noise) * config.noise_sigma_up_m;

  SolutionSample s;
  s.tow_us = config.tow_origin_us + to_us(t);
  s.sys_time_us = s.tow_us + config.clock_offset_us + to_us(config.latency.draw(latency_rng));
  s.east_mm = static_cast<std::int32_t>(std::lround((truth.east_m + de) * 1000.0));
  s.north_mm = static_cast<std::int32_t>(std::lround((truth.north_m + dn) * 1000.0));
  s.up_mm = static_cast<std::int32_t>(std::lround((truth.up_m + du) * 1000.0));
  s.fix_status = config.fix_status;
  return s;
}

DeviceModel::DeviceModel(DeviceConfig config, std::optional<DegradationScript> script,
                         std::uint64_t seed)
    : config_(config),
      script_(std::move(script)),
      schedule_rng_(make_stream(seed, 1)),
      noise_rng_(make_stream(seed, 2)),
      latency_rng_(make_stream(seed, 3)),
      drop_rng_(make_stream(seed, 4)),
      extra_rng_(make_stream(seed, 5)) {
  validate(config_.schedule);
  if (config_.tow_origin_us >= kGpsWeekUs) {
    throw Error(ErrorCode::kConfig, "tow_origin_us beyond one GPS week");
  }
}

bool DeviceModel::in_outage(double t) const {
  return std::any_of(script_->outage_events.begin(), script_->outage_events.end(),
                     [t](const OutageEvent& e) {
                       return t >= e.start_s && t < e.start_s + e.duration_s;
                     });
}

std::optional<EmittedSample> DeviceModel::next(double duration_s) {
  while (true) {
    const double t = next_sample_time(config_.schedule, schedule_rng_, t_prev_);
    if (t > duration_s) return std::nullopt;
    t_prev_ = t;
    ++counters_.epochs;

    SolutionSample s = generate_sample(config_, t, config_.truth, noise_rng_, latency_rng_);
    if (s.tow_us >= kGpsWeekUs) {
      throw Error(ErrorCode::kConfig, "run crosses the GPS week boundary");
    }

    if (script_) {
      if (t >= script_->start_s) {
        const double drop_draw = uniform01(drop_rng_);
        const double extra = script_->extra_latency.draw(extra_rng_);
        if (in_outage(t)) {
          ++counters_.dropped_outage;
          continue;
        }
        if (drop_draw < script_->drop_probability) {
          ++counters_.dropped_random;
          continue;
        }
        s.sys_time_us += to_us(extra);
      } else if (in_outage(t)) {
        ++counters_.dropped_outage;
        continue;
      }
    }

    s.sys_time_us = std::max(s.sys_time_us, last_sys_us_);
    last_sys_us_ = s.sys_time_us;
    ++counters_.emitted;

    EmittedSample out;
    out.sample = s;
    out.epoch_s = t;
    out.emit_s = static_cast<double>(s.sys_time_us - config_.tow_origin_us - config_.clock_offset_us) * 1e-6;
    return out;
  }
}

SimulatedRun simulate(const DeviceConfig& config, const std::optional<DegradationScript>& script,
                      std::uint64_t seed, double duration_s) {
  if (script) validate(*script, duration_s);
  DeviceModel model(config, script, seed);
  SimulatedRun run;
  while (auto next = model.next(duration_s)) run.samples.push_back(next->sample);
  run.counters = model.counters();
  return run;
}

}  // namespace dosbench::device
