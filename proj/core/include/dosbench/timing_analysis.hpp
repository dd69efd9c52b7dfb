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

// Timing metrics over device captures and control-loop latency logs.
//
// Timestamps are kept as integer microseconds, the resolution of both the
// device protocol and the latency log, so clock offsets cancel exactly.
// Metrics are returned in seconds (or Hz). A metric that is undefined for
// the given input (too few samples) comes back as std::nullopt.

#ifndef DOSBENCH_TIMING_ANALYSIS_HPP_
#define DOSBENCH_TIMING_ANALYSIS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dosbench/control_workload.hpp"
#include "dosbench/solution.hpp"
#include "dosbench/stream_codec.hpp"

namespace dosbench::analysis {

using Metric = std::optional<double>;

/// Paired sampling (tow) and processing (sys) timestamps.
struct TimingSeries {
  std::vector<std::int64_t> tow_us;
  std::vector<std::int64_t> sys_us;

  std::size_t size() const noexcept { return tow_us.size(); }
  bool empty() const noexcept { return tow_us.empty(); }
  void push_back(std::int64_t tow, std::int64_t sys) {
    tow_us.push_back(tow);
    sys_us.push_back(sys);
  }

  // Rounds seconds to microseconds.
  static TimingSeries from_seconds(std::span<const double> tow_s, std::span<const double> sys_s);
};

// Throws Error(kInvalidSeries) on length mismatch or non-increasing tow.
void validate(const TimingSeries& series);

/// Throws Error(kWraparound) if tow jumps back across the GPS week boundary
/// and Error(kInvalidSeries) for any other non-increasing tow.
TimingSeries to_timing_series(std::span<const SolutionSample> samples);

enum class Phase { kReference, kAttack };

/// Run-relative analysis windows: reference [reference_begin, reference_end),
/// discarded guard band, attack [attack_begin, attack_end].
struct PhaseWindow {
  double reference_begin_s = 0.0;
  double reference_end_s = 8.0;
  double attack_begin_s = 12.0;
  double attack_end_s = 30.0;

  // Guard band of +-guard_s around the attack start.
  static PhaseWindow around_attack(double attack_at_s, double duration_s, double guard_s = 2.0);
  bool contains(Phase phase, std::int64_t relative_us) const noexcept;
};

void validate(const PhaseWindow& window);

// Samples whose tow - t0_us falls in the phase interval, order preserved.
TimingSeries extract_phase(const TimingSeries& series, const PhaseWindow& window, Phase phase,
                           std::int64_t t0_us);

/// p-quantile by linear interpolation between order statistics
/// (h = (n - 1) p). Input need not be sorted. Empty input -> nullopt.
Metric quantile(std::span<const double> values, double p);

// (n - 1) / (tow_last - tow_first), Hz.
Metric mean_sample_rate(const TimingSeries& series);
// Largest consecutive tow difference, seconds.
Metric longest_increment(const TimingSeries& series);

// t_dd[i] = tow[i] - tow[i+1] + sys[i+1] - sys[i], microseconds.
std::vector<std::int64_t> double_differences(const TimingSeries& series);

/// Q_hi(t_dd) - Q_lo(t_dd) in seconds; needs at least 3 samples.
Metric double_difference_jitter(const TimingSeries& series, double q_lo = 0.05,
                                double q_hi = 0.95);

// Pooled variants treat each series as a separate run: increments and
// double differences are never formed across run boundaries.
Metric pooled_mean_sample_rate(std::span<const TimingSeries> runs);
Metric pooled_longest_increment(std::span<const TimingSeries> runs);
Metric pooled_double_difference_jitter(std::span<const TimingSeries> runs, double q_lo = 0.05,
                                       double q_hi = 0.95);

struct PhaseMetrics {
  std::size_t samples = 0;
  Metric mean_rate_hz;
  Metric longest_increment_s;
  Metric dd_jitter_s;
};

PhaseMetrics phase_metrics(const TimingSeries& series);
PhaseMetrics pooled_phase_metrics(std::span<const TimingSeries> runs);

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1 entries
  std::vector<std::uint64_t> counts;
};

Histogram make_histogram(std::span<const double> values, std::size_t bins = 50);

struct LatencySummary {
  std::size_t count = 0;
  double median_s = 0.0;
  double std_s = 0.0;  // population standard deviation
  double min_s = 0.0;
  double max_s = 0.0;
  double p99_s = 0.0;
  double lower99_width_s = 0.0;  // Q0.99 - min
  Histogram histogram;
};

std::optional<LatencySummary> summarize_durations(std::span<const double> durations_s);
std::optional<LatencySummary> latency_summary(std::span<const workload::LatencyRecord> records);
std::vector<double> durations_s(std::span<const workload::LatencyRecord> records);

/// Position screen in a local frame whose origin is the first solution.
struct PlausibilityReport {
  std::size_t samples = 0;
  double horizontal_std_m = 0.0;
  double max_horizontal_excursion_m = 0.0;
  double up_std_m = 0.0;
  bool plausible = false;
};

PlausibilityReport screen_positions(std::span<const SolutionSample> samples,
                                    double max_excursion_m = 1.0);

struct CaptureAnalysis {
  codec::DecodeDiagnostics diagnostics;
  std::int64_t t0_us = 0;
  PhaseWindow window;
  TimingSeries reference;
  TimingSeries attack;
  PhaseMetrics reference_metrics;
  PhaseMetrics attack_metrics;
  PlausibilityReport plausibility;
};

/// t0 is tow_origin_us when known, else the first sample's tow.
CaptureAnalysis analyze_samples(std::span<const SolutionSample> samples, const PhaseWindow& window,
                                std::optional<std::uint64_t> tow_origin_us);
CaptureAnalysis analyze_capture(const std::filesystem::path& capture, const PhaseWindow& window,
                                std::optional<std::uint64_t> tow_origin_us);

nlohmann::json to_json(const Metric& metric);
nlohmann::json to_json(const PhaseMetrics& metrics);
nlohmann::json to_json(const LatencySummary& summary, bool include_histogram = true);
nlohmann::json to_json(const PlausibilityReport& report);
nlohmann::json to_json(const codec::DecodeDiagnostics& diagnostics);
nlohmann::json to_json(const PhaseWindow& window);
nlohmann::json to_json(const CaptureAnalysis& analysis);

// Plot-data CSVs for external rendering.
void write_increments_csv(const std::filesystem::path& path, const TimingSeries& series,
                          std::int64_t t0_us);
void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram);
void write_positions_csv(const std::filesystem::path& path, std::span<const SolutionSample> samples);

}  // namespace dosbench::analysis

#endif  // DOSBENCH_TIMING_ANALYSIS_HPP_
