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

#include "dosbench/timing_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dosbench/error.hpp"

namespace dosbench::analysis {
namespace {

constexpr std::int64_t kHalfWeekUs = static_cast<std::int64_t>(kGpsWeekUs / 2);

std::int64_t to_us(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1e6)); }

double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Metric spread(std::vector<double> values, double q_lo, double q_hi) {
  if (values.size() < 2) return std::nullopt;
  std::sort(values.begin(), values.end());
  return (sorted_quantile(values, q_hi) - sorted_quantile(values, q_lo)) * 1e-6;
}

void append_double_differences(const TimingSeries& s, std::vector<double>& out) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    out.push_back(static_cast<double>(s.tow_us[i] - s.tow_us[i + 1] + s.sys_us[i + 1] - s.sys_us[i]));
  }
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace

TimingSeries TimingSeries::from_seconds(std::span<const double> tow_s, std::span<const double> sys_s) {
  if (tow_s.size() != sys_s.size()) throw Error(ErrorCode::kInvalidSeries, "length mismatch");
  TimingSeries s;
  s.tow_us.reserve(tow_s.size());
  s.sys_us.reserve(sys_s.size());
  for (std::size_t i = 0; i < tow_s.size(); ++i) s.push_back(to_us(tow_s[i]), to_us(sys_s[i]));
  return s;
}

void validate(const TimingSeries& series) {
  if (series.tow_us.size() != series.sys_us.size()) {
    throw Error(ErrorCode::kInvalidSeries, "tow and sys lengths differ");
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series.tow_us[i] <= series.tow_us[i - 1]) {
      throw Error(ErrorCode::kInvalidSeries, "tow not strictly increasing at index " + std::to_string(i));
    }
  }
}

TimingSeries to_timing_series(std::span<const SolutionSample> samples) {
  TimingSeries s;
  s.tow_us.reserve(samples.size());
  s.sys_us.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto tow = static_cast<std::int64_t>(samples[i].tow_us);
    if (i > 0 && tow <= s.tow_us.back()) {
      if (s.tow_us.back() - tow > kHalfWeekUs) {
        throw Error(ErrorCode::kWraparound, "tow wrapped at index " + std::to_string(i));
      }
      throw Error(ErrorCode::kInvalidSeries, "tow not strictly increasing at index " + std::to_string(i));
    }
    s.push_back(tow, static_cast<std::int64_t>(samples[i].sys_time_us));
  }
  return s;
}

PhaseWindow PhaseWindow::around_attack(double attack_at_s, double duration_s, double guard_s) {
  PhaseWindow w{0.0, attack_at_s - guard_s, attack_at_s + guard_s, duration_s};
  validate(w);
  return w;
}

bool PhaseWindow::contains(Phase phase, std::int64_t relative_us) const noexcept {
  if (phase == Phase::kReference) {
    return relative_us >= to_us(reference_begin_s) && relative_us < to_us(reference_end_s);
  }
  return relative_us >= to_us(attack_begin_s) && relative_us <= to_us(attack_end_s);
}

void validate(const PhaseWindow& w) {
  if (!(w.reference_begin_s < w.reference_end_s && w.reference_end_s <= w.attack_begin_s &&
        w.attack_begin_s < w.attack_end_s)) {
    throw Error(ErrorCode::kConfig, "phase windows must be ordered and non-overlapping");
  }
}

TimingSeries extract_phase(const TimingSeries& series, const PhaseWindow& window, Phase phase,
                           std::int64_t t0_us) {
  TimingSeries out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (window.contains(phase, series.tow_us[i] - t0_us)) {
      out.push_back(series.tow_us[i], series.sys_us[i]);
    }
  }
  return out;
}

Metric quantile(std::span<const double> values, double p) {
  if (values.empty()) return std::nullopt;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, std::clamp(p, 0.0, 1.0));
}

Metric mean_sample_rate(const TimingSeries& series) {
  const TimingSeries* one = &series;
  return pooled_mean_sample_rate({one, 1});
}

Metric longest_increment(const TimingSeries& series) {
  const TimingSeries* one = &series;
  return pooled_longest_increment({one, 1});
}

std::vector<std::int64_t> double_differences(const TimingSeries& s) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    out.push_back(s.tow_us[i] - s.tow_us[i + 1] + s.sys_us[i + 1] - s.sys_us[i]);
  }
  return out;
}

Metric double_difference_jitter(const TimingSeries& series, double q_lo, double q_hi) {
  if (series.size() < 3) return std::nullopt;
  std::vector<double> dd;
  dd.reserve(series.size() - 1);
  append_double_differences(series, dd);
  return spread(std::move(dd), q_lo, q_hi);
}

Metric pooled_mean_sample_rate(std::span<const TimingSeries> runs) {
  std::int64_t intervals = 0;
  std::int64_t span_us = 0;
  for (const auto& s : runs) {
    if (s.size() < 2) continue;
    intervals += static_cast<std::int64_t>(s.size()) - 1;
    span_us += s.tow_us.back() - s.tow_us.front();
  }
  if (intervals == 0 || span_us <= 0) return std::nullopt;
  return static_cast<double>(intervals) / (static_cast<double>(span_us) * 1e-6);
}

Metric pooled_longest_increment(std::span<const TimingSeries> runs) {
  std::optional<std::int64_t> longest;
  for (const auto& s : runs) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      const std::int64_t inc = s.tow_us[i] - s.tow_us[i - 1];
      if (!longest || inc > *longest) longest = inc;
    }
  }
  if (!longest) return std::nullopt;
  return static_cast<double>(*longest) * 1e-6;
}

Metric pooled_double_difference_jitter(std::span<const TimingSeries> runs, double q_lo,
                                       double q_hi) {
  std::vector<double> dd;
  for (const auto& s : runs) append_double_differences(s, dd);
  return spread(std::move(dd), q_lo, q_hi);
}

PhaseMetrics phase_metrics(const TimingSeries& series) {
  const TimingSeries* one = &series;
  return pooled_phase_metrics({one, 1});
}

PhaseMetrics pooled_phase_metrics(std::span<const TimingSeries> runs) {
  PhaseMetrics m;
  for (const auto& s : runs) m.samples += s.size();
  m.mean_rate_hz = pooled_mean_sample_rate(runs);
  m.longest_increment_s = pooled_longest_increment(runs);
  m.dd_jitter_s = pooled_double_difference_jitter(runs);
  return m;
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  Histogram h;
  if (values.empty() || bins == 0) return h;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) bins = 1;
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    std::size_t idx = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
    ++h.counts[std::min(idx, bins - 1)];
  }
  return h;
}

std::vector<double> durations_s(std::span<const workload::LatencyRecord> records) {
  std::vector<double> d;
  d.reserve(records.size());
  for (const auto& r : records) d.push_back(static_cast<double>(r.duration_us()) * 1e-6);
  return d;
}

std::optional<LatencySummary> summarize_durations(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  LatencySummary s;
  s.count = sorted.size();
  s.min_s = sorted.front();
  s.max_s = sorted.back();
  s.median_s = sorted_quantile(sorted, 0.5);
  s.p99_s = sorted_quantile(sorted, 0.99);
  s.lower99_width_s = s.p99_s - s.min_s;
  // Shifted by the minimum so identical durations give exactly zero.
  double shifted_sum = 0.0;
  for (double v : sorted) shifted_sum += v - s.min_s;
  const double mean = shifted_sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : sorted) ss += (v - s.min_s - mean) * (v - s.min_s - mean);
  s.std_s = std::sqrt(ss / static_cast<double>(s.count));
  s.histogram = make_histogram(sorted);
  return s;
}

std::optional<LatencySummary> latency_summary(std::span<const workload::LatencyRecord> records) {
  const auto d = durations_s(records);
  return summarize_durations(d);
}

PlausibilityReport screen_positions(std::span<const SolutionSample> samples, double max_excursion_m) {
  PlausibilityReport r;
  r.samples = samples.size();
  if (samples.empty()) return r;
  const double e0 = samples.front().east_mm * 1e-3;
  const double n0 = samples.front().north_mm * 1e-3;
  const double u0 = samples.front().up_mm * 1e-3;
  double se = 0, sn = 0, su = 0, see = 0, snn = 0, suu = 0;
  for (const auto& s : samples) {
    const double de = s.east_mm * 1e-3 - e0;
    const double dn = s.north_mm * 1e-3 - n0;
    const double du = s.up_mm * 1e-3 - u0;
    se += de; sn += dn; su += du;
    see += de * de; snn += dn * dn; suu += du * du;
    r.max_horizontal_excursion_m = std::max(r.max_horizontal_excursion_m, std::hypot(de, dn));
  }
  const double n = static_cast<double>(samples.size());
  const double var_e = std::max(0.0, see / n - (se / n) * (se / n));
  const double var_n = std::max(0.0, snn / n - (sn / n) * (sn / n));
  const double var_u = std::max(0.0, suu / n - (su / n) * (su / n));
  r.horizontal_std_m = std::sqrt(var_e + var_n);
  r.up_std_m = std::sqrt(var_u);
  r.plausible = r.max_horizontal_excursion_m <= max_excursion_m;
  return r;
}

CaptureAnalysis analyze_samples(std::span<const SolutionSample> samples, const PhaseWindow& window,
                                std::optional<std::uint64_t> tow_origin_us) {
  validate(window);
  CaptureAnalysis a;
  a.window = window;
  const TimingSeries series = to_timing_series(samples);
  if (tow_origin_us) {
    a.t0_us = static_cast<std::int64_t>(*tow_origin_us);
  } else if (!series.empty()) {
    a.t0_us = series.tow_us.front();
  }
  a.reference = extract_phase(series, window, Phase::kReference, a.t0_us);
  a.attack = extract_phase(series, window, Phase::kAttack, a.t0_us);
  a.reference_metrics = phase_metrics(a.reference);
  a.attack_metrics = phase_metrics(a.attack);
  a.plausibility = screen_positions(samples);
  return a;
}

CaptureAnalysis analyze_capture(const std::filesystem::path& capture, const PhaseWindow& window,
                                std::optional<std::uint64_t> tow_origin_us) {
  const auto decoded = codec::decode_file(capture);
  CaptureAnalysis a = analyze_samples(decoded.samples, window, tow_origin_us);
  a.diagnostics = decoded.diagnostics;
  return a;
}

nlohmann::json to_json(const Metric& metric) {
  return metric ? nlohmann::json(*metric) : nlohmann::json();
}

nlohmann::json to_json(const PhaseMetrics& m) {
  return {{"samples", m.samples},
          {"mean_rate_hz", to_json(m.mean_rate_hz)},
          {"longest_increment_s", to_json(m.longest_increment_s)},
          {"dd_jitter_s", to_json(m.dd_jitter_s)}};
}

nlohmann::json to_json(const LatencySummary& s, bool include_histogram) {
  nlohmann::json j{{"count", s.count},       {"median_s", s.median_s},
                   {"std_s", s.std_s},       {"min_s", s.min_s},
                   {"max_s", s.max_s},       {"p99_s", s.p99_s},
                   {"lower99_width_s", s.lower99_width_s}};
  if (include_histogram) {
    j["histogram"] = {{"edges_s", s.histogram.edges}, {"counts", s.histogram.counts}};
  }
  return j;
}

nlohmann::json to_json(const PlausibilityReport& r) {
  return {{"samples", r.samples},
          {"horizontal_std_m", r.horizontal_std_m},
          {"max_horizontal_excursion_m", r.max_horizontal_excursion_m},
          {"up_std_m", r.up_std_m},
          {"plausible", r.plausible}};
}

nlohmann::json to_json(const codec::DecodeDiagnostics& d) {
  return {{"packets_ok", d.packets_ok},
          {"crc_failures", d.crc_failures},
          {"header_rejects", d.header_rejects},
          {"bytes_skipped", d.bytes_skipped},
          {"truncated_bytes", d.truncated_bytes}};
}

nlohmann::json to_json(const PhaseWindow& w) {
  return {{"reference_s", {w.reference_begin_s, w.reference_end_s}},
          {"attack_s", {w.attack_begin_s, w.attack_end_s}}};
}

nlohmann::json to_json(const CaptureAnalysis& a) {
  nlohmann::json j{{"t0_us", a.t0_us},
                   {"window", to_json(a.window)},
                   {"decode", to_json(a.diagnostics)},
                   {"reference", to_json(a.reference_metrics)},
                   {"attack", to_json(a.attack_metrics)},
                   {"plausibility", to_json(a.plausibility)}};
  const auto& ref = a.reference_metrics.mean_rate_hz;
  const auto& att = a.attack_metrics.mean_rate_hz;
  j["attack_rate_ratio"] = (ref && att && *ref > 0.0) ? nlohmann::json(*att / *ref) : nlohmann::json();
  return j;
}

void write_increments_csv(const std::filesystem::path& path, const TimingSeries& series,
                          std::int64_t t0_us) {
  auto out = open_csv(path);
  out << "t_s,increment_s\n";
  for (std::size_t i = 1; i < series.size(); ++i) {
    out << static_cast<double>(series.tow_us[i] - t0_us) * 1e-6 << ','
        << static_cast<double>(series.tow_us[i] - series.tow_us[i - 1]) * 1e-6 << '\n';
  }
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  auto out = open_csv(path);
  out << "bin_lo_s,bin_hi_s,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
  }
}

void write_positions_csv(const std::filesystem::path& path, std::span<const SolutionSample> samples) {
  auto out = open_csv(path);
  out << "tow_us,east_m,north_m,up_m\n";
  if (samples.empty()) return;
  const auto& first = samples.front();
  for (const auto& s : samples) {
    out << s.tow_us << ',' << (s.east_mm - first.east_mm) * 1e-3 << ','
        << (s.north_mm - first.north_mm) * 1e-3 << ',' << (s.up_mm - first.up_mm) * 1e-3 << '\n';
  }
}

}  // namespace dosbench::analysis
