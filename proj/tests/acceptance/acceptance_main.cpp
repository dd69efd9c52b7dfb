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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria, not counting those named with
// --expect-fail NAME, which are still evaluated and reported.

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "dosbench/control_workload.hpp"
#include "dosbench/device_sim.hpp"
#include "dosbench/orchestrator.hpp"
#include "dosbench/packet_forge.hpp"
#include "dosbench/stream_codec.hpp"
#include "dosbench/timing_analysis.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace dosbench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

analysis::TimingSeries random_series(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<std::int64_t> inc(1, 40'000), lat(0, 120'000);
  analysis::TimingSeries s;
  std::int64_t tow = 345'600'000'000;
  for (int i = 0; i < n; ++i) {
    tow += inc(rng);
    s.push_back(tow, tow + 2'500'000 + lat(rng));
  }
  return s;
}

Outcome jitter_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_series(rng, 10'000);
    const double got = *analysis::double_difference_jitter(s);
    worst = std::max(worst, std::abs(got - oracle::dd_jitter(s.tow_us, s.sys_us)));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 10.0,
          fmt("max |diff| %.3g s over 100 series of 10000, %.2f s", worst, elapsed)};
}

Outcome jitter_null() {
  std::mt19937_64 rng(102);
  bool ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_series(rng, 2'000);
    const auto base = *analysis::double_difference_jitter(s);
    // Constant latency.
    auto constant = s;
    const std::int64_t c = static_cast<std::int64_t>(rng() % 1'000'000);
    for (std::size_t i = 0; i < s.size(); ++i) constant.sys_us[i] = constant.tow_us[i] + c;
    ok = ok && *analysis::double_difference_jitter(constant) == 0.0;
    // Offsets on tow, on sys, on both.
    const std::int64_t a = static_cast<std::int64_t>(rng() % 100'000'000);
    const std::int64_t b = static_cast<std::int64_t>(rng() % 100'000'000);
    auto shifted_tow = s, shifted_sys = s, shifted_both = s;
    for (std::size_t i = 0; i < s.size(); ++i) {
      shifted_tow.tow_us[i] += a;
      shifted_sys.sys_us[i] += b;
      shifted_both.tow_us[i] += a;
      shifted_both.sys_us[i] += b;
    }
    ok = ok && *analysis::double_difference_jitter(shifted_tow) == base &&
         *analysis::double_difference_jitter(shifted_sys) == base &&
         *analysis::double_difference_jitter(shifted_both) == base;
  }
  return {ok, "20 random series: constant latency -> 0, offsets leave result bit-identical"};
}

Outcome jitter_constructed() {
  analysis::TimingSeries s;
  for (int i = 0; i < 1'000; ++i) s.push_back(i * 10'000LL, i * 10'000LL + (i % 2) * 5'000);
  const double j = *analysis::double_difference_jitter(s);
  return {std::abs(j - 0.010) <= 1e-4, fmt("jitter %.6f s at n = 1000 (expected 0.010)", j)};
}

// Shared scripted experiments for the GNSS reproduction criteria.
struct GnssExperiments {
  orchestrator::AggregateReport single;
  orchestrator::AggregateReport dbl;
  double elapsed_s = 0.0;
  double nominal_rate_hz = 0.0;
  double spike_max_s = 0.0;
  std::string error;
};

GnssExperiments run_gnss(const fs::path& dir) {
  GnssExperiments e;
  orchestrator::ExperimentConfig c;
  c.scenario = orchestrator::Scenario::kGnss;
  c.repetitions = 10;
  c.gnss.time_scale = 60.0;
  e.nominal_rate_hz = c.gnss.device_config.schedule.nominal_rate_hz;
  e.spike_max_s = c.gnss.device_config.schedule.spike_max_s;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.gnss.preset = "single";
    e.single = orchestrator::run_gnss_experiment(c, orchestrator::RunMode::kScripted, dir / "single");
    c.gnss.preset = "double";
    e.dbl = orchestrator::run_gnss_experiment(c, orchestrator::RunMode::kScripted, dir / "double");
  } catch (const std::exception& ex) {
    e.error = ex.what();
  }
  e.elapsed_s = seconds_since(start);
  return e;
}

std::size_t ok_runs(const orchestrator::AggregateReport& r) {
  return static_cast<std::size_t>(std::count_if(r.gnss_runs.begin(), r.gnss_runs.end(),
                                                [](const auto& run) { return run.ok; }));
}

Outcome rate_reproduction(const GnssExperiments& e) {
  if (!e.error.empty()) return {false, e.error};
  const double s_ref = e.single.pooled_reference.mean_rate_hz.value_or(0.0);
  const double s_att = e.single.pooled_attack.mean_rate_hz.value_or(0.0);
  const double d_ref = e.dbl.pooled_reference.mean_rate_hz.value_or(0.0);
  const double d_att = e.dbl.pooled_attack.mean_rate_hz.value_or(0.0);
  const double single_ratio = s_att / s_ref;
  const double double_ratio = d_att / d_ref;
  const bool ok = ok_runs(e.single) == 10 && ok_runs(e.dbl) == 10 &&
                  std::abs(single_ratio - 0.50) <= 0.10 && std::abs(double_ratio - 0.05) <= 0.03 &&
                  s_ref >= 55.0 && s_ref <= 65.0 && d_ref >= 55.0 && d_ref <= 65.0 &&
                  e.elapsed_s < 120.0;
  return {ok, fmt("single %.3f, double %.3f of reference; reference %.2f / %.2f Hz; "
                  "20 runs in %.1f s",
                  single_ratio, double_ratio, s_ref, d_ref, e.elapsed_s)};
}

Outcome outage_reproduction(const GnssExperiments& e) {
  if (!e.error.empty()) return {false, e.error};
  const double attack_longest = e.dbl.pooled_attack.longest_increment_s.value_or(0.0);
  const double ref_longest = std::max(e.single.pooled_reference.longest_increment_s.value_or(1e9),
                                      e.dbl.pooled_reference.longest_increment_s.value_or(1e9));
  const double allowance = 2.0 / e.nominal_rate_hz + e.spike_max_s;
  return {attack_longest >= 1.0 && ref_longest <= allowance,
          fmt("double attack longest %.3f s; reference longest %.4f s (limit %.4f s)",
              attack_longest, ref_longest, allowance)};
}

Outcome sampling_signature(const GnssExperiments& e) {
  if (!e.error.empty()) return {false, e.error};
  const double upper_us = (2.0 / e.nominal_rate_hz + 1e-3) * 1e6;
  std::size_t inside = 0, total = 0;
  for (const auto* report : {&e.single, &e.dbl}) {
    for (const auto& run : report->gnss_runs) {
      const auto& tow = run.analysis.reference.tow_us;
      for (std::size_t i = 1; i < tow.size(); ++i) {
        const auto d = tow[i] - tow[i - 1];
        ++total;
        if (d > 0 && static_cast<double>(d) < upper_us) ++inside;
      }
    }
  }
  const double share = total ? static_cast<double>(inside) / total : 0.0;
  return {total > 0 && share >= 0.999,
          fmt("%zu of %zu reference increments in (0, %.2f ms): %.5f", inside, total,
              upper_us / 1e3, share)};
}

SolutionSample random_sample(std::mt19937_64& rng) {
  SolutionSample s;
  s.tow_us = rng() % kGpsWeekUs;
  s.sys_time_us = rng();
  s.east_mm = static_cast<std::int32_t>(rng());
  s.north_mm = static_cast<std::int32_t>(rng());
  s.up_mm = static_cast<std::int32_t>(rng());
  s.fix_status = static_cast<FixStatus>(rng() % 3);
  return s;
}

Outcome codec_properties() {
  std::mt19937_64 rng(103);
  std::vector<SolutionSample> samples;
  std::vector<std::uint8_t> bytes;
  for (int i = 0; i < 10'000; ++i) {
    samples.push_back(random_sample(rng));
    codec::append_encoded(samples.back(), bytes);
  }
  const bool round_trip = codec::decode_stream(bytes).samples == samples;

  // Corrupt 1% of the stream bytes.
  std::vector<bool> corrupted(samples.size(), false);
  const std::size_t flips = bytes.size() / 100;
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t pos = rng() % bytes.size();
    bytes[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    corrupted[pos / codec::kFrameBytes] = true;
  }
  const auto decoded = codec::decode_stream(bytes);
  std::unordered_map<std::uint64_t, const SolutionSample*> by_tow;
  for (const auto& s : decoded.samples) by_tow[s.tow_us] = &s;
  auto recovered = [&](std::size_t i) {
    const auto it = by_tow.find(samples[i].tow_us);
    return it != by_tow.end() && *it->second == samples[i];
  };
  std::size_t clean = 0, clean_recovered = 0, resyncs = 0, resync_ok = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (corrupted[i]) continue;
    ++clean;
    const bool got = recovered(i);
    if (got) ++clean_recovered;
    if (i > 0 && corrupted[i - 1]) {
      ++resyncs;
      if (got) ++resync_ok;
    }
  }
  const double share = static_cast<double>(clean_recovered) / clean;
  return {round_trip && share >= 0.95 && resync_ok == resyncs,
          fmt("round trip %s on 10000; %zu/%zu clean packets recovered (%.4f); "
              "%zu/%zu resyncs after corruption",
              round_trip ? "exact" : "MISMATCH", clean_recovered, clean, share, resync_ok,
              resyncs)};
}

Outcome checksum_vectors() {
  std::mt19937_64 rng(104);
  int icmp_bad = 0, crc_bad = 0;
  for (int i = 0; i < 1'000; ++i) {
    std::vector<std::uint8_t> data(rng() % 1501);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    if (forge::compute_checksum(data) != oracle::internet_checksum(data)) ++icmp_bad;
    if (codec::crc16_ccitt_false(data) != oracle::crc16_ccitt_false(data)) ++crc_bad;
  }
  return {icmp_bad == 0 && crc_bad == 0,
          fmt("mismatches on 1000 random inputs: checksum %d, CRC %d", icmp_bad, crc_bad)};
}

// Loopback UDP receiver counting datagrams in batches.
class Sink {
 public:
  Sink() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    int buf = 256 << 20;
    if (::setsockopt(fd_, SOL_SOCKET, SO_RCVBUFFORCE, &buf, sizeof(buf)) != 0) {
      ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof(buf));
    }
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    timeval tv{0, 100'000};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    thread_ = std::jthread([this](std::stop_token stop) {
      constexpr int kBatch = 64;
      std::vector<std::array<std::uint8_t, 64>> bufs(kBatch);
      std::vector<iovec> iov(kBatch);
      std::vector<mmsghdr> msgs(kBatch);
      for (int i = 0; i < kBatch; ++i) {
        iov[i] = {bufs[i].data(), bufs[i].size()};
        msgs[i] = {};
        msgs[i].msg_hdr.msg_iov = &iov[i];
        msgs[i].msg_hdr.msg_iovlen = 1;
      }
      while (!stop.stop_requested()) {
        const int got = ::recvmmsg(fd_, msgs.data(), kBatch, MSG_WAITFORONE, nullptr);
        if (got > 0) received_.fetch_add(static_cast<std::uint64_t>(got));
      }
    });
  }
  ~Sink() {
    thread_.request_stop();
    thread_.join();
    ::close(fd_);
  }
  std::uint16_t port() const { return port_; }
  std::uint64_t received() const { return received_.load(); }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<std::uint64_t> received_{0};
  std::jthread thread_;
};

Outcome flood_pacing() {
  Sink sink;
  forge::FloodConfig c;
  c.target = {"127.0.0.1", sink.port()};
  c.target_rate_pps = 100'000;
  c.duration_s = 5.0;
  c.transport_mode = forge::TransportMode::kUdpFallback;
  const auto stats = forge::flood(c);
  // Let the receiver drain.
  std::uint64_t received = 0;
  for (int i = 0; i < 20; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (sink.received() == received && received > 0) break;
    received = sink.received();
  }
  received = sink.received();
  std::uint64_t per_sender = 0;
  for (auto n : stats.per_sender_sent) per_sender += n;
  const double rate_err = std::abs(stats.achieved_rate_pps - 100'000.0) / 100'000.0;
  const double implied = stats.packets_sent / stats.wall_duration_s;
  const bool consistent = per_sender == stats.packets_sent &&
                          std::abs(implied - stats.achieved_rate_pps) <= 1e-6 * implied &&
                          received <= stats.packets_sent &&
                          received >= 0.95 * static_cast<double>(stats.packets_sent);
  return {rate_err <= 0.20 && consistent,
          fmt("achieved %.0f pps over %.2f s (%.1f%% off target); sent %llu, received %llu, "
              "send errors %llu",
              stats.achieved_rate_pps, stats.wall_duration_s, 100.0 * rate_err,
              static_cast<unsigned long long>(stats.packets_sent),
              static_cast<unsigned long long>(received),
              static_cast<unsigned long long>(stats.send_errors))};
}

Outcome workload_properties() {
  workload::WorkloadConfig wc;
  wc.iterations = 2'000;
  const auto a = workload::run_benchmark(wc);
  const auto b = workload::run_benchmark(wc);
  const bool identical = a.trajectory == b.trajectory;

  workload::MpcConfig cfg;
  const auto& v = cfg.vehicle;
  const auto ref = workload::make_reference_path(cfg.horizon + 1, 10.0, cfg.dt, v.wheelbase);
  const std::vector<workload::VehicleState> window(ref.begin() + 1, ref.end());
  workload::MpcSolver solver(cfg);
  solver.step({0, 0.5, 0, 10}, window);
  const auto before = oracle::allocation_count();
  for (int i = 0; i < 1'000; ++i) solver.step({0.01 * i, 0.5, 0.01, 10}, window);
  const auto allocations = oracle::allocation_count() - before;

  std::vector<oracle::State> oref;
  for (const auto& r : window) oref.push_back({r.x, r.y, r.heading, r.speed});
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> lat(-2, 2), hd(-0.3, 0.3), sp(5, 15), lon(-1, 1);
  int beaten = 0;
  double worst = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const workload::VehicleState s{lon(rng), lat(rng), hd(rng), sp(rng)};
    workload::MpcSolver fresh(cfg);
    fresh.step(s, window);
    std::vector<oracle::Input> plan;
    for (const auto& u : fresh.last_plan()) plan.push_back({u.steering, u.acceleration});
    const oracle::State os{s.x, s.y, s.heading, s.speed};
    const double mine = oracle::tracking_cost(os, oref, plan, cfg.dt, v.wheelbase);
    const double best = oracle::grid_best_cost(os, oref, cfg.horizon, cfg.dt, v.wheelbase,
                                               v.steer_max, v.accel_min, v.accel_max);
    if (mine <= best + 1e-6) ++beaten;
    worst = std::max(worst, mine - best);
  }
  return {identical && allocations == 0 && beaten == 100,
          fmt("trajectories %s; %zu allocations in 1000 steps; grid beaten or matched on %d/100 "
              "(worst margin %.3g)",
              identical ? "bit-identical" : "DIFFER", allocations, beaten, worst)};
}

Outcome adstack_direction(const fs::path& dir) {
  orchestrator::ExperimentConfig c;
  c.scenario = orchestrator::Scenario::kAdStack;
  c.repetitions = 10;
  c.workload.iterations = 5'000;
  const auto report = orchestrator::run_adstack_experiment(c, orchestrator::RunMode::kScripted, dir);
  int ok = 0, median_up = 0, p99_up = 0;
  std::string medians;
  for (const auto& p : report.pairs) {
    const bool m = p.attack.median_s >= p.reference.median_s;
    const bool t = p.attack.p99_s >= p.reference.p99_s;
    median_up += m;
    p99_up += t;
    ok += m && t;
    medians += fmt(" %.0f/%.0f", p.reference.median_s * 1e6, p.attack.median_s * 1e6);
  }
  return {ok >= 8, fmt("%d/10 pairs with both >= reference (median %d/10, p99 %d/10); "
                       "median us ref/attack:%s",
                       ok, median_up, p99_up, medians.c_str())};
}

std::vector<SolutionSample> synthetic_run(std::uint64_t origin, std::mt19937_64& rng) {
  std::vector<SolutionSample> out;
  std::uniform_int_distribution<std::uint64_t> inc(1'000, 32'000), lat(20'000, 40'000);
  for (std::uint64_t t = 0; t <= 30'000'000; t += inc(rng)) {
    SolutionSample s;
    s.tow_us = origin + t;
    s.sys_time_us = s.tow_us + 2'500'000 + lat(rng);
    out.push_back(s);
  }
  return out;
}

Outcome phase_bookkeeping() {
  std::mt19937_64 rng(106);
  const std::uint64_t origin = 345'600'000'000ULL;
  const analysis::PhaseWindow window;
  std::vector<analysis::TimingSeries> ref_clean, att_clean, ref_dirty, att_dirty;
  std::size_t injected = 0;
  for (int run = 0; run < 10; ++run) {
    const auto clean = synthetic_run(origin, rng);
    auto dirty = clean;
    // Replace the guard band with arbitrary, wildly delayed samples.
    std::erase_if(dirty, [&](const SolutionSample& s) {
      return s.tow_us >= origin + 8'000'000 && s.tow_us < origin + 12'000'000;
    });
    std::vector<SolutionSample> band;
    for (std::uint64_t t = 8'000'000; t < 12'000'000; t += 1 + rng() % 400'000) {
      SolutionSample s;
      s.tow_us = origin + t;
      s.sys_time_us = s.tow_us + rng() % 5'000'000;
      band.push_back(s);
    }
    band.push_back({origin + 11'999'999, origin + 99'000'000, 0, 0, 0, FixStatus::kFixed});
    injected += band.size();
    dirty.insert(std::upper_bound(dirty.begin(), dirty.end(), band.front(),
                                  [](const auto& a, const auto& b) { return a.tow_us < b.tow_us; }),
                 band.begin(), band.end());
    const auto a = analysis::analyze_samples(clean, window, origin);
    const auto b = analysis::analyze_samples(dirty, window, origin);
    ref_clean.push_back(a.reference);
    att_clean.push_back(a.attack);
    ref_dirty.push_back(b.reference);
    att_dirty.push_back(b.attack);
  }
  auto same = [](const analysis::PhaseMetrics& x, const analysis::PhaseMetrics& y) {
    return x.samples == y.samples && x.mean_rate_hz == y.mean_rate_hz &&
           x.longest_increment_s == y.longest_increment_s && x.dd_jitter_s == y.dd_jitter_s;
  };
  const bool ok = same(analysis::pooled_phase_metrics(ref_clean),
                       analysis::pooled_phase_metrics(ref_dirty)) &&
                  same(analysis::pooled_phase_metrics(att_clean),
                       analysis::pooled_phase_metrics(att_dirty));
  return {ok, fmt("%zu samples injected in [8 s, 12 s) across 10 runs; pooled metrics %s", injected,
                  ok ? "bit-identical" : "CHANGED")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> expected_failures;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--expect-fail") expected_failures.insert(argv[i + 1]);
  }
  const fs::path dir = fs::temp_directory_path() / ("dosbench_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const GnssExperiments gnss = run_gnss(dir / "gnss");

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"jitter_oracle_equivalence", jitter_oracle},
      {"jitter_null_case", jitter_null},
      {"jitter_constructed", jitter_constructed},
      {"rate_reproduction", [&] { return rate_reproduction(gnss); }},
      {"outage_reproduction", [&] { return outage_reproduction(gnss); }},
      {"sampling_signature", [&] { return sampling_signature(gnss); }},
      {"codec_roundtrip_resync", codec_properties},
      {"checksum_crc_vectors", checksum_vectors},
      {"flood_pacing", flood_pacing},
      {"workload_determinism_fixed_cost", workload_properties},
      {"adstack_direction", [&] { return adstack_direction(dir / "adstack"); }},
      {"phase_bookkeeping", phase_bookkeeping},
  };

  int failed = 0;
  int unexpected = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const bool expected = expected_failures.count(name) > 0;
    if (!outcome.pass) {
      ++failed;
      if (!expected) ++unexpected;
    }
    std::printf("%s %s: %s%s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                outcome.detail.c_str(),
                (!outcome.pass && expected) ? " [expected failure on this host]" : "");
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  std::printf("%d/%zu criteria passed, %d expected failure(s), %d unexpected failure(s)\n",
              static_cast<int>(criteria.size()) - failed, criteria.size(), failed - unexpected,
              unexpected);
  return unexpected;
}
