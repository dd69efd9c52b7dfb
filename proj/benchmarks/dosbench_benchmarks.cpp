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

#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dosbench/control_workload.hpp"
#include "dosbench/packet_forge.hpp"
#include "dosbench/stream_codec.hpp"
#include "dosbench/timing_analysis.hpp"

namespace {

using namespace dosbench;

void BM_MpcStep(benchmark::State& state) {
  workload::MpcConfig cfg;
  cfg.horizon = static_cast<int>(state.range(0));
  workload::MpcSolver solver(cfg);
  const auto ref =
      workload::make_reference_path(cfg.horizon + 1, 10.0, cfg.dt, cfg.vehicle.wheelbase);
  const std::vector<workload::VehicleState> window(ref.begin() + 1, ref.end());
  workload::VehicleState s{0.0, 0.5, 0.0, 10.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver.step(s, window));
  }
}
BENCHMARK(BM_MpcStep)->Arg(10)->Arg(20)->Arg(40);

std::vector<SolutionSample> samples(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<SolutionSample> out(n);
  std::uint64_t tow = 345'600'000'000ULL;
  for (auto& s : out) {
    tow += 16'000 + rng() % 1'000;
    s.tow_us = tow;
    s.sys_time_us = tow + 2'530'000 + rng() % 8'000;
    s.east_mm = static_cast<std::int32_t>(rng() % 40);
  }
  return out;
}

void BM_Encode(benchmark::State& state) {
  const auto in = samples(1'000);
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * codec::kFrameBytes);
  for (auto _ : state) {
    out.clear();
    for (const auto& s : in) codec::append_encoded(s, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(out.size()));
}
BENCHMARK(BM_Encode);

void BM_DecodeStream(benchmark::State& state) {
  std::vector<std::uint8_t> bytes;
  for (const auto& s : samples(1'000)) codec::append_encoded(s, bytes);
  for (auto _ : state) {
    benchmark::DoNotOptimize(codec::decode_stream(bytes));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_DecodeStream);

void BM_Crc16(benchmark::State& state) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(state.range(0)), 0x5A);
  for (auto _ : state) benchmark::DoNotOptimize(codec::crc16_ccitt_false(data));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Crc16)->Arg(34)->Arg(4096);

void BM_InternetChecksum(benchmark::State& state) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(state.range(0)), 0xA5);
  for (auto _ : state) benchmark::DoNotOptimize(forge::compute_checksum(data));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_InternetChecksum)->Arg(8)->Arg(1480);

void BM_BuildEchoRequest(benchmark::State& state) {
  std::uint16_t seq = 0;
  for (auto _ : state) benchmark::DoNotOptimize(forge::build_echo_request(0x4400, seq++, {}));
}
BENCHMARK(BM_BuildEchoRequest);

void BM_DoubleDifferenceJitter(benchmark::State& state) {
  const auto series = analysis::to_timing_series(samples(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(analysis::double_difference_jitter(series));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_DoubleDifferenceJitter)->Arg(1'800)->Arg(10'000);

}  // namespace

BENCHMARK_MAIN();
