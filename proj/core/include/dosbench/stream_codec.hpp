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

// Binary framing for solution samples.
//
// Frame layout (all multi-byte integers little-endian):
//
//   offset  size  field
//   0       2     sync 0xA5 0x5A
//   2       1     version (0x01)
//   3       1     msg_id (0x10 = solution)
//   4       2     payload_len (30)
//   6       30    payload: tow_us u64, sys_time_us u64, east/north/up i32,
//                 fix_status u8, pad u8 (0)
//   36      2     CRC-16/CCITT-FALSE over bytes [2, 36)

#ifndef DOSBENCH_STREAM_CODEC_HPP_
#define DOSBENCH_STREAM_CODEC_HPP_

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dosbench/endpoint.hpp"
#include "dosbench/solution.hpp"

namespace dosbench::codec {

inline constexpr std::uint8_t kSync0 = 0xA5;
inline constexpr std::uint8_t kSync1 = 0x5A;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::uint8_t kMsgSolution = 0x10;
inline constexpr std::size_t kHeaderBytes = 6;
inline constexpr std::size_t kSolutionPayloadBytes = 30;
inline constexpr std::size_t kCrcBytes = 2;
inline constexpr std::size_t kFrameBytes = kHeaderBytes + kSolutionPayloadBytes + kCrcBytes;

using Frame = std::array<std::uint8_t, kFrameBytes>;

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) noexcept;

Frame encode(const SolutionSample& sample) noexcept;
void append_encoded(const SolutionSample& sample, std::vector<std::uint8_t>& out);

struct DecodeDiagnostics {
  std::uint64_t packets_ok = 0;
  std::uint64_t crc_failures = 0;
  // Header candidates rejected for version, msg_id, length or payload field.
  std::uint64_t header_rejects = 0;
  std::uint64_t bytes_skipped = 0;
  // Bytes left over at finish() that never formed a complete frame.
  std::uint64_t truncated_bytes = 0;
};

/// Incremental decoder. Bytes may arrive in arbitrary chunks; on a bad
/// candidate it advances one byte past the sync position and rescans.
class StreamDecoder {
 public:
  // Appends decoded samples to out.
  void feed(std::span<const std::uint8_t> bytes, std::vector<SolutionSample>& out);
  // Marks end of stream; leftover bytes are counted as truncated.
  void finish();

  const DecodeDiagnostics& diagnostics() const noexcept { return diag_; }

 private:
  std::vector<std::uint8_t> pending_;
  DecodeDiagnostics diag_;
};

struct DecodeResult {
  std::vector<SolutionSample> samples;
  DecodeDiagnostics diagnostics;
};

DecodeResult decode_stream(std::span<const std::uint8_t> bytes);
DecodeResult decode_file(const std::filesystem::path& path);

struct CaptureGap {
  double offset_s = 0.0;
  double duration_s = 0.0;
};

struct CaptureSummary {
  std::uint64_t bytes = 0;
  double duration_s = 0.0;
  // Capture start, microseconds since the Unix epoch (system clock).
  std::int64_t start_wall_us = 0;
  std::vector<CaptureGap> gaps;
  bool early_termination = false;
};

/// Sidecar metadata written next to a .anb capture.
struct CaptureMeta {
  std::int64_t start_wall_us = 0;
  Endpoint endpoint;
  double duration_s = 0.0;
  std::uint64_t bytes = 0;
  // GPS tow at run start when known (simulated device); otherwise analysis
  // falls back to the first decoded sample.
  std::optional<std::uint64_t> tow_origin_us;
};

nlohmann::json to_json(const CaptureMeta& meta);
CaptureMeta capture_meta_from_json(const nlohmann::json& j);
void write_capture_meta(const std::filesystem::path& path, const CaptureMeta& meta);
CaptureMeta read_capture_meta(const std::filesystem::path& path);

struct RecordOptions {
  std::chrono::milliseconds connect_timeout{2000};
  // Silence longer than this is reported as a gap.
  double gap_threshold_s = 0.5;
};

/// Connects to endpoint and writes the raw byte stream verbatim to out_path
/// until duration_s elapses, stop is requested, or the peer closes (which
/// sets early_termination). Throws Error(kEndpoint) if the connect fails.
CaptureSummary record(const Endpoint& endpoint, const std::filesystem::path& out_path,
                      double duration_s, std::stop_token stop = {},
                      const RecordOptions& options = {});

}  // namespace dosbench::codec

#endif  // DOSBENCH_STREAM_CODEC_HPP_
