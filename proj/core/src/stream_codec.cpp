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

#include "dosbench/stream_codec.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "dosbench/error.hpp"

namespace dosbench::codec {
namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    auto crc = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
    table[i] = crc;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

template <typename T>
void put_le(std::uint8_t* out, T value) {
  using U = std::make_unsigned_t<T>;
  auto v = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<std::uint8_t>(v & 0xFF);
    v = static_cast<U>(v >> 8);
  }
}

template <typename T>
T get_le(const std::uint8_t* in) {
  using U = std::make_unsigned_t<T>;
  U v = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<U>((v << 8) | in[i]);
  return static_cast<T>(v);
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) noexcept {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ byte) & 0xFF]);
  }
  return crc;
}

Frame encode(const SolutionSample& sample) noexcept {
  Frame f{};
  f[0] = kSync0;
  f[1] = kSync1;
  f[2] = kVersion;
  f[3] = kMsgSolution;
  put_le<std::uint16_t>(&f[4], kSolutionPayloadBytes);
  std::uint8_t* p = &f[kHeaderBytes];
  put_le(p + 0, sample.tow_us);
  put_le(p + 8, sample.sys_time_us);
  put_le(p + 16, sample.east_mm);
  put_le(p + 20, sample.north_mm);
  put_le(p + 24, sample.up_mm);
  p[28] = static_cast<std::uint8_t>(sample.fix_status);
  p[29] = 0;
  const auto crc = crc16_ccitt_false(std::span<const std::uint8_t>(f).subspan(2, kFrameBytes - 4));
  put_le(&f[kFrameBytes - kCrcBytes], crc);
  return f;
}

void append_encoded(const SolutionSample& sample, std::vector<std::uint8_t>& out) {
  const Frame f = encode(sample);
  out.insert(out.end(), f.begin(), f.end());
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes, std::vector<SolutionSample>& out) {
  pending_.insert(pending_.end(), bytes.begin(), bytes.end());
  const std::size_t size = pending_.size();
  const std::uint8_t* buf = pending_.data();
  std::size_t pos = 0;

  while (pos < size) {
    std::size_t sync = pos;
    while (sync + 1 < size && !(buf[sync] == kSync0 && buf[sync + 1] == kSync1)) ++sync;
    if (sync + 1 >= size) {
      // Keep a trailing 0xA5; it may start the next sync word.
      const std::size_t keep = (buf[size - 1] == kSync0) ? size - 1 : size;
      diag_.bytes_skipped += keep - pos;
      pos = keep;
      break;
    }
    diag_.bytes_skipped += sync - pos;
    pos = sync;

    if (size - pos < kHeaderBytes) break;
    const std::uint8_t* frame = buf + pos;
    if (frame[2] != kVersion || frame[3] != kMsgSolution ||
        get_le<std::uint16_t>(frame + 4) != kSolutionPayloadBytes) {
      ++diag_.header_rejects;
      ++diag_.bytes_skipped;
      ++pos;
      continue;
    }
    if (size - pos < kFrameBytes) break;

    const auto expected = get_le<std::uint16_t>(frame + kFrameBytes - kCrcBytes);
    const auto actual = crc16_ccitt_false(std::span<const std::uint8_t>(frame + 2, kFrameBytes - 4));
    const std::uint8_t* p = frame + kHeaderBytes;
    if (expected != actual) {
      ++diag_.crc_failures;
      ++diag_.bytes_skipped;
      ++pos;
      continue;
    }
    if (p[28] > static_cast<std::uint8_t>(FixStatus::kFixed) || p[29] != 0) {
      ++diag_.header_rejects;
      ++diag_.bytes_skipped;
      ++pos;
      continue;
    }

    SolutionSample s;
    s.tow_us = get_le<std::uint64_t>(p);
    s.sys_time_us = get_le<std::uint64_t>(p + 8);
    s.east_mm = get_le<std::int32_t>(p + 16);
    s.north_mm = get_le<std::int32_t>(p + 20);
    s.up_mm = get_le<std::int32_t>(p + 24);
    s.fix_status = static_cast<FixStatus>(p[28]);
    out.push_back(s);
    ++diag_.packets_ok;
    pos += kFrameBytes;
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(pos));
}

void StreamDecoder::finish() {
  diag_.truncated_bytes += pending_.size();
  pending_.clear();
}

DecodeResult decode_stream(std::span<const std::uint8_t> bytes) {
  StreamDecoder decoder;
  DecodeResult result;
  decoder.feed(bytes, result.samples);
  decoder.finish();
  result.diagnostics = decoder.diagnostics();
  return result;
}

DecodeResult decode_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open capture " + path.string());
  StreamDecoder decoder;
  DecodeResult result;
  std::vector<char> chunk(1 << 16);
  while (in) {
    in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    decoder.feed({reinterpret_cast<const std::uint8_t*>(chunk.data()), got}, result.samples);
  }
  decoder.finish();
  result.diagnostics = decoder.diagnostics();
  return result;
}

nlohmann::json to_json(const CaptureMeta& meta) {
  nlohmann::json j{
      {"capture_start_wall_us", meta.start_wall_us},
      {"endpoint", meta.endpoint.to_string()},
      {"duration_s", meta.duration_s},
      {"bytes", meta.bytes},
  };
  j["tow_origin_us"] = meta.tow_origin_us ? nlohmann::json(*meta.tow_origin_us) : nlohmann::json();
  return j;
}

CaptureMeta capture_meta_from_json(const nlohmann::json& j) {
  CaptureMeta meta;
  try {
    meta.start_wall_us = j.value("capture_start_wall_us", std::int64_t{0});
    meta.endpoint = parse_endpoint(j.value("endpoint", std::string("127.0.0.1:6001")), 6001);
    meta.duration_s = j.value("duration_s", 0.0);
    meta.bytes = j.value("bytes", std::uint64_t{0});
    if (j.contains("tow_origin_us") && !j["tow_origin_us"].is_null()) {
      meta.tow_origin_us = j["tow_origin_us"].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad capture metadata: ") + e.what());
  }
  return meta;
}

void write_capture_meta(const std::filesystem::path& path, const CaptureMeta& meta) {
  std::ofstream out(path);
  out << to_json(meta).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

CaptureMeta read_capture_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "bad JSON in " + path.string() + ": " + e.what());
  }
  return capture_meta_from_json(j);
}

}  // namespace dosbench::codec
