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

#include <poll.h>
#include <sys/socket.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <fstream>

#include "dosbench/error.hpp"
#include "dosbench/stream_codec.hpp"
#include "net.hpp"

namespace dosbench::codec {

CaptureSummary record(const Endpoint& endpoint, const std::filesystem::path& out_path,
                      double duration_s, std::stop_token stop, const RecordOptions& options) {
  using Clock = std::chrono::steady_clock;
  net::Fd sock = net::tcp_connect(endpoint, options.connect_timeout);

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + out_path.string());

  CaptureSummary summary;
  summary.start_wall_us = std::chrono::duration_cast<std::chrono::microseconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(std::max(0.0, duration_s)));
  auto elapsed = [&](Clock::time_point t) {
    return std::chrono::duration<double>(t - start).count();
  };
  auto last_data = start;
  std::vector<char> buffer(1 << 16);

  while (!stop.stop_requested()) {
    const auto now = Clock::now();
    if (now >= deadline) break;
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd pfd{sock.get(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::clamp<long long>(remaining, 1, 50)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      summary.early_termination = true;
      break;
    }
    if (rc == 0) continue;
    const ssize_t got = ::recv(sock.get(), buffer.data(), buffer.size(), 0);
    if (got <= 0) {
      if (got < 0 && errno == EINTR) continue;
      summary.early_termination = true;
      break;
    }
    const auto arrived = Clock::now();
    const double silence = std::chrono::duration<double>(arrived - last_data).count();
    if (silence > options.gap_threshold_s) {
      summary.gaps.push_back({elapsed(last_data), silence});
    }
    last_data = arrived;
    out.write(buffer.data(), got);
    summary.bytes += static_cast<std::uint64_t>(got);
  }

  const auto end = Clock::now();
  const double trailing = std::chrono::duration<double>(end - last_data).count();
  if (summary.bytes > 0 && trailing > options.gap_threshold_s && !summary.early_termination) {
    summary.gaps.push_back({elapsed(last_data), trailing});
  }
  summary.duration_s = elapsed(end);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to " + out_path.string() + " failed");
  return summary;
}

}  // namespace dosbench::codec
