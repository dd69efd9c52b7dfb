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

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "dosbench/device_sim.hpp"
#include "dosbench/error.hpp"
#include "dosbench/stream_codec.hpp"
#include "net.hpp"

namespace dosbench::device {
namespace {

using Clock = std::chrono::steady_clock;

class FrameQueue {
 public:
  explicit FrameQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

  // Returns false when the oldest frame had to be discarded.
  bool push(const codec::Frame& frame) {
    bool dropped = false;
    {
      std::lock_guard lock(mu_);
      if (frames_.size() >= capacity_) {
        frames_.pop_front();
        dropped = true;
      }
      frames_.push_back(frame);
    }
    cv_.notify_one();
    return !dropped;
  }

  // Moves everything queued into out; waits up to timeout when empty.
  void drain(std::vector<codec::Frame>& out, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !frames_.empty() || closed_; });
    out.assign(frames_.begin(), frames_.end());
    frames_.clear();
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed_and_empty() {
    std::lock_guard lock(mu_);
    return closed_ && frames_.empty();
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<codec::Frame> frames_;
  bool closed_ = false;
};

bool send_all(int fd, const std::uint8_t* data, std::size_t len) {
  while (len > 0) {
    const ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

std::uint64_t host_clock_us() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now().time_since_epoch())
          .count());
}

}  // namespace

DeviceServer::DeviceServer(const Endpoint& listen) {
  net::Fd fd = net::tcp_listen(listen);
  port_ = net::local_port(fd.get());
  ::fcntl(fd.get(), F_SETFL, ::fcntl(fd.get(), F_GETFL, 0) | O_NONBLOCK);
  listen_fd_ = ::dup(fd.get());
}

DeviceServer::~DeviceServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

RunSummary DeviceServer::run(const DeviceConfig& config,
                             const std::optional<DegradationScript>& script, std::uint64_t seed,
                             double duration_s, const StreamOptions& options,
                             std::stop_token stop) {
  if (script) validate(*script, duration_s);
  if (!(options.time_scale > 0.0)) throw Error(ErrorCode::kConfig, "time_scale must be > 0");
  if (options.live_clock && options.time_scale != 1.0) {
    throw Error(ErrorCode::kConfig, "live clock requires time_scale 1");
  }

  DeviceModel model(config, script, seed);
  FrameQueue queue(options.queue_capacity);
  RunSummary summary;
  std::atomic<std::uint64_t> clients_served{0};
  std::atomic<std::uint64_t> disconnects{0};
  std::atomic<std::uint64_t> frames_sent{0};
  std::mutex client_mu;
  std::condition_variable_any client_cv;

  // Writer: accepts clients and fans queued frames out to all of them.
  std::jthread writer([&](std::stop_token writer_stop) {
    std::vector<net::Fd> clients;
    std::vector<codec::Frame> batch;
    while (true) {
      for (;;) {
        int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) break;
        timeval tv{1, 0};
        ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
        clients.emplace_back(fd);
        {
          std::lock_guard lock(client_mu);
          clients_served.fetch_add(1);
        }
        client_cv.notify_all();
        spdlog::debug("device-sim: client connected ({} active)", clients.size());
      }
      queue.drain(batch, std::chrono::milliseconds(5));
      for (const auto& frame : batch) {
        for (auto it = clients.begin(); it != clients.end();) {
          if (send_all(it->get(), frame.data(), frame.size())) {
            frames_sent.fetch_add(1, std::memory_order_relaxed);
            ++it;
          } else {
            spdlog::warn("device-sim: client disconnected; still listening");
            disconnects.fetch_add(1);
            it = clients.erase(it);
          }
        }
      }
      if (writer_stop.stop_requested() && queue.closed_and_empty()) break;
    }
    for (auto& c : clients) ::shutdown(c.get(), SHUT_WR);
  });

  if (options.wait_for_client) {
    std::unique_lock lock(client_mu);
    client_cv.wait_for(lock, stop, std::chrono::duration<double>(options.client_wait_timeout_s),
                       [&] { return clients_served.load() > 0; });
    if (clients_served.load() == 0) {
      summary.client_timeout = !stop.stop_requested();
      queue.close();
      writer.request_stop();
      writer.join();
      return summary;
    }
  }

  const auto run_start = Clock::now();
  const std::uint64_t host_start_us = host_clock_us();
  while (!stop.stop_requested()) {
    auto next = model.next(duration_s);
    if (!next) break;
    const auto due = run_start + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(next->emit_s / options.time_scale));
    std::this_thread::sleep_until(due);
    if (options.live_clock) {
      next->sample.sys_time_us =
          config.tow_origin_us + config.clock_offset_us + (host_clock_us() - host_start_us);
    }
    ++summary.frames_queued;
    if (!queue.push(codec::encode(next->sample))) ++summary.queue_overflows;
  }
  // Let the run occupy its full duration even if the last epoch came early.
  if (!stop.stop_requested()) {
    std::this_thread::sleep_until(
        run_start + std::chrono::duration_cast<Clock::duration>(
                        std::chrono::duration<double>(duration_s / options.time_scale)));
  }
  summary.wall_duration_s = std::chrono::duration<double>(Clock::now() - run_start).count();

  queue.close();
  writer.request_stop();
  writer.join();

  summary.counters = model.counters();
  summary.frames_sent = frames_sent.load();
  summary.clients_served = clients_served.load();
  summary.disconnects = disconnects.load();
  return summary;
}

RunSummary stream(const Endpoint& listen, const DeviceConfig& config,
                  const std::optional<DegradationScript>& script, std::uint64_t seed,
                  double duration_s, const StreamOptions& options, std::stop_token stop) {
  DeviceServer server(listen);
  spdlog::info("device-sim: listening on {}:{}", listen.host, server.port());
  return server.run(config, script, seed, duration_s, options, stop);
}

}  // namespace dosbench::device
