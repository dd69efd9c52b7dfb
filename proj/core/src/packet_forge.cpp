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

#include "dosbench/packet_forge.hpp"

#include <arpa/inet.h>
#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <thread>

#include "dosbench/error.hpp"
#include "net.hpp"

namespace dosbench::forge {
namespace {

void put_be16(std::uint8_t* out, std::uint16_t value) {
  out[0] = static_cast<std::uint8_t>(value >> 8);
  out[1] = static_cast<std::uint8_t>(value & 0xFF);
}

std::uint16_t get_be16(const std::uint8_t* in) {
  return static_cast<std::uint16_t>((in[0] << 8) | in[1]);
}

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// Fills the 8-byte header in place and stamps the checksum.
void stamp_header(std::span<std::uint8_t> message, std::uint16_t identifier,
                  std::uint16_t sequence) {
  message[0] = kIcmpEchoRequest;
  message[1] = 0;
  put_be16(&message[2], 0);
  put_be16(&message[4], identifier);
  put_be16(&message[6], sequence);
  put_be16(&message[2], compute_checksum(message));
}

}  // namespace

std::uint16_t compute_checksum(std::span<const std::uint8_t> data) noexcept {
  std::uint64_t sum = 0;
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2) {
    sum += static_cast<std::uint32_t>((data[i] << 8) | data[i + 1]);
  }
  if (i < data.size()) sum += static_cast<std::uint32_t>(data[i] << 8);
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum & 0xFFFF);
}

std::vector<std::uint8_t> IcmpEchoPacket::serialize() const {
  std::vector<std::uint8_t> out(icmp_size());
  out[0] = icmp_type;
  out[1] = code;
  put_be16(&out[2], checksum);
  put_be16(&out[4], identifier);
  put_be16(&out[6], sequence);
  std::copy(payload.begin(), payload.end(), out.begin() + kIcmpHeaderBytes);
  return out;
}

bool checksum_valid(const IcmpEchoPacket& packet) {
  auto bytes = packet.serialize();
  put_be16(&bytes[2], 0);
  return compute_checksum(bytes) == packet.checksum;
}

IcmpEchoPacket build_echo_request(std::uint16_t identifier, std::uint16_t sequence,
                                  std::span<const std::uint8_t> payload,
                                  std::size_t max_payload) {
  if (payload.size() > max_payload) {
    throw Error(ErrorCode::kSize, "payload of " + std::to_string(payload.size()) +
                                      " bytes exceeds budget of " +
                                      std::to_string(max_payload));
  }
  IcmpEchoPacket packet;
  packet.identifier = identifier;
  packet.sequence = sequence;
  packet.payload.assign(payload.begin(), payload.end());
  packet.checksum = compute_checksum(packet.serialize());
  return packet;
}

bool parse_echo_request(std::span<const std::uint8_t> bytes, IcmpEchoPacket& out) {
  if (bytes.size() < kIcmpHeaderBytes) return false;
  out.icmp_type = bytes[0];
  out.code = bytes[1];
  out.checksum = get_be16(&bytes[2]);
  out.identifier = get_be16(&bytes[4]);
  out.sequence = get_be16(&bytes[6]);
  out.payload.assign(bytes.begin() + kIcmpHeaderBytes, bytes.end());
  return true;
}

TokenBucket::TokenBucket(double rate_per_s, double burst, double now_s)
    : rate_(rate_per_s), burst_(std::max(1.0, burst)), tokens_(1.0), last_s_(now_s) {}

void TokenBucket::refill(double now_s) {
  if (now_s > last_s_) {
    tokens_ = std::min(burst_, tokens_ + (now_s - last_s_) * rate_);
    last_s_ = now_s;
  }
}

bool TokenBucket::try_consume(double now_s) {
  refill(now_s);
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

double TokenBucket::wait_time(double now_s) {
  refill(now_s);
  return tokens_ >= 1.0 ? 0.0 : (1.0 - tokens_) / rate_;
}

std::string_view to_string(TransportMode mode) noexcept {
  return mode == TransportMode::kRawIcmp ? "icmp" : "udp";
}

TransportMode parse_transport_mode(std::string_view text) {
  if (text == "icmp" || text == "raw-icmp") return TransportMode::kRawIcmp;
  if (text == "udp" || text == "udp-fallback") return TransportMode::kUdpFallback;
  throw Error(ErrorCode::kConfig, "unknown transport mode '" + std::string(text) + "'");
}

void validate(const FloodConfig& config) {
  if (config.attacker_count < 1) throw Error(ErrorCode::kConfig, "attacker_count must be >= 1");
  if (config.target_rate_pps < 1) throw Error(ErrorCode::kConfig, "target_rate_pps must be >= 1");
  if (!(config.duration_s > 0.0)) throw Error(ErrorCode::kConfig, "duration_s must be > 0");
  if (config.payload_len > kDefaultMaxPayload) {
    throw Error(ErrorCode::kSize, "payload_len exceeds MTU budget");
  }
}

FloodStats flood(const FloodConfig& config, std::stop_token stop) {
  validate(config);
  const bool raw = config.transport_mode == TransportMode::kRawIcmp;

  sockaddr_in dest = net::resolve(config.target);
  if (raw) dest.sin_port = 0;

  {
    // Routing probe: connect() on a datagram socket fails fast for
    // unreachable networks without sending anything.
    net::Fd probe(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
    sockaddr_in probe_addr = dest;
    if (probe_addr.sin_port == 0) probe_addr.sin_port = htons(9);
    if (!probe.valid() ||
        ::connect(probe.get(), reinterpret_cast<sockaddr*>(&probe_addr), sizeof(probe_addr)) != 0) {
      throw Error(ErrorCode::kEndpoint,
                  "target " + config.target.to_string() + " unreachable: " +
                      net::errno_message(errno));
    }
  }

  const auto senders = static_cast<std::size_t>(config.attacker_count);
  std::vector<net::Fd> sockets;
  sockets.reserve(senders);
  for (std::size_t i = 0; i < senders; ++i) {
    int fd = raw ? ::socket(AF_INET, SOCK_RAW | SOCK_CLOEXEC, IPPROTO_ICMP)
                 : ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd < 0) {
      int err = errno;
      if (raw && (err == EPERM || err == EACCES)) {
        throw Error(ErrorCode::kPrivilege,
                    "raw-icmp mode requires CAP_NET_RAW (try --mode udp)");
      }
      throw Error(ErrorCode::kEndpoint, "socket: " + net::errno_message(err));
    }
    sockets.emplace_back(fd);
  }

  const double per_sender_rate =
      static_cast<double>(config.target_rate_pps) / static_cast<double>(senders);
  // Up to 1 ms of catch-up after a preemption.
  const double burst = std::max(1.0, per_sender_rate * 1e-3);

  std::vector<std::atomic<std::uint64_t>> sent(senders);
  std::vector<std::atomic<std::uint64_t>> errors(senders);
  const double start = now_s();
  const double deadline = start + config.duration_s;

  auto worker = [&](std::size_t index) {
    std::vector<std::uint8_t> message(kIcmpHeaderBytes + config.payload_len, 0);
    const auto identifier = static_cast<std::uint16_t>(config.identifier_base + index);
    std::uint16_t sequence = 0;
    TokenBucket bucket(per_sender_rate, burst, now_s());
    const int fd = sockets[index].get();
    while (!stop.stop_requested()) {
      const double now = now_s();
      if (now >= deadline) break;
      if (bucket.try_consume(now)) {
        stamp_header(message, identifier, sequence);
        ssize_t rc = ::sendto(fd, message.data(), message.size(), MSG_DONTWAIT,
                              reinterpret_cast<const sockaddr*>(&dest), sizeof(dest));
        if (rc == static_cast<ssize_t>(message.size())) {
          sent[index].fetch_add(1, std::memory_order_relaxed);
        } else {
          errors[index].fetch_add(1, std::memory_order_relaxed);
        }
        ++sequence;
        continue;
      }
      const double wait = std::min(bucket.wait_time(now), deadline - now);
      if (wait > 1e-3) {
        // Sleep coarsely, then busy-wait the sub-millisecond remainder.
        std::this_thread::sleep_for(std::chrono::duration<double>(wait - 1e-3));
      } else {
        std::this_thread::yield();
      }
    }
  };

  {
    std::vector<std::jthread> threads;
    threads.reserve(senders);
    for (std::size_t i = 0; i < senders; ++i) threads.emplace_back(worker, i);
  }

  FloodStats stats;
  stats.wall_duration_s = now_s() - start;
  stats.offered_rate_pps = static_cast<double>(config.target_rate_pps);
  for (std::size_t i = 0; i < senders; ++i) {
    const auto n = sent[i].load();
    stats.per_sender_sent.push_back(n);
    stats.packets_sent += n;
    stats.send_errors += errors[i].load();
  }
  stats.achieved_rate_pps = stats.wall_duration_s > 0.0
                                ? static_cast<double>(stats.packets_sent) / stats.wall_duration_s
                                : 0.0;
  return stats;
}

}  // namespace dosbench::forge
