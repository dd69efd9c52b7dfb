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

// ICMP echo-request construction and paced flood generation.

#ifndef DOSBENCH_PACKET_FORGE_HPP_
#define DOSBENCH_PACKET_FORGE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "dosbench/endpoint.hpp"

namespace dosbench::forge {

inline constexpr std::uint8_t kIcmpEchoRequest = 8;
inline constexpr std::size_t kIcmpHeaderBytes = 8;
inline constexpr std::size_t kIpv4HeaderBytes = 20;
// Ethernet MTU minus IPv4 and ICMP headers.
inline constexpr std::size_t kDefaultMaxPayload = 1500 - kIpv4HeaderBytes - kIcmpHeaderBytes;

/// Internet checksum: ones' complement of the ones'-complement sum of
/// big-endian 16-bit words. Odd-length input is zero-padded.
std::uint16_t compute_checksum(std::span<const std::uint8_t> data) noexcept;

struct IcmpEchoPacket {
  std::uint8_t icmp_type = kIcmpEchoRequest;
  std::uint8_t code = 0;
  std::uint16_t checksum = 0;
  std::uint16_t identifier = 0;
  std::uint16_t sequence = 0;
  std::vector<std::uint8_t> payload;

  std::size_t icmp_size() const noexcept { return kIcmpHeaderBytes + payload.size(); }
  std::size_t wire_size() const noexcept { return kIpv4HeaderBytes + icmp_size(); }

  // Network byte order, checksum as stored.
  std::vector<std::uint8_t> serialize() const;
};

// True when the stored checksum matches a recomputation with the field zeroed.
bool checksum_valid(const IcmpEchoPacket& packet);

// Throws Error(kSize) when payload exceeds max_payload.
IcmpEchoPacket build_echo_request(std::uint16_t identifier, std::uint16_t sequence,
                                  std::span<const std::uint8_t> payload,
                                  std::size_t max_payload = kDefaultMaxPayload);

// Parses an 8+N byte ICMP message; returns false on short input.
bool parse_echo_request(std::span<const std::uint8_t> bytes, IcmpEchoPacket& out);

/// Token bucket over an abstract clock in seconds. Starts with one token so
/// the first send is immediate; burst bounds catch-up after a stall.
class TokenBucket {
 public:
  TokenBucket(double rate_per_s, double burst, double now_s);

  // Consumes one token if available.
  bool try_consume(double now_s);
  // Seconds until one token is available (0 if available now).
  double wait_time(double now_s);

  double rate() const noexcept { return rate_; }

 private:
  void refill(double now_s);

  double rate_;
  double burst_;
  double tokens_;
  double last_s_;
};

enum class TransportMode { kRawIcmp, kUdpFallback };

std::string_view to_string(TransportMode mode) noexcept;
// Accepts "icmp"/"raw-icmp" and "udp"/"udp-fallback".
TransportMode parse_transport_mode(std::string_view text);

struct FloodConfig {
  // Port is only used in udp-fallback mode.
  Endpoint target{"127.0.0.1", 9};
  int attacker_count = 1;
  std::uint64_t target_rate_pps = 300'000;
  double duration_s = 1.0;
  std::size_t payload_len = 0;
  TransportMode transport_mode = TransportMode::kUdpFallback;
  std::uint16_t identifier_base = 0x4400;
};

void validate(const FloodConfig& config);

struct FloodStats {
  std::uint64_t packets_sent = 0;
  double achieved_rate_pps = 0.0;
  std::uint64_t send_errors = 0;
  double wall_duration_s = 0.0;
  // Offered (configured) aggregate rate, reported next to the achieved one.
  double offered_rate_pps = 0.0;
  std::vector<std::uint64_t> per_sender_sent;
};

/// Sends echo requests toward config.target from attacker_count worker
/// threads, each paced at target_rate_pps / attacker_count, until
/// duration_s elapses or stop is requested. Never reads replies.
///
/// Throws Error(kPrivilege) if the raw socket cannot be opened and
/// Error(kEndpoint) if the target cannot be resolved or routed.
FloodStats flood(const FloodConfig& config, std::stop_token stop = {});

}  // namespace dosbench::forge

#endif  // DOSBENCH_PACKET_FORGE_HPP_
