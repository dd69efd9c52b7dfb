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

#include <sys/socket.h>
#include <netinet/in.h>
#include <unistd.h>

#include <atomic>
#include <random>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "dosbench/error.hpp"
#include "oracles.hpp"

namespace dosbench::forge {
namespace {

TEST(ChecksumTest, EchoHeaderWord) {
  const std::vector<std::uint8_t> bytes{0x08, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(compute_checksum(bytes), 0xF7FF);
}

TEST(ChecksumTest, AllZero) {
  const std::vector<std::uint8_t> bytes(8, 0);
  EXPECT_EQ(compute_checksum(bytes), 0xFFFF);
}

TEST(ChecksumTest, RandomMessagesMatchOracle) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> byte(0, 255);
  for (std::size_t len : {1u, 2u, 3u, 63u, 64u, 1472u}) {
    std::vector<std::uint8_t> data(len);
    for (auto& b : data) b = static_cast<std::uint8_t>(byte(rng));
    EXPECT_EQ(compute_checksum(data), oracle::internet_checksum(data)) << "len " << len;
  }
}

TEST(ChecksumTest, CarryFolding) {
  const std::vector<std::uint8_t> bytes(64, 0xFF);
  EXPECT_EQ(compute_checksum(bytes), oracle::internet_checksum(bytes));
  EXPECT_EQ(compute_checksum(bytes), 0x0000);
}

TEST(EchoRequestTest, EmptyPayloadSizes) {
  const auto p = build_echo_request(1, 1, {});
  EXPECT_EQ(p.serialize().size(), 8u);
  EXPECT_EQ(p.wire_size(), 28u);
  EXPECT_TRUE(checksum_valid(p));
}

TEST(EchoRequestTest, ZeroIdentifierChecksum) {
  EXPECT_EQ(build_echo_request(0, 0, {}).checksum, 0xF7FF);
}

TEST(EchoRequestTest, PayloadSerialization) {
  const std::vector<std::uint8_t> payload(4, 0);
  const auto p = build_echo_request(1, 2, payload);
  const auto bytes = p.serialize();
  ASSERT_EQ(bytes.size(), 12u);
  EXPECT_EQ(bytes[0], 8);
  EXPECT_EQ(bytes[1], 0);
  EXPECT_EQ(bytes[5], 1);  // identifier low byte, network order
  EXPECT_EQ(bytes[7], 2);
  EXPECT_EQ(compute_checksum(bytes), 0);
}

TEST(EchoRequestTest, OversizedPayloadIsSizeError) {
  const std::vector<std::uint8_t> payload(kDefaultMaxPayload + 1, 0);
  try {
    build_echo_request(1, 1, payload);
    FAIL() << "expected size error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSize);
  }
  EXPECT_NO_THROW(build_echo_request(1, 1, std::span(payload).first(kDefaultMaxPayload)));
}

TEST(EchoRequestTest, ParseRoundTrip) {
  const std::vector<std::uint8_t> payload{1, 2, 3};
  const auto p = build_echo_request(0x1234, 0xBEEF, payload);
  const auto bytes = p.serialize();
  IcmpEchoPacket q;
  ASSERT_TRUE(parse_echo_request(bytes, q));
  EXPECT_EQ(q.identifier, 0x1234);
  EXPECT_EQ(q.sequence, 0xBEEF);
  EXPECT_EQ(q.payload, payload);
  EXPECT_TRUE(checksum_valid(q));
  EXPECT_FALSE(parse_echo_request(std::span(bytes).first(7), q));
}

TEST(TokenBucketTest, FirstTokenImmediate) {
  TokenBucket bucket(100.0, 1.0, 0.0);
  EXPECT_TRUE(bucket.try_consume(0.0));
  EXPECT_FALSE(bucket.try_consume(0.0));
  EXPECT_NEAR(bucket.wait_time(0.0), 0.01, 1e-12);
  EXPECT_TRUE(bucket.try_consume(0.01));
}

TEST(TokenBucketTest, LongRunRate) {
  TokenBucket bucket(1000.0, 4.0, 0.0);
  int sent = 0;
  for (int step = 0; step <= 1'000'000; ++step) {
    if (bucket.try_consume(step * 1e-6)) ++sent;
  }
  EXPECT_NEAR(sent, 1001, 1);
}

TEST(TokenBucketTest, BurstCapsCatchUp) {
  TokenBucket bucket(1000.0, 5.0, 0.0);
  int sent = 0;
  while (bucket.try_consume(10.0)) ++sent;
  EXPECT_EQ(sent, 5);
}

TEST(FloodConfigTest, Validation) {
  FloodConfig c;
  EXPECT_NO_THROW(validate(c));
  c.attacker_count = 0;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.target_rate_pps = 0;
  EXPECT_THROW(validate(c), Error);
  EXPECT_EQ(parse_transport_mode("icmp"), TransportMode::kRawIcmp);
  EXPECT_EQ(parse_transport_mode("udp"), TransportMode::kUdpFallback);
  EXPECT_THROW(parse_transport_mode("tcp"), Error);
}

// Counts datagrams arriving on a loopback UDP socket until stopped.
class UdpSink {
 public:
  UdpSink() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    timeval tv{0, 50'000};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    thread_ = std::jthread([this](std::stop_token stop) {
      std::uint8_t buf[2048];
      while (!stop.stop_requested()) {
        if (::recv(fd_, buf, sizeof(buf), 0) > 0) received_.fetch_add(1);
      }
    });
  }
  ~UdpSink() {
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

TEST(FloodTest, LowRateCount) {
  UdpSink sink;
  FloodConfig c;
  c.target = {"127.0.0.1", sink.port()};
  c.target_rate_pps = 1;
  c.duration_s = 3.0;
  const auto stats = flood(c);
  EXPECT_GE(stats.packets_sent, 2u);
  EXPECT_LE(stats.packets_sent, 4u);
}

TEST(FloodTest, LoopbackTenThousand) {
  UdpSink sink;
  FloodConfig c;
  c.target = {"127.0.0.1", sink.port()};
  c.target_rate_pps = 10'000;
  c.duration_s = 1.0;
  const auto stats = flood(c);
  EXPECT_NEAR(static_cast<double>(stats.packets_sent), 10'000.0, 2'000.0);
  ASSERT_EQ(stats.per_sender_sent.size(), 1u);
  EXPECT_EQ(stats.per_sender_sent[0], stats.packets_sent);
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  EXPECT_LE(sink.received(), stats.packets_sent);
}

TEST(FloodTest, TwoAttackersShareRate) {
  UdpSink sink;
  FloodConfig c;
  c.target = {"127.0.0.1", sink.port()};
  c.attacker_count = 2;
  c.target_rate_pps = 2'000;
  c.duration_s = 1.0;
  const auto stats = flood(c);
  ASSERT_EQ(stats.per_sender_sent.size(), 2u);
  EXPECT_EQ(stats.per_sender_sent[0] + stats.per_sender_sent[1], stats.packets_sent);
  EXPECT_NEAR(stats.achieved_rate_pps, 2'000.0, 400.0);
}

TEST(FloodTest, StopTokenEndsEarly) {
  UdpSink sink;
  FloodConfig c;
  c.target = {"127.0.0.1", sink.port()};
  c.target_rate_pps = 1000;
  c.duration_s = 60.0;
  std::stop_source source;
  std::jthread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    source.request_stop();
  });
  const auto stats = flood(c, source.get_token());
  EXPECT_LT(stats.wall_duration_s, 5.0);
}

TEST(FloodTest, UnresolvableTargetIsEndpointError) {
  FloodConfig c;
  c.target = {"no-such-host.invalid", 9};
  try {
    flood(c);
    FAIL() << "expected endpoint error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEndpoint);
  }
}

}  // namespace
}  // namespace dosbench::forge
