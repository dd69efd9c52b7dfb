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

// Internal POSIX socket helpers shared by the flood, device server and recorder.

#ifndef DOSBENCH_SRC_NET_HPP_
#define DOSBENCH_SRC_NET_HPP_

#include <netinet/in.h>

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>

#include "dosbench/endpoint.hpp"

namespace dosbench::net {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void reset() noexcept;

 private:
  int fd_ = -1;
};

// IPv4 only. Throws Error(kEndpoint).
sockaddr_in resolve(const Endpoint& endpoint);

Fd tcp_listen(const Endpoint& endpoint, int backlog = 8);
std::uint16_t local_port(int fd);
Fd tcp_connect(const Endpoint& endpoint, std::chrono::milliseconds timeout);

std::string errno_message(int err);

}  // namespace dosbench::net

#endif  // DOSBENCH_SRC_NET_HPP_
