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

#include "net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "dosbench/error.hpp"

namespace dosbench {

Endpoint parse_endpoint(std::string_view text, std::uint16_t default_port) {
  Endpoint ep;
  ep.port = default_port;
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    ep.host = std::string(text);
  } else {
    ep.host = std::string(text.substr(0, colon));
    auto digits = text.substr(colon + 1);
    std::uint16_t port = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::kEndpoint, "bad port in '" + std::string(text) + "'");
    }
    ep.port = port;
  }
  if (ep.host.empty()) ep.host = "127.0.0.1";
  return ep;
}

namespace net {

void Fd::reset() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

std::string errno_message(int err) { return std::strerror(err); }

sockaddr_in resolve(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* result = nullptr;
  int rc = ::getaddrinfo(endpoint.host.c_str(), nullptr, &hints, &result);
  if (rc != 0 || result == nullptr) {
    throw Error(ErrorCode::kEndpoint,
                "cannot resolve '" + endpoint.host + "': " + ::gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, result->ai_addr, sizeof(addr));
  ::freeaddrinfo(result);
  addr.sin_port = htons(endpoint.port);
  return addr;
}

Fd tcp_listen(const Endpoint& endpoint, int backlog) {
  sockaddr_in addr = resolve(endpoint);
  Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd.valid()) throw Error(ErrorCode::kEndpoint, "socket: " + errno_message(errno));
  int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw Error(ErrorCode::kEndpoint,
                "bind " + endpoint.to_string() + ": " + errno_message(errno));
  }
  if (::listen(fd.get(), backlog) != 0) {
    throw Error(ErrorCode::kEndpoint, "listen: " + errno_message(errno));
  }
  return fd;
}

std::uint16_t local_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return 0;
  return ntohs(addr.sin_port);
}

Fd tcp_connect(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  sockaddr_in addr = resolve(endpoint);
  Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
  if (!fd.valid()) throw Error(ErrorCode::kEndpoint, "socket: " + errno_message(errno));
  int rc = ::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  if (rc != 0 && errno != EINPROGRESS) {
    throw Error(ErrorCode::kEndpoint,
                "connect " + endpoint.to_string() + ": " + errno_message(errno));
  }
  if (rc != 0) {
    pollfd pfd{fd.get(), POLLOUT, 0};
    rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc <= 0) throw Error(ErrorCode::kEndpoint, "connect " + endpoint.to_string() + ": timeout");
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      throw Error(ErrorCode::kEndpoint,
                  "connect " + endpoint.to_string() + ": " + errno_message(err));
    }
  }
  int flags = ::fcntl(fd.get(), F_GETFL, 0);
  ::fcntl(fd.get(), F_SETFL, flags & ~O_NONBLOCK);
  return fd;
}

}  // namespace net
}  // namespace dosbench
