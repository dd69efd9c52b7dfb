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

#ifndef DOSBENCH_ENDPOINT_HPP_
#define DOSBENCH_ENDPOINT_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace dosbench {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
  bool operator==(const Endpoint&) const = default;
};

// Accepts "host:port" or bare "host" (port falls back to default_port).
Endpoint parse_endpoint(std::string_view text, std::uint16_t default_port);

}  // namespace dosbench

#endif  // DOSBENCH_ENDPOINT_HPP_
