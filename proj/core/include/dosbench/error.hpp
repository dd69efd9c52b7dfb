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

#ifndef DOSBENCH_ERROR_HPP_
#define DOSBENCH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dosbench {

enum class ErrorCode {
  kSize,        // packet exceeds the MTU budget
  kPrivilege,   // raw socket requires CAP_NET_RAW
  kEndpoint,    // resolve / bind / connect failure
  kNumeric,     // non-finite state or input
  kIo,          // file or sink write failure
  kConfig,      // invalid configuration
  kWraparound,  // tow crossed the GPS week boundary
  kInvalidSeries,
  kExperiment,  // every repetition failed
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kSize: return "size error";
    case ErrorCode::kPrivilege: return "privilege error";
    case ErrorCode::kEndpoint: return "endpoint error";
    case ErrorCode::kNumeric: return "numeric error";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kWraparound: return "tow wraparound";
    case ErrorCode::kInvalidSeries: return "invalid series";
    case ErrorCode::kExperiment: return "experiment error";
  }
  return "unknown error";
}

}  // namespace dosbench

#endif  // DOSBENCH_ERROR_HPP_
