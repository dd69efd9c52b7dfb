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

#ifndef DOSBENCH_SOLUTION_HPP_
#define DOSBENCH_SOLUTION_HPP_

#include <cstdint>
#include <string_view>

namespace dosbench {

inline constexpr std::uint64_t kGpsWeekUs = 604'800'000'000ULL;

enum class FixStatus : std::uint8_t { kNone = 0, kFloat = 1, kFixed = 2 };

std::string_view to_string(FixStatus status) noexcept;

/// One position solution as streamed by the device.
struct SolutionSample {
  std::uint64_t tow_us = 0;       // sampling epoch, microseconds of GPS week
  std::uint64_t sys_time_us = 0;  // device clock when the solution went out
  std::int32_t east_mm = 0;
  std::int32_t north_mm = 0;
  std::int32_t up_mm = 0;
  FixStatus fix_status = FixStatus::kNone;

  bool operator==(const SolutionSample&) const = default;
};

inline std::string_view to_string(FixStatus status) noexcept {
  switch (status) {
    case FixStatus::kNone: return "none";
    case FixStatus::kFloat: return "float";
    case FixStatus::kFixed: return "fixed";
  }
  return "invalid";
}

}  // namespace dosbench

#endif  // DOSBENCH_SOLUTION_HPP_
