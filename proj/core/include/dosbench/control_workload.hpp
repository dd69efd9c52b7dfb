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

// Fixed-cost MPC-style controller closed against a kinematic bicycle plant,
// with per-iteration monotonic latency capture.

#ifndef DOSBENCH_CONTROL_WORKLOAD_HPP_
#define DOSBENCH_CONTROL_WORKLOAD_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace dosbench::workload {

struct VehicleState {
  double x = 0.0;        // m
  double y = 0.0;        // m
  double heading = 0.0;  // rad, (-pi, pi]
  double speed = 0.0;    // m/s, >= 0

  bool operator==(const VehicleState&) const = default;
};

struct ControlInput {
  double steering = 0.0;      // rad
  double acceleration = 0.0;  // m/s^2

  bool operator==(const ControlInput&) const = default;
};

struct VehicleParams {
  double wheelbase = 2.7;
  double steer_max = 0.5;
  double accel_min = -4.0;
  double accel_max = 3.0;
};

// Maps any finite angle into (-pi, pi].
double normalize_angle(double angle) noexcept;

/// One explicit-Euler kinematic bicycle step. Speed saturates at zero.
/// Throws Error(kNumeric) on non-finite input, Error(kConfig) if dt <= 0.
VehicleState plant_step(const VehicleState& state, const ControlInput& input, double dt,
                        double wheelbase = VehicleParams{}.wheelbase);

struct CostWeights {
  double position = 1.0;
  double heading = 1.0;
  double speed = 0.5;
  double steering = 0.1;
  double acceleration = 0.05;
};

struct MpcConfig {
  int horizon = 20;
  double dt = 0.018;
  int iterations = 30;
  VehicleParams vehicle;
  CostWeights weights;
};

/// Receding-horizon tracking controller. The input sequence is optimized by
/// projected gradient descent with a fixed iteration count and a fixed set of
/// trial step sizes per iteration, so every call performs the same amount of
/// work. Gradients come from an adjoint (reverse) pass through the rollout.
///
/// All buffers are sized in the constructor; step() does not allocate.
class MpcSolver {
 public:
  static constexpr int kTrialSteps = 4;

  explicit MpcSolver(MpcConfig config);

  /// reference[k] is the target state after k+1 steps; needs at least
  /// horizon entries. Warm-starts from the previous plan shifted by one.
  ControlInput step(const VehicleState& state, std::span<const VehicleState> reference);

  // Cost of an arbitrary plan (horizon entries); allocation-free.
  double cost(const VehicleState& state, std::span<const VehicleState> reference,
              std::span<const ControlInput> plan) const;

  // Fills gradient (horizon entries) and returns the cost of plan.
  double gradient(const VehicleState& state, std::span<const VehicleState> reference,
                  std::span<const ControlInput> plan, std::span<ControlInput> gradient);

  std::span<const ControlInput> last_plan() const noexcept { return plan_; }
  double last_cost() const noexcept { return last_cost_; }
  const MpcConfig& config() const noexcept { return config_; }

  // Drops the warm start.
  void reset();

 private:
  ControlInput project(const ControlInput& u) const noexcept;

  MpcConfig config_;
  std::vector<ControlInput> plan_;
  std::vector<ControlInput> trial_;
  std::vector<ControlInput> best_;
  std::vector<ControlInput> grad_;
  std::vector<VehicleState> states_;
  double base_step_ = 0.25;
  double last_cost_ = 0.0;
};

struct LatencyRecord {
  std::uint64_t iteration = 0;
  std::uint64_t t_enter_us = 0;
  std::uint64_t t_exit_us = 0;

  std::uint64_t duration_us() const noexcept { return t_exit_us - t_enter_us; }
  bool operator==(const LatencyRecord&) const = default;
};

// CLOCK_MONOTONIC in microseconds.
std::uint64_t monotonic_now_us() noexcept;
// Throws Error(kConfig) if the monotonic clock is coarser than 1 us.
void require_microsecond_clock();

struct WorkloadConfig {
  std::uint64_t iterations = 50'000;
  MpcConfig mpc;
  double reference_speed = 10.0;
  // Initial lateral offset from the reference path.
  double initial_offset_m = 0.5;
};

// Smooth constant-speed reference path of `length` states spaced by dt.
std::vector<VehicleState> make_reference_path(std::size_t length, double speed, double dt,
                                              double wheelbase);

struct BenchmarkRun {
  std::vector<LatencyRecord> records;
  std::vector<VehicleState> trajectory;  // iterations + 1 states
  std::vector<ControlInput> controls;
};

/// Closes state -> mpc_step -> plant_step for config.iterations, stamping
/// the monotonic clock right before and after each controller call. If log
/// is non-null the records are written as CSV after the loop; a failed write
/// throws Error(kIo) once the run is complete.
BenchmarkRun run_benchmark(const WorkloadConfig& config, std::ostream* log = nullptr);

void write_latency_csv(std::ostream& out, std::span<const LatencyRecord> records);
std::vector<LatencyRecord> read_latency_csv(std::istream& in);

}  // namespace dosbench::workload

#endif  // DOSBENCH_CONTROL_WORKLOAD_HPP_
