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

#include "dosbench/control_workload.hpp"

#include <time.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "dosbench/error.hpp"

namespace dosbench::workload {
namespace {

constexpr double kPi = std::numbers::pi;

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
         std::isfinite(s.speed);
}

bool finite(const ControlInput& u) {
  return std::isfinite(u.steering) && std::isfinite(u.acceleration);
}

// Unchecked plant update shared by plant_step and the solver rollouts.
inline VehicleState advance(const VehicleState& s, const ControlInput& u, double dt,
                            double wheelbase) {
  VehicleState next;
  next.x = s.x + s.speed * std::cos(s.heading) * dt;
  next.y = s.y + s.speed * std::sin(s.heading) * dt;
  next.heading = normalize_angle(s.heading + s.speed / wheelbase * std::tan(u.steering) * dt);
  next.speed = std::max(0.0, s.speed + u.acceleration * dt);
  return next;
}

inline double stage_cost(const VehicleState& s, const VehicleState& ref, const CostWeights& w) {
  const double ex = s.x - ref.x;
  const double ey = s.y - ref.y;
  const double eh = normalize_angle(s.heading - ref.heading);
  const double ev = s.speed - ref.speed;
  return w.position * (ex * ex + ey * ey) + w.heading * eh * eh + w.speed * ev * ev;
}

inline double effort_cost(const ControlInput& u, const CostWeights& w) {
  return w.steering * u.steering * u.steering + w.acceleration * u.acceleration * u.acceleration;
}

}  // namespace

double normalize_angle(double angle) noexcept {
  double r = std::remainder(angle, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

VehicleState plant_step(const VehicleState& state, const ControlInput& input, double dt,
                        double wheelbase) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kConfig, "plant_step requires dt > 0");
  if (!finite(state) || !finite(input) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kNumeric, "plant_step received a non-finite value");
  }
  return advance(state, input, dt, wheelbase);
}

MpcSolver::MpcSolver(MpcConfig config) : config_(config) {
  if (config_.horizon < 1 || config_.iterations < 0 || !(config_.dt > 0.0)) {
    throw Error(ErrorCode::kConfig, "invalid MPC configuration");
  }
  const auto n = static_cast<std::size_t>(config_.horizon);
  plan_.assign(n, {});
  trial_.assign(n, {});
  best_.assign(n, {});
  grad_.assign(n, {});
  states_.assign(n + 1, {});
}

void MpcSolver::reset() {
  std::fill(plan_.begin(), plan_.end(), ControlInput{});
  base_step_ = 0.25;
  last_cost_ = 0.0;
}

ControlInput MpcSolver::project(const ControlInput& u) const noexcept {
  const auto& v = config_.vehicle;
  return {std::clamp(u.steering, -v.steer_max, v.steer_max),
          std::clamp(u.acceleration, v.accel_min, v.accel_max)};
}

double MpcSolver::cost(const VehicleState& state, std::span<const VehicleState> reference,
                       std::span<const ControlInput> plan) const {
  const auto& w = config_.weights;
  VehicleState s = state;
  double total = 0.0;
  for (int k = 0; k < config_.horizon; ++k) {
    total += effort_cost(plan[k], w);
    s = advance(s, plan[k], config_.dt, config_.vehicle.wheelbase);
    total += stage_cost(s, reference[k], w);
  }
  return total;
}

double MpcSolver::gradient(const VehicleState& state, std::span<const VehicleState> reference,
                           std::span<const ControlInput> plan, std::span<ControlInput> grad) {
  const auto& w = config_.weights;
  const double dt = config_.dt;
  const double wheelbase = config_.vehicle.wheelbase;
  const int n = config_.horizon;

  states_[0] = state;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    total += effort_cost(plan[k], w);
    states_[k + 1] = advance(states_[k], plan[k], dt, wheelbase);
    total += stage_cost(states_[k + 1], reference[k], w);
  }

  // Adjoint pass; (lx, ly, lh, lv) holds dJ/ds_{k+1} on entry to step k.
  double lx = 0.0, ly = 0.0, lh = 0.0, lv = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    const VehicleState& post = states_[k + 1];
    const VehicleState& ref = reference[k];
    lx += 2.0 * w.position * (post.x - ref.x);
    ly += 2.0 * w.position * (post.y - ref.y);
    lh += 2.0 * w.heading * normalize_angle(post.heading - ref.heading);
    lv += 2.0 * w.speed * (post.speed - ref.speed);

    const VehicleState& s = states_[k];
    const ControlInput& u = plan[k];
    const double c = std::cos(s.heading);
    const double sn = std::sin(s.heading);
    const double cd = std::cos(u.steering);
    const double sat = (s.speed + u.acceleration * dt > 0.0) ? 1.0 : 0.0;

    grad[k].steering = lh * s.speed / (wheelbase * cd * cd) * dt + 2.0 * w.steering * u.steering;
    grad[k].acceleration = lv * sat * dt + 2.0 * w.acceleration * u.acceleration;

    const double new_lh = lh + lx * (-s.speed * sn * dt) + ly * (s.speed * c * dt);
    const double new_lv =
        lv * sat + lx * c * dt + ly * sn * dt + lh * std::tan(u.steering) / wheelbase * dt;
    lh = new_lh;
    lv = new_lv;
  }
  return total;
}

ControlInput MpcSolver::step(const VehicleState& state, std::span<const VehicleState> reference) {
  const auto n = static_cast<std::size_t>(config_.horizon);
  if (reference.size() < n) {
    throw Error(ErrorCode::kConfig, "reference shorter than the MPC horizon");
  }
  if (!finite(state) ||
      !std::all_of(reference.begin(), reference.begin() + static_cast<std::ptrdiff_t>(n),
                   [](const VehicleState& s) { return finite(s); })) {
    throw Error(ErrorCode::kNumeric, "mpc_step received a non-finite value");
  }
  reference = reference.first(n);

  // Warm start: shift the previous plan by one step.
  std::rotate(plan_.begin(), plan_.begin() + 1, plan_.end());
  plan_.back() = plan_[n >= 2 ? n - 2 : 0];

  const auto& v = config_.vehicle;
  const double scale_s = v.steer_max;
  const double scale_a = 0.5 * (v.accel_max - v.accel_min);
  static constexpr double kTrialFactors[kTrialSteps] = {4.0, 1.0, 0.25, 0.0625};

  double current = cost(state, reference, plan_);
  for (int it = 0; it < config_.iterations; ++it) {
    current = gradient(state, reference, plan_, grad_);

    // Steepest descent in box-normalized coordinates, inf-norm scaled so a
    // step of s moves the largest component by s of its half-range.
    double gmax = 0.0;
    for (const auto& g : grad_) {
      gmax = std::max({gmax, std::abs(g.steering * scale_s), std::abs(g.acceleration * scale_a)});
    }
    const double inv = gmax > 1e-300 ? 1.0 / gmax : 0.0;

    double best_cost = current;
    int best_trial = -1;
    for (int t = 0; t < kTrialSteps; ++t) {
      const double step = std::min(1.0, base_step_ * kTrialFactors[t]);
      for (std::size_t k = 0; k < n; ++k) {
        trial_[k] = project({plan_[k].steering - step * scale_s * scale_s * grad_[k].steering * inv,
                             plan_[k].acceleration -
                                 step * scale_a * scale_a * grad_[k].acceleration * inv});
      }
      const double c = cost(state, reference, trial_);
      if (c < best_cost) {
        best_cost = c;
        best_trial = t;
        std::copy(trial_.begin(), trial_.end(), best_.begin());
      }
    }
    if (best_trial >= 0) {
      std::copy(best_.begin(), best_.end(), plan_.begin());
      base_step_ = std::min(1.0, base_step_ * kTrialFactors[best_trial]);
      current = best_cost;
    } else {
      base_step_ *= kTrialFactors[kTrialSteps - 1] * kTrialFactors[kTrialSteps - 1];
    }
    base_step_ = std::max(base_step_, 1e-9);
  }
  last_cost_ = current;
  return plan_.front();
}

std::uint64_t monotonic_now_us() noexcept {
  timespec ts{};
  ::clock_gettime(CLOCK_MONOTONIC, &ts);
  return static_cast<std::uint64_t>(ts.tv_sec) * 1'000'000u +
         static_cast<std::uint64_t>(ts.tv_nsec) / 1'000u;
}

void require_microsecond_clock() {
  timespec res{};
  if (::clock_getres(CLOCK_MONOTONIC, &res) != 0 || res.tv_sec != 0 || res.tv_nsec > 1000) {
    throw Error(ErrorCode::kConfig, "CLOCK_MONOTONIC resolution is coarser than 1 us");
  }
}

std::vector<VehicleState> make_reference_path(std::size_t length, double speed, double dt,
                                              double wheelbase) {
  std::vector<VehicleState> path;
  path.reserve(length);
  VehicleState s{0.0, 0.0, 0.0, speed};
  for (std::size_t i = 0; i < length; ++i) {
    path.push_back(s);
    const double t = static_cast<double>(i) * dt;
    s = advance(s, {0.04 * std::sin(0.25 * t), 0.0}, dt, wheelbase);
  }
  return path;
}

BenchmarkRun run_benchmark(const WorkloadConfig& config, std::ostream* log) {
  require_microsecond_clock();
  const auto n = static_cast<std::size_t>(config.iterations);
  const auto horizon = static_cast<std::size_t>(config.mpc.horizon);
  const auto reference = make_reference_path(n + horizon + 1, config.reference_speed,
                                             config.mpc.dt, config.mpc.vehicle.wheelbase);
  const std::span<const VehicleState> ref_view(reference);

  BenchmarkRun run;
  run.records.resize(n);
  run.controls.resize(n);
  run.trajectory.resize(n + 1);

  MpcSolver solver(config.mpc);
  VehicleState state = reference.front();
  state.y += config.initial_offset_m;
  run.trajectory[0] = state;

  for (std::size_t i = 0; i < n; ++i) {
    const auto window = ref_view.subspan(i + 1, horizon);
    const std::uint64_t t_enter = monotonic_now_us();
    const ControlInput u = solver.step(state, window);
    const std::uint64_t t_exit = monotonic_now_us();
    state = advance(state, u, config.mpc.dt, config.mpc.vehicle.wheelbase);
    run.records[i] = {i, t_enter, t_exit};
    run.controls[i] = u;
    run.trajectory[i + 1] = state;
  }

  if (log != nullptr) {
    write_latency_csv(*log, run.records);
    log->flush();
    if (!*log) throw Error(ErrorCode::kIo, "failed to write latency log");
  }
  return run;
}

void write_latency_csv(std::ostream& out, std::span<const LatencyRecord> records) {
  out << "iteration,t_enter_us,t_exit_us\n";
  for (const auto& r : records) {
    out << r.iteration << ',' << r.t_enter_us << ',' << r.t_exit_us << '\n';
  }
}

std::vector<LatencyRecord> read_latency_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("iteration,t_enter_us,t_exit_us", 0) != 0) {
    throw Error(ErrorCode::kIo, "latency log is missing its CSV header");
  }
  std::vector<LatencyRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    LatencyRecord r;
    char c1 = 0, c2 = 0;
    if (!(fields >> r.iteration >> c1 >> r.t_enter_us >> c2 >> r.t_exit_us) || c1 != ',' ||
        c2 != ',') {
      throw Error(ErrorCode::kIo, "malformed latency log line " + std::to_string(line_no));
    }
    records.push_back(r);
  }
  return records;
}

}  // namespace dosbench::workload
