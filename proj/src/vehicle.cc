// Copyright 2026 The s2s-offroad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "s2s/vehicle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace s2s {
namespace {

double Sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

ActionTuple ActionTuple::Clamped() const {
  return {std::clamp(steer, -kMaxSteer, kMaxSteer), std::clamp(accel, 0.0, 1.0)};
}

void RolloutConfig::Validate() const {
  if (!(heading_rate > 0)) throw std::invalid_argument("heading_rate must be positive");
}

Trajectory GetTraj(int length, std::span<const Pose2> past,
                   std::span<const ActionTuple> actions, const RolloutConfig& cfg) {
  cfg.Validate();
  if (length < 1) throw std::invalid_argument("GetTraj: length must be >= 1");
  if (past.size() < 2) throw std::invalid_argument("GetTraj: past trajectory needs >= 2 points");
  if (actions.size() < static_cast<size_t>(length - 1)) {
    throw std::invalid_argument("GetTraj: need length - 1 action tuples");
  }
  const Pose2& last = past[past.size() - 1];
  const Pose2& prev = past[past.size() - 2];
  double spacing = std::hypot(last.x - prev.x, last.y - prev.y);
  double heading = 0.0;
  Trajectory traj(static_cast<size_t>(length));
  for (int i = 0; i + 1 < length; ++i) {
    const ActionTuple a = actions[i].Clamped();
    spacing += a.accel;
    const double limit = std::abs(a.steer);
    heading = std::clamp(heading + cfg.heading_rate * Sign(a.steer), -limit, limit);
    traj[i + 1].x = traj[i].x + std::cos(heading) * spacing;
    traj[i + 1].y = traj[i].y + std::sin(heading) * spacing;
    traj[i + 1].yaw = heading;
  }
  return traj;
}

DynamicsResult StepDynamics(const VehicleState& state, const WheelCommand& cmd, double dt,
                            const World& world, const VehicleParams& params) {
  if (!(dt > 0)) throw std::invalid_argument("StepDynamics: dt must be positive");
  VehicleState next = state;
  const double throttle = std::clamp(cmd.throttle, -1.0, 1.0);
  const double steer = std::clamp(cmd.steer, -params.max_wheel_steer, params.max_wheel_steer);
  next.speed = std::clamp(state.speed + throttle * params.max_accel * dt, 0.0, params.max_speed);
  const double rate = next.speed / params.wheelbase * std::tan(steer);
  const double turn = rate * dt;
  if (std::abs(turn) > 1e-12) {
    const double radius = next.speed / rate;
    next.x += radius * (std::sin(state.yaw + turn) - std::sin(state.yaw));
    next.y -= radius * (std::cos(state.yaw + turn) - std::cos(state.yaw));
  } else {
    next.x += next.speed * dt * std::cos(state.yaw);
    next.y += next.speed * dt * std::sin(state.yaw);
  }
  next.yaw = WrapAngle(state.yaw + turn);
  return {next, QueryCollision(world, next.x, next.y, params.footprint_radius)};
}

TrackingError ComputeTrackingError(const VehicleState& state, std::span<const Pose2> traj,
                                   double lookahead) {
  TrackingError err;
  if (traj.empty()) return err;
  double best = std::numeric_limits<double>::infinity();
  size_t best_k = 0;
  double best_t = 0.0;
  bool found = false;
  for (size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dx = traj[k + 1].x - traj[k].x;
    const double dy = traj[k + 1].y - traj[k].y;
    const double len = std::hypot(dx, dy);
    if (len < 1e-9) continue;
    const double rx = state.x - traj[k].x;
    const double ry = state.y - traj[k].y;
    double t = (rx * dx + ry * dy) / (len * len);
    // The final segment extends past its end so the tracker never loses the
    // path when the vehicle overshoots.
    t = k + 2 == traj.size() ? std::max(t, 0.0) : std::clamp(t, 0.0, 1.0);
    const double px = traj[k].x + t * dx - state.x;
    const double py = traj[k].y + t * dy - state.y;
    const double dist = std::hypot(px, py);
    // Ties go to the later segment (nearest-ahead).
    if (dist <= best + 1e-12) {
      best = dist;
      best_k = k;
      best_t = t;
      found = true;
      err.cross_track = (dx * ry - dy * rx) / len;
      err.segment_length = len;
    }
  }
  if (!found) {
    // Degenerate path: steer at the single point, hold still.
    const Pose2& p = traj.back();
    const double dist = std::hypot(p.x - state.x, p.y - state.y);
    err.heading = dist > 1e-9 ? WrapAngle(std::atan2(p.y - state.y, p.x - state.x) - state.yaw) : 0.0;
    return err;
  }
  // Walk `lookahead` meters along the path from the projection and take the
  // tangent there.
  size_t k = best_k;
  double remaining = lookahead + best_t * std::hypot(traj[k + 1].x - traj[k].x, traj[k + 1].y - traj[k].y);
  size_t heading_k = k;
  for (; k + 1 < traj.size(); ++k) {
    const double len = std::hypot(traj[k + 1].x - traj[k].x, traj[k + 1].y - traj[k].y);
    if (len < 1e-9) continue;
    heading_k = k;
    if (remaining <= len) break;
    remaining -= len;
  }
  err.heading = WrapAngle(std::atan2(traj[heading_k + 1].y - traj[heading_k].y,
                                     traj[heading_k + 1].x - traj[heading_k].x) -
                          state.yaw);
  return err;
}

WheelCommand PathTracker::Track(const VehicleState& state, std::span<const Pose2> world_traj,
                                double dt) {
  const TrackingError e =
      ComputeTrackingError(state, world_traj, gains_.lookahead_time * state.speed);
  const double error =
      gains_.k_heading * e.heading +
      std::atan2(-gains_.k_cross * e.cross_track, state.speed + gains_.softening_speed);
  double derivative = 0.0;
  if (has_prev_ && dt > 0) derivative = (error - prev_error_) / dt;
  integral_ += error * dt;
  prev_error_ = error;
  has_prev_ = true;
  WheelCommand cmd;
  cmd.steer = std::clamp(error + gains_.ki * integral_ + gains_.kd * derivative,
                         -gains_.max_steer, gains_.max_steer);
  const double target_speed = e.segment_length / gains_.point_period;
  cmd.throttle = std::clamp(gains_.k_speed * (target_speed - state.speed), -1.0, 1.0);
  return cmd;
}

void PathTracker::Reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  has_prev_ = false;
}

WheelCommand PidTrack(const VehicleState& state, std::span<const Pose2> world_traj,
                      const TrackerGains& gains) {
  PathTracker tracker(gains);
  return tracker.Track(state, world_traj, 0.0);
}

Vec2 ToEgocentric(Vec2 p, const Pose2& ref) {
  const double c = std::cos(ref.yaw), s = std::sin(ref.yaw);
  const double dx = p.x - ref.x, dy = p.y - ref.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 ToWorld(Vec2 p, const Pose2& ref) {
  const double c = std::cos(ref.yaw), s = std::sin(ref.yaw);
  return {ref.x + c * p.x - s * p.y, ref.y + s * p.x + c * p.y};
}

Trajectory EgocentricTransform(std::span<const Pose2> world_points, const Pose2& reference) {
  Trajectory out;
  out.reserve(world_points.size());
  for (const Pose2& p : world_points) {
    const Vec2 e = ToEgocentric(p.Position(), reference);
    out.push_back({e.x, e.y, WrapAngle(p.yaw - reference.yaw)});
  }
  return out;
}

Trajectory EgocentricToWorld(std::span<const Pose2> ego_points, const Pose2& reference) {
  Trajectory out;
  out.reserve(ego_points.size());
  for (const Pose2& p : ego_points) {
    const Vec2 w = ToWorld(p.Position(), reference);
    out.push_back({w.x, w.y, WrapAngle(p.yaw + reference.yaw)});
  }
  return out;
}

std::string TrajectoryToJsonLine(const std::string& id, TrajectoryFrame frame,
                                 const Trajectory& traj) {
  nlohmann::json j;
  j["id"] = id;
  j["frame"] = frame == TrajectoryFrame::kEgo ? "ego" : "world";
  nlohmann::json pts = nlohmann::json::array();
  for (const Pose2& p : traj) pts.push_back({p.x, p.y, p.yaw});
  j["points"] = std::move(pts);
  return j.dump();
}

TrajectoryRecord TrajectoryFromJsonLine(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  TrajectoryRecord rec;
  rec.id = j.at("id").get<std::string>();
  const std::string frame = j.at("frame").get<std::string>();
  if (frame == "ego") {
    rec.frame = TrajectoryFrame::kEgo;
  } else if (frame == "world") {
    rec.frame = TrajectoryFrame::kWorld;
  } else {
    throw std::invalid_argument("unknown trajectory frame: " + frame);
  }
  for (const auto& p : j.at("points")) {
    rec.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  }
  return rec;
}

}  // namespace s2s
