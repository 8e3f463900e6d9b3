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

#ifndef S2S_VEHICLE_H_
#define S2S_VEHICLE_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "s2s/common.h"
#include "s2s/world.h"

namespace s2s {

inline constexpr double kMaxSteer = kPi / 4;

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;  // (-pi, pi]
  double speed = 0.0;  // m/s, >= 0

  Pose2 pose() const { return {x, y, yaw}; }
  Vec2 position() const { return {x, y}; }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

// One policy output: steering angle (rad, positive turns left) and a
// dimensionless acceleration that the rollout adds to point spacing.
struct ActionTuple {
  double steer = 0.0;
  double accel = 0.0;

  ActionTuple Clamped() const;
  friend bool operator==(const ActionTuple&, const ActionTuple&) = default;
};

// Points are (x, y, yaw). Egocentric trajectories start at the origin.
using Trajectory = std::vector<Pose2>;

struct RolloutConfig {
  double heading_rate = 0.1;  // rad per rollout step
  void Validate() const;
};

// Kinematic rollout of a sequence of (steer, accel) tuples into `length`
// egocentric points. Initial spacing is the last step of `past`; each step
// adds accel to the spacing and moves the heading toward +-|steer| by
// heading_rate, clipped to [-|steer|, |steer|].
Trajectory GetTraj(int length, std::span<const Pose2> past,
                   std::span<const ActionTuple> actions, const RolloutConfig& cfg);

struct VehicleParams {
  double wheelbase = 2.9;
  double max_accel = 3.0;  // m/s^2
  double max_speed = 10.0;  // m/s
  double max_wheel_steer = kMaxSteer;
  double footprint_radius = kDefaultFootprintRadius;
};

struct WheelCommand {
  double steer = 0.0;     // rad, positive turns left
  double throttle = 0.0;  // [-1, 1]
};

struct DynamicsResult {
  VehicleState state;
  bool collision = false;
};

// Kinematic bicycle step. Speed updates first, then the pose follows the
// exact arc for that speed and steering over dt.
DynamicsResult StepDynamics(const VehicleState& state, const WheelCommand& cmd, double dt,
                            const World& world, const VehicleParams& params = {});

struct TrackerGains {
  double k_heading = 3.0;
  double k_cross = 1.0;
  double ki = 0.0;
  double kd = 0.05;
  double k_speed = 0.6;
  double softening_speed = 1.0;  // m/s
  double point_period = 0.1;     // s between trajectory points
  double lookahead_time = 0.3;   // s; heading reference ahead of the projection
  double max_steer = kMaxSteer;
};

// Lateral PID on the combined heading and cross-track error to the nearest
// trajectory segment, plus proportional speed control toward the speed
// implied by that segment's length.
class PathTracker {
 public:
  explicit PathTracker(TrackerGains gains = {}) : gains_(gains) {}

  WheelCommand Track(const VehicleState& state, std::span<const Pose2> world_traj, double dt);
  void Reset();

  const TrackerGains& gains() const { return gains_; }

 private:
  TrackerGains gains_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool has_prev_ = false;
};

// Single memoryless evaluation of the tracker (integral and derivative terms
// start from zero).
WheelCommand PidTrack(const VehicleState& state, std::span<const Pose2> world_traj,
                      const TrackerGains& gains = {});

struct TrackingError {
  double cross_track = 0.0;  // m, positive when the vehicle is left of the path
  double heading = 0.0;      // rad, path heading minus vehicle yaw
  double segment_length = 0.0;
};

// Cross-track error against the nearest segment; heading error against the
// path tangent `lookahead` meters beyond the projection.
TrackingError ComputeTrackingError(const VehicleState& state, std::span<const Pose2> traj,
                                   double lookahead = 0.0);

// Express world poses relative to `reference` (translate then rotate by
// -yaw). The reference pose maps to (0, 0, 0).
Trajectory EgocentricTransform(std::span<const Pose2> world_points, const Pose2& reference);
Trajectory EgocentricToWorld(std::span<const Pose2> ego_points, const Pose2& reference);
Vec2 ToEgocentric(Vec2 world_point, const Pose2& reference);
Vec2 ToWorld(Vec2 ego_point, const Pose2& reference);

enum class TrajectoryFrame { kEgo, kWorld };

// One JSONL record: {"id", "frame": "ego"|"world", "points": [[x,y,yaw],...]}.
std::string TrajectoryToJsonLine(const std::string& id, TrajectoryFrame frame,
                                 const Trajectory& traj);
struct TrajectoryRecord {
  std::string id;
  TrajectoryFrame frame = TrajectoryFrame::kEgo;
  Trajectory points;
};
TrajectoryRecord TrajectoryFromJsonLine(const std::string& line);

}  // namespace s2s

#endif  // S2S_VEHICLE_H_
