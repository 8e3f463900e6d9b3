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

#ifndef S2S_ENV_H_
#define S2S_ENV_H_

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "s2s/common.h"
#include "s2s/render.h"
#include "s2s/vehicle.h"
#include "s2s/world.h"

namespace s2s {

inline constexpr double kGoalRadius = 2.0;
inline constexpr double kGoalReward = 100.0;
inline constexpr int kPastLength = 10;

struct RewardWeights {
  double goal = 1.0;
  double upright = 1.0;
  double steer = 0.1;
  double collision = 1.0;

  void Validate() const;
  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

// Unweighted reward components.
struct RewardTerms {
  double goal = 0.0;       // +100 inside the goal radius, else -1
  double upright = 0.0;    // -max(|roll|, |pitch|) / 180, degrees
  double steer = 0.0;      // -||steer||_2
  double collision = 0.0;  // -1 on collision

  double Weighted(const RewardWeights& w) const {
    return w.goal * goal + w.upright * upright + w.steer * steer + w.collision * collision;
  }
  friend bool operator==(const RewardTerms&, const RewardTerms&) = default;
};

// The single goal test shared by reward and termination.
bool GoalReached(Vec2 goal, Vec2 achieved, double radius = kGoalRadius);
double GoalTerm(Vec2 goal, Vec2 achieved, double radius = kGoalRadius);
double UprightTerm(double roll_deg, double pitch_deg);
double SteerTerm(std::span<const double> steers);

RewardTerms ComputeRewardTerms(Vec2 goal, Vec2 achieved, std::span<const ActionTuple> actions,
                               bool collision, double roll_deg, double pitch_deg,
                               double goal_radius = kGoalRadius);

// Weighted sum of the four terms.
double Reward(Vec2 goal, Vec2 achieved, std::span<const ActionTuple> actions, bool collision,
              double roll_deg, double pitch_deg, const RewardWeights& weights,
              double goal_radius = kGoalRadius);

struct Observation {
  ClassMap class_map;
  std::optional<Image> rgb;
  Trajectory past;  // kPastLength egocentric points, last one at the origin
  Vec2 achieved;    // egocentric vehicle position, always the origin
  Vec2 goal;        // egocentric goal
};

struct EpisodeConfig {
  double goal_range = 20.0;
  double goal_min_distance = kGoalRadius;
  double goal_radius = kGoalRadius;
  int max_decisions = 30;
  int substeps_per_action = 5;
  double dt = 0.02;  // s per physics substep
  double initial_speed = 2.0;
  bool collision_terminal = false;
  bool randomize_start = true;

  // Rollout points are spaced one action period apart.
  double action_period() const { return substeps_per_action * dt; }
  void Validate() const;
};

// A constructed episode: explicit world, start pose and goal.
struct Scenario {
  std::shared_ptr<const World> world;
  Pose2 start;
  Vec2 goal;
};

struct EnvConfig {
  std::vector<WorldSpec> worlds;  // one entry per preset in rotation
  int world_variants = 4;         // distinct seeds per entry
  bool sample_preset = true;      // otherwise always worlds[0]
  CameraModel camera;
  RandomizationConfig randomization = RandomizationConfig::Disabled();
  bool include_rgb = false;
  int horizon = 5;  // action tuples per decision
  RolloutConfig rollout;
  VehicleParams vehicle;
  TrackerGains tracker;
  RewardWeights weights;
  EpisodeConfig episode;
  // When set, Reset(seed) plays the scene drawn for that seed instead of
  // sampling a world, start and goal; `worlds` may then be empty.
  std::function<Scenario(uint64_t seed)> scenes;

  // Flat obstacle-free meadows with a 64 px camera.
  static EnvConfig EmptyMeadow(uint64_t world_seed = 1);
  void Validate() const;
};

// Shared read-only worlds keyed by (spec, variant); thread-safe.
class WorldCache {
 public:
  std::shared_ptr<const World> Get(const WorldSpec& spec, int variant);

 private:
  std::mutex mu_;
  std::map<std::pair<size_t, int>, std::shared_ptr<const World>> worlds_;
  std::vector<WorldSpec> specs_;
};

struct StepInfo {
  Pose2 decision_pose;     // world pose when the decision started
  Vec2 achieved_world;     // vehicle position when the decision ended
  Vec2 achieved_ego;       // same, in the decision_pose frame
  Vec2 goal_world;
  RewardTerms terms;       // goal evaluated at the end, others summed over substeps
  int substeps = 0;
  int collision_substeps = 0;
  bool collision = false;
  bool goal_reached = false;
  bool collision_terminated = false;
  bool truncated = false;
  Trajectory plan;         // egocentric rollout that was tracked
  VehicleState state;      // state at the end of the decision
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Goal-conditioned episodic environment. Each instance owns its mutable state
// and is used from one thread at a time.
class Env {
 public:
  explicit Env(EnvConfig config, std::shared_ptr<WorldCache> cache = nullptr);

  Observation Reset(uint64_t seed);
  // Constructed scene: explicit world, start pose and goal.
  Observation ResetScenario(std::shared_ptr<const World> world, const Pose2& start,
                            Vec2 goal_world, uint64_t seed = 0);

  StepResult Step(std::span<const ActionTuple> actions);

  const EnvConfig& config() const { return config_; }
  const World& world() const { return *world_; }
  const VehicleState& state() const { return state_; }
  Vec2 goal_world() const { return goal_; }
  bool done() const { return done_; }
  int decision_index() const { return decision_; }
  uint64_t episode_seed() const { return episode_seed_; }
  const std::vector<Pose2>& history() const { return history_; }

 private:
  Observation Observe();

  EnvConfig config_;
  std::shared_ptr<WorldCache> cache_;
  std::shared_ptr<const World> world_;
  VehicleState state_;
  Vec2 goal_;
  std::vector<Pose2> history_;  // world poses, one per action period
  PathTracker tracker_;
  uint64_t episode_seed_ = 0;
  int decision_ = 0;
  bool done_ = true;
};

// Flat, otherwise empty meadow with a single rock centered on the straight
// line from the start (world center, facing +x) to the goal.
Scenario RockAvoidanceScene(double rock_radius = 1.0, double rock_distance = 8.0,
                            double goal_distance = 15.0);

// Randomized variants of the rock scene for training: rock size, distance and
// lateral offset, goal distance and bearing, and the start heading vary with
// the seed.
Scenario RandomRockScene(uint64_t seed);

// One JSONL line for an episode log.
std::string EpisodeLogLine(int t, std::span<const ActionTuple> actions, const StepResult& step,
                           const RewardWeights& weights);

// Closed-loop message synchronization: a bundle is released only when the
// freshest image, odometry and goal messages lie within `tolerance` seconds
// of each other.
enum class MessageKind { kImage = 0, kOdometry = 1, kGoal = 2 };

struct TimedMessage {
  MessageKind kind = MessageKind::kImage;
  double timestamp = 0.0;
  std::variant<std::monostate, ClassMap, Image, Pose2, Vec2> payload;
};

struct SyncBundle {
  TimedMessage image;
  TimedMessage odometry;
  TimedMessage goal;
  double spread() const;
};

inline constexpr double kSyncTolerance = 0.100;

class MessageSynchronizer {
 public:
  explicit MessageSynchronizer(double tolerance = kSyncTolerance,
                               double max_age = std::numeric_limits<double>::infinity())
      : tolerance_(tolerance), max_age_(max_age) {}

  // Keeps the newest message per kind; older arrivals are dropped.
  void Offer(TimedMessage msg);

  // Releases a bundle iff all three kinds have a fresh message no older than
  // max_age and their pairwise spread is within tolerance. Released messages
  // become stale.
  std::optional<SyncBundle> SyncStep(double now);

 private:
  struct Slot {
    std::optional<TimedMessage> msg;
    bool fresh = false;
  };
  double tolerance_;
  double max_age_;
  std::array<Slot, 3> slots_;
};

}  // namespace s2s

#endif  // S2S_ENV_H_
