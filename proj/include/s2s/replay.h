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

#ifndef S2S_REPLAY_H_
#define S2S_REPLAY_H_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "s2s/common.h"
#include "s2s/env.h"
#include "s2s/vehicle.h"

namespace s2s {

// One decision of experience. Observation features are stored without the
// goal so relabeling never touches them; the goal lives in `goal` (frame of
// reference_pose) and `next_goal` (frame of next_reference_pose).
struct Transition {
  std::vector<float> obs;
  std::vector<float> next_obs;
  std::vector<ActionTuple> action;

  RewardTerms terms;  // unweighted; goal evaluated at the decision end
  RewardWeights weights;
  double goal_radius = kGoalRadius;
  double reward = 0.0;  // terms.Weighted(weights)

  Pose2 reference_pose;
  Pose2 next_reference_pose;
  Vec2 goal_world;
  Vec2 goal;
  Vec2 next_goal;
  Vec2 achieved_world;
  Vec2 achieved;  // achieved_world in the reference_pose frame

  bool done = false;
  bool goal_reached = false;
  bool collision_terminated = false;
  bool budget_exhausted = false;

  uint64_t episode_id = 0;
  int step = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Builds a transition from an env step. `obs` and `next_obs` are goal-free
// features of the observations before and after the step.
Transition MakeTransition(std::vector<float> obs, std::vector<float> next_obs,
                          std::span<const ActionTuple> action, const StepResult& step,
                          const EnvConfig& config, uint64_t episode_id, int step_index,
                          bool budget_exhausted);

struct HERConfig {
  double relabel_ratio = 0.8;
  // Only the "future" strategy exists: the new goal is the achieved state
  // of a uniformly chosen transition at or after this one in the same
  // episode, i.e. a state strictly later than this transition's start.
  void Validate() const;
};

// Replaces the goal by `goal_world` and recomputes only the goal term, the
// reward total, and termination.
Transition RelabelToGoal(const Transition& t, Vec2 goal_world);

// Relabels `t` with the state achieved by `source`; throws
// std::invalid_argument across episodes or when `source` precedes `t`.
Transition Relabel(const Transition& t, const Transition& source);

struct SampledTransition {
  Transition transition;
  bool relabeled = false;
  int source_step = -1;  // step of the transition whose achieved state became the goal
};

// FIFO buffer with a per-episode step index for future-goal lookup. One
// writer; samplers take a shared lock and see a consistent snapshot.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);
  ReplayBuffer(ReplayBuffer&& other) noexcept;

  // Throws std::invalid_argument when a step index skips within an episode.
  void Push(Transition t);

  std::vector<SampledTransition> Sample(size_t batch_size, const HERConfig& her, Rng& rng) const;

  size_t size() const;
  size_t capacity() const { return capacity_; }

  // Step indices per episode, oldest first.
  std::map<uint64_t, std::vector<int>> EpisodeSteps() const;
  std::vector<Transition> Contents() const;

  void Save(const std::filesystem::path& path) const;
  static ReplayBuffer Load(const std::filesystem::path& path);
  void ExportJsonl(const std::filesystem::path& path) const;

 private:
  struct Entry {
    int step;
    uint64_t seq;
  };
  const Transition& AtSeq(uint64_t seq) const { return slots_[seq % capacity_]; }

  size_t capacity_;
  std::vector<Transition> slots_;
  uint64_t next_seq_ = 0;
  uint64_t oldest_seq_ = 0;
  std::map<uint64_t, std::deque<Entry>> episodes_;
  mutable std::shared_mutex mu_;
};

}  // namespace s2s

#endif  // S2S_REPLAY_H_
