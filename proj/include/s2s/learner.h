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

#ifndef S2S_LEARNER_H_
#define S2S_LEARNER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "s2s/common.h"
#include "s2s/env.h"
#include "s2s/replay.h"
#include "s2s/vehicle.h"
#include "s2s/world.h"

namespace s2s {

// Feature layout: pooled class fractions, then past trajectory, achieved
// position and goal.
inline constexpr int kPoolGrid = 16;
inline constexpr int kMapFeatures = kPoolGrid * kPoolGrid * kNumClasses;
inline constexpr int kPastFeatures = kPastLength * 3;
inline constexpr int kGoalFreeFeatureDim = kMapFeatures + kPastFeatures + 2;
inline constexpr int kFeatureDim = kGoalFreeFeatureDim + 2;

using FeatureVector = std::vector<float>;

// Cell (r, c) covers an even share of pixels; class fractions per cell are
// stored at ((r * kPoolGrid + c) * kNumClasses + class). Throws
// std::invalid_argument unless the map dimensions are multiples of 16 and
// the past has kPastLength points.
FeatureVector Featurize(const Observation& obs);
FeatureVector GoalFreeFeatures(const Observation& obs);
FeatureVector WithGoal(std::span<const float> goal_free, Vec2 goal);

struct PolicyParams {
  int feature_dim = kFeatureDim;
  int hidden = 8;
  int horizon = 5;  // A
  std::vector<double> values;

  static size_t Count(int feature_dim, int hidden, int horizon);
  static PolicyParams Zeros(int hidden, int horizon, int feature_dim = kFeatureDim);
  size_t size() const { return values.size(); }
  void Validate() const;

  void Save(const std::filesystem::path& path) const;
  static PolicyParams Load(const std::filesystem::path& path);
};

// tanh hidden layer, then theta = (pi/4) tanh(.) and alpha = sigmoid(.) per
// tuple. Inputs are rescaled per feature block before the first layer.
std::vector<ActionTuple> Act(const PolicyParams& params, std::span<const float> features);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual int horizon() const = 0;
  virtual std::vector<ActionTuple> Act(const Observation& obs, Rng& rng) const = 0;
};

class MlpPolicy : public Policy {
 public:
  explicit MlpPolicy(PolicyParams params);
  int horizon() const override { return params_.horizon; }
  std::vector<ActionTuple> Act(const Observation& obs, Rng& rng) const override;
  const PolicyParams& params() const { return params_; }

 private:
  PolicyParams params_;
};

// Uniform actions over the full bounds.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(int horizon) : horizon_(horizon) {}
  int horizon() const override { return horizon_; }
  std::vector<ActionTuple> Act(const Observation& obs, Rng& rng) const override;

 private:
  int horizon_;
};

// Steers at the goal bearing with a fixed spacing increment.
class GoalSeekingPolicy : public Policy {
 public:
  explicit GoalSeekingPolicy(int horizon, double accel = 0.0) : horizon_(horizon), accel_(accel) {}
  int horizon() const override { return horizon_; }
  std::vector<ActionTuple> Act(const Observation& obs, Rng& rng) const override;

 private:
  int horizon_;
  double accel_;
};

// Privileged driver with world access: scores constant-steer candidates by a
// look-ahead rollout against obstacles and goal distance.
struct ExpertConfig {
  double target_speed = 4.0;  // m/s
  double clearance = 0.5;     // m beyond the footprint
  int lookahead_decisions = 3;
};

std::vector<ActionTuple> ExpertActions(const World& world, const VehicleState& state,
                                       std::span<const Pose2> past_ego, Vec2 goal_world,
                                       int horizon, const EnvConfig& env,
                                       const ExpertConfig& cfg = {});

using EnvFactory = std::function<std::unique_ptr<Env>()>;

struct EpisodeOutcome {
  uint64_t seed = 0;
  double total_return = 0.0;
  int decisions = 0;
  bool success = false;
  bool collision = false;
};

// Called after every step with the decision index, actions and result.
using StepObserver =
    std::function<void(int, std::span<const ActionTuple>, const StepResult&)>;

EpisodeOutcome RunEpisode(Env& env, const Policy& policy, uint64_t seed,
                          const StepObserver& observer = nullptr);
// Same, starting from a constructed scene; the seed drives rendering
// randomization and the policy's sampling.
EpisodeOutcome RunScenarioEpisode(Env& env, const Policy& policy, const Scenario& scene,
                                  uint64_t seed, const StepObserver& observer = nullptr);

struct EvalReport {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double mean_decisions_to_goal = 0.0;  // over successful episodes, 0 if none
  double collision_rate = 0.0;          // episodes with any collision
  std::vector<EpisodeOutcome> outcomes;
};

// Episode i resets with DeriveSeed(seed, i), so reports are matched across
// policies for the same seed. Throws std::invalid_argument when n < 1.
// Rates and means over a finished set of episodes.
EvalReport SummarizeOutcomes(std::vector<EpisodeOutcome> outcomes);

EvalReport Evaluate(const Policy& policy, const EnvFactory& factory, int n_episodes,
                    uint64_t seed, int threads = 0);
EvalReport EvaluateScenario(const Policy& policy, const EnvFactory& factory, const Scenario& scene,
                            int n_episodes, uint64_t seed, int threads = 0);

struct CEMConfig {
  int population = 32;
  double elite_fraction = 0.25;
  int iterations = 30;
  double init_noise = 2.0;
  double min_noise = 0.02;
  // Added in quadrature to the refit noise, decaying linearly to zero over
  // the run; guards against premature collapse.
  double extra_noise = 0.5;
  int episodes_per_candidate = 8;
  int parallel_envs = 0;  // 0 means ThreadCount()
  int hidden = 8;
  int horizon = 5;
  // Fresh evaluation seeds each iteration; fixed seeds overfit the episode set.
  bool fixed_eval_seeds = false;
  // First-layer mean on the state and goal inputs; breaks symmetry between
  // hidden units. Map inputs start at zero mean so an obstacle-free view
  // does not perturb the goal response before the search tunes it.
  double init_weight_scale = 1.0;
  double map_init_scale = 0.0;
  // Initial noise on first-layer weights relative to init_noise. The first
  // layer is mostly map weights; keeping it quiet lets the search act on the
  // readout first.
  double first_layer_noise_ratio = 0.05;

  int elite_count() const;
  void Validate() const;
};

struct CemIterationStats {
  int iteration = 0;
  double elite_mean = 0.0;
  double population_mean = 0.0;
  double best_return = 0.0;
  double mean_noise = 0.0;
};

struct CemResult {
  PolicyParams params;  // best mean return seen
  double best_return = 0.0;
  std::vector<CemIterationStats> curve;
};

using CemProgress = std::function<void(const CemIterationStats&)>;

CemResult TrainCem(const EnvFactory& factory, const CEMConfig& cfg, uint64_t seed,
                   const CemProgress& progress = nullptr);

void WriteCurveCsv(const std::filesystem::path& path, std::span<const CemIterationStats> curve);

struct ReplaySmokeResult {
  std::vector<SampledTransition> batch;
  int episodes = 0;
  int transitions = 0;
};

// Drives random episodes into `buffer`, then draws one HER batch.
ReplaySmokeResult ReplayFillAndSampleSmoke(Env& env, ReplayBuffer& buffer, const HERConfig& her,
                                           int episodes, size_t batch_size, uint64_t seed);

}  // namespace s2s

#endif  // S2S_LEARNER_H_
