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

#include "s2s/env.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace s2s {

bool GoalReached(Vec2 goal, Vec2 achieved, double radius) {
  return (goal - achieved).Norm() < radius;
}

double GoalTerm(Vec2 goal, Vec2 achieved, double radius) {
  return GoalReached(goal, achieved, radius) ? kGoalReward : -1.0;
}

double UprightTerm(double roll_deg, double pitch_deg) {
  return -std::max(std::abs(roll_deg), std::abs(pitch_deg)) / 180.0;
}

double SteerTerm(std::span<const double> steers) {
  double sq = 0.0;
  for (double s : steers) sq += s * s;
  return -std::sqrt(sq);
}

RewardTerms ComputeRewardTerms(Vec2 goal, Vec2 achieved, std::span<const ActionTuple> actions,
                               bool collision, double roll_deg, double pitch_deg,
                               double goal_radius) {
  std::vector<double> steers;
  steers.reserve(actions.size());
  for (const ActionTuple& a : actions) steers.push_back(a.steer);
  RewardTerms t;
  t.goal = GoalTerm(goal, achieved, goal_radius);
  t.upright = UprightTerm(roll_deg, pitch_deg);
  t.steer = SteerTerm(steers);
  t.collision = collision ? -1.0 : 0.0;
  return t;
}

double Reward(Vec2 goal, Vec2 achieved, std::span<const ActionTuple> actions, bool collision,
              double roll_deg, double pitch_deg, const RewardWeights& weights,
              double goal_radius) {
  return ComputeRewardTerms(goal, achieved, actions, collision, roll_deg, pitch_deg, goal_radius)
      .Weighted(weights);
}

void RewardWeights::Validate() const {
  if (!(goal >= 0 && upright >= 0 && steer >= 0 && collision >= 0)) {
    throw std::invalid_argument("reward weights must be non-negative");
  }
}

void EpisodeConfig::Validate() const {
  if (!(goal_radius > 0)) throw std::invalid_argument("goal_radius must be positive");
  if (!(goal_range > 0) || goal_min_distance < 0 || goal_min_distance > goal_range) {
    throw std::invalid_argument("need 0 <= goal_min_distance <= goal_range");
  }
  if (max_decisions < 1 || substeps_per_action < 1 || !(dt > 0)) {
    throw std::invalid_argument("episode timing parameters must be positive");
  }
  if (initial_speed < 0) throw std::invalid_argument("initial_speed must be >= 0");
}

EnvConfig EnvConfig::EmptyMeadow(uint64_t world_seed) {
  EnvConfig cfg;
  WorldSpec spec;
  spec.seed = world_seed;
  spec.preset = Preset::kMeadow;
  spec.relief_scale = 0.0;
  cfg.worlds = {spec};
  cfg.world_variants = 1;
  cfg.camera.resolution = 64;
  return cfg;
}

void EnvConfig::Validate() const {
  if (worlds.empty() && !scenes) {
    throw std::invalid_argument("EnvConfig needs at least one world spec");
  }
  for (const WorldSpec& w : worlds) w.Validate();
  if (world_variants < 1) throw std::invalid_argument("world_variants must be >= 1");
  camera.Validate();
  randomization.Validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  rollout.Validate();
  weights.Validate();
  episode.Validate();
}

std::shared_ptr<const World> WorldCache::Get(const WorldSpec& spec, int variant) {
  std::lock_guard<std::mutex> lock(mu_);
  size_t index = 0;
  while (index < specs_.size() && !(specs_[index] == spec)) ++index;
  if (index == specs_.size()) specs_.push_back(spec);
  auto& slot = worlds_[{index, variant}];
  if (!slot) {
    WorldSpec varied = spec;
    if (variant != 0) varied.seed = DeriveSeed(spec.seed, static_cast<uint64_t>(variant));
    slot = std::make_shared<const World>(GenerateWorld(varied));
  }
  return slot;
}

Env::Env(EnvConfig config, std::shared_ptr<WorldCache> cache)
    : config_(std::move(config)),
      cache_(cache ? std::move(cache) : std::make_shared<WorldCache>()),
      tracker_(config_.tracker) {
  config_.Validate();
  tracker_ = PathTracker([&] {
    TrackerGains g = config_.tracker;
    g.point_period = config_.episode.action_period();
    return g;
  }());
}

Observation Env::Reset(uint64_t seed) {
  if (config_.scenes) {
    Scenario scene = config_.scenes(seed);
    return ResetScenario(std::move(scene.world), scene.start, scene.goal, seed);
  }
  Rng rng(DeriveSeed(seed, 31));
  const size_t which = config_.sample_preset ? rng.UniformInt(config_.worlds.size()) : 0;
  const int variant = static_cast<int>(rng.UniformInt(static_cast<uint64_t>(config_.world_variants)));
  auto world = cache_->Get(config_.worlds[which], variant);

  const EpisodeConfig& ep = config_.episode;
  const double extent = world->extent();
  const double margin = std::min(ep.goal_range + 2.0, extent / 2);
  const double radius = config_.vehicle.footprint_radius;
  std::optional<Pose2> start;
  for (int attempt = 0; attempt < 100 && !start; ++attempt) {
    Pose2 p;
    if (attempt == 0 && !ep.randomize_start) {
      p = {world->start_point().x, world->start_point().y, 0.0};
    } else {
      p = {rng.Uniform(margin, extent - margin), rng.Uniform(margin, extent - margin),
           rng.Uniform(-kPi, kPi)};
    }
    if (!QueryCollision(*world, p.x, p.y, radius)) start = p;
  }
  if (!start) throw std::runtime_error("Reset: no collision-free start after 100 tries");

  std::optional<Vec2> goal;
  for (int attempt = 0; attempt < 100 && !goal; ++attempt) {
    const double lo = ep.goal_min_distance * ep.goal_min_distance;
    const double r = std::sqrt(rng.Uniform(lo, ep.goal_range * ep.goal_range));
    const double a = rng.Uniform(-kPi, kPi);
    const Vec2 g = ToWorld({r * std::cos(a), r * std::sin(a)}, *start);
    if (g.x < 0 || g.y < 0 || g.x > extent || g.y > extent) continue;
    if (QueryCollision(*world, g.x, g.y, 1e-9)) continue;
    goal = g;
  }
  if (!goal) throw std::runtime_error("Reset: no admissible goal after 100 tries");
  return ResetScenario(std::move(world), *start, *goal, seed);
}

Observation Env::ResetScenario(std::shared_ptr<const World> world, const Pose2& start,
                               Vec2 goal_world, uint64_t seed) {
  world_ = std::move(world);
  episode_seed_ = seed;
  state_ = {start.x, start.y, WrapAngle(start.yaw), config_.episode.initial_speed};
  goal_ = goal_world;
  decision_ = 0;
  done_ = false;
  tracker_.Reset();
  history_.clear();
  const double spacing = config_.episode.initial_speed * config_.episode.action_period();
  for (int k = kPastLength - 1; k >= 0; --k) {
    history_.push_back({start.x - k * spacing * std::cos(start.yaw),
                        start.y - k * spacing * std::sin(start.yaw), state_.yaw});
  }
  return Observe();
}

Observation Env::Observe() {
  const Pose2 pose = state_.pose();
  const RenderOutput frame =
      Render(*world_, pose, config_.camera, config_.randomization,
             DeriveSeed(episode_seed_, 1000 + static_cast<uint64_t>(decision_)));
  Observation obs;
  obs.class_map = frame.class_map;
  if (config_.include_rgb) obs.rgb = frame.rgb;
  const size_t n = history_.size();
  const size_t first = n > kPastLength ? n - kPastLength : 0;
  obs.past = EgocentricTransform(std::span(history_).subspan(first), pose);
  obs.achieved = {0.0, 0.0};
  obs.goal = ToEgocentric(goal_, pose);
  return obs;
}

StepResult Env::Step(std::span<const ActionTuple> actions) {
  if (done_) throw std::logic_error("Env::Step called on a finished episode");
  if (actions.empty()) throw std::invalid_argument("Env::Step needs at least one action tuple");
  const EpisodeConfig& ep = config_.episode;
  const Pose2 decision_pose = state_.pose();

  const size_t n = history_.size();
  const std::span<const Pose2> recent = std::span(history_).subspan(n > kPastLength ? n - kPastLength : 0);
  const Trajectory past = EgocentricTransform(recent, decision_pose);
  StepResult result;
  StepInfo& info = result.info;
  info.decision_pose = decision_pose;
  info.goal_world = goal_;
  info.plan = GetTraj(static_cast<int>(actions.size()) + 1, past, actions, config_.rollout);
  const Trajectory world_plan = EgocentricToWorld(info.plan, decision_pose);

  tracker_.Reset();
  const int total = static_cast<int>(actions.size()) * ep.substeps_per_action;
  RewardTerms& terms = info.terms;
  for (int k = 0; k < total; ++k) {
    const ActionTuple& action = actions[k / ep.substeps_per_action];
    const WheelCommand cmd = tracker_.Track(state_, world_plan, ep.dt);
    const DynamicsResult dyn = StepDynamics(state_, cmd, ep.dt, *world_, config_.vehicle);
    state_ = dyn.state;
    const Attitude att = SurfaceAttitude(*world_, state_.x, state_.y, state_.yaw);
    const ActionTuple clamped = action.Clamped();
    const RewardTerms sub = ComputeRewardTerms(goal_, state_.position(), std::span(&clamped, 1),
                                               dyn.collision, att.roll_deg, att.pitch_deg,
                                               ep.goal_radius);
    terms.upright += sub.upright;
    terms.steer += sub.steer;
    terms.collision += sub.collision;
    ++info.substeps;
    if (dyn.collision) {
      info.collision = true;
      ++info.collision_substeps;
    }
    if ((k + 1) % ep.substeps_per_action == 0) history_.push_back(state_.pose());
    if (GoalReached(goal_, state_.position(), ep.goal_radius)) {
      info.goal_reached = true;
      break;
    }
    if (dyn.collision && ep.collision_terminal) {
      info.collision_terminated = true;
      break;
    }
  }
  // History only needs the last kPastLength points.
  if (history_.size() > 4 * kPastLength) {
    history_.erase(history_.begin(), history_.end() - kPastLength);
  }
  terms.goal = GoalTerm(goal_, state_.position(), ep.goal_radius);
  ++decision_;
  info.truncated = !info.goal_reached && !info.collision_terminated && decision_ >= ep.max_decisions;
  info.achieved_world = state_.position();
  info.achieved_ego = ToEgocentric(state_.position(), decision_pose);
  info.state = state_;
  done_ = info.goal_reached || info.collision_terminated || info.truncated;
  result.done = done_;
  result.reward = terms.Weighted(config_.weights);
  result.observation = Observe();
  return result;
}

namespace {

// Flat empty meadow with one rock; positions are relative to the world center.
Scenario SingleRockScene(double rock_radius, Vec2 rock_offset, Vec2 goal_offset,
                         double start_yaw) {
  WorldSpec spec;
  spec.preset = Preset::kMeadow;
  spec.relief_scale = 0.0;
  const int n = GridSizeFor(spec);
  std::vector<double> heights(static_cast<size_t>(n) * n, 0.0);
  std::vector<uint8_t> road(heights.size(), 0);
  Scenario scene;
  scene.start = {spec.extent / 2, spec.extent / 2, start_yaw};
  Obstacle rock;
  rock.cls = ClassId::kRocks;
  rock.center = scene.start.Position() + rock_offset;
  rock.radius = rock_radius;
  rock.height = 1.5 * rock_radius;
  rock.base = -0.2;
  scene.goal = scene.start.Position() + goal_offset;
  scene.world = std::make_shared<const World>(spec, std::move(heights), std::vector<Obstacle>{rock},
                                              std::move(road));
  return scene;
}

}  // namespace

Scenario RockAvoidanceScene(double rock_radius, double rock_distance, double goal_distance) {
  if (!(rock_radius > 0) || !(rock_distance > 0) || !(goal_distance > rock_distance)) {
    throw std::invalid_argument("RockAvoidanceScene: need 0 < rock_distance < goal_distance");
  }
  return SingleRockScene(rock_radius, {rock_distance, 0.0}, {goal_distance, 0.0}, 0.0);
}

Scenario RandomRockScene(uint64_t seed) {
  Rng rng(DeriveSeed(seed, 0x70c6));
  const double radius = rng.Uniform(0.6, 1.4);
  const double bearing = rng.Uniform(-0.3, 0.3);
  const double goal_distance = rng.Uniform(12.0, 18.0);
  const double along = rng.Uniform(5.0, 10.0);
  const double lateral = rng.Uniform(-1.0, 1.0);
  const Vec2 dir{std::cos(bearing), std::sin(bearing)};
  const Vec2 normal{-dir.y, dir.x};
  return SingleRockScene(radius, along * dir + lateral * normal, goal_distance * dir,
                         rng.Uniform(-0.3, 0.3));
}

std::string EpisodeLogLine(int t, std::span<const ActionTuple> actions, const StepResult& step,
                           const RewardWeights& weights) {
  nlohmann::json j;
  j["t"] = t;
  const VehicleState& s = step.info.state;
  j["state"] = {{"x", s.x}, {"y", s.y}, {"yaw", s.yaw}, {"speed", s.speed}};
  nlohmann::json acts = nlohmann::json::array();
  for (const ActionTuple& a : actions) acts.push_back({a.steer, a.accel});
  j["actions"] = std::move(acts);
  const RewardTerms& r = step.info.terms;
  j["reward"] = step.reward;
  j["reward_components"] = {{"goal", weights.goal * r.goal},
                            {"upright", weights.upright * r.upright},
                            {"steer", weights.steer * r.steer},
                            {"collision", weights.collision * r.collision}};
  j["done"] = step.done;
  j["info"] = {{"achieved", {step.info.achieved_world.x, step.info.achieved_world.y}},
               {"goal", {step.info.goal_world.x, step.info.goal_world.y}},
               {"collision", step.info.collision},
               {"collision_substeps", step.info.collision_substeps},
               {"goal_reached", step.info.goal_reached},
               {"truncated", step.info.truncated}};
  return j.dump();
}

double SyncBundle::spread() const {
  const double lo = std::min({image.timestamp, odometry.timestamp, goal.timestamp});
  const double hi = std::max({image.timestamp, odometry.timestamp, goal.timestamp});
  return hi - lo;
}

void MessageSynchronizer::Offer(TimedMessage msg) {
  if (!std::isfinite(msg.timestamp)) return;
  Slot& slot = slots_[static_cast<int>(msg.kind)];
  if (slot.msg && msg.timestamp < slot.msg->timestamp) return;
  slot.msg = std::move(msg);
  slot.fresh = true;
}

std::optional<SyncBundle> MessageSynchronizer::SyncStep(double now) {
  for (const Slot& slot : slots_) {
    if (!slot.msg || !slot.fresh) return std::nullopt;
    if (now - slot.msg->timestamp > max_age_) return std::nullopt;
  }
  SyncBundle bundle{*slots_[0].msg, *slots_[1].msg, *slots_[2].msg};
  // The epsilon only absorbs decimal round-off such as 1.1 - 1.0.
  if (bundle.spread() > tolerance_ + 1e-12) return std::nullopt;
  for (Slot& slot : slots_) slot.fresh = false;
  return bundle;
}

}  // namespace s2s
