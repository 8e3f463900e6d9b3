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

#include "s2s/replay.h"

#include <fstream>
#include <mutex>
#include <stdexcept>

#include "binary_io.h"
#include "json.hpp"

namespace s2s {
namespace {

constexpr uint16_t kReplayFormatVersion = 1;

using internal::ReadLe;
using internal::WriteLe;

void WriteFloats(std::ostream& out, const std::vector<float>& v) {
  WriteLe<uint32_t>(out, static_cast<uint32_t>(v.size()));
  for (float f : v) WriteLe<float>(out, f);
}

std::vector<float> ReadFloats(std::istream& in) {
  std::vector<float> v(ReadLe<uint32_t>(in));
  for (float& f : v) f = ReadLe<float>(in);
  return v;
}

void WritePose(std::ostream& out, const Pose2& p) {
  WriteLe(out, p.x);
  WriteLe(out, p.y);
  WriteLe(out, p.yaw);
}

Pose2 ReadPose(std::istream& in) {
  Pose2 p;
  p.x = ReadLe<double>(in);
  p.y = ReadLe<double>(in);
  p.yaw = ReadLe<double>(in);
  return p;
}

void WriteVec(std::ostream& out, Vec2 v) {
  WriteLe(out, v.x);
  WriteLe(out, v.y);
}

Vec2 ReadVec(std::istream& in) {
  Vec2 v;
  v.x = ReadLe<double>(in);
  v.y = ReadLe<double>(in);
  return v;
}

}  // namespace

Transition MakeTransition(std::vector<float> obs, std::vector<float> next_obs,
                          std::span<const ActionTuple> action, const StepResult& step,
                          const EnvConfig& config, uint64_t episode_id, int step_index,
                          bool budget_exhausted) {
  Transition t;
  t.obs = std::move(obs);
  t.next_obs = std::move(next_obs);
  t.action.assign(action.begin(), action.end());
  t.terms = step.info.terms;
  t.weights = config.weights;
  t.goal_radius = config.episode.goal_radius;
  t.reward = step.reward;
  t.reference_pose = step.info.decision_pose;
  t.next_reference_pose = step.info.state.pose();
  t.goal_world = step.info.goal_world;
  t.goal = ToEgocentric(t.goal_world, t.reference_pose);
  t.next_goal = ToEgocentric(t.goal_world, t.next_reference_pose);
  t.achieved_world = step.info.achieved_world;
  t.achieved = step.info.achieved_ego;
  t.done = step.done;
  t.goal_reached = step.info.goal_reached;
  t.collision_terminated = step.info.collision_terminated;
  t.budget_exhausted = budget_exhausted;
  t.episode_id = episode_id;
  t.step = step_index;
  return t;
}

void HERConfig::Validate() const {
  if (!(relabel_ratio >= 0 && relabel_ratio <= 1)) {
    throw std::invalid_argument("relabel_ratio must be in [0, 1]");
  }
}

Transition RelabelToGoal(const Transition& t, Vec2 goal_world) {
  Transition r = t;
  r.goal_world = goal_world;
  r.goal = ToEgocentric(goal_world, t.reference_pose);
  r.next_goal = ToEgocentric(goal_world, t.next_reference_pose);
  r.terms.goal = GoalTerm(goal_world, t.achieved_world, t.goal_radius);
  r.goal_reached = GoalReached(goal_world, t.achieved_world, t.goal_radius);
  r.done = r.goal_reached || r.collision_terminated || r.budget_exhausted;
  r.reward = r.terms.Weighted(r.weights);
  return r;
}

Transition Relabel(const Transition& t, const Transition& source) {
  if (source.episode_id != t.episode_id) {
    throw std::invalid_argument("Relabel: source transition is from another episode");
  }
  if (source.step < t.step) {
    throw std::invalid_argument("Relabel: source transition precedes the relabeled one");
  }
  return RelabelToGoal(t, source.achieved_world);
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer capacity must be positive");
  slots_.resize(capacity);
}

ReplayBuffer::ReplayBuffer(ReplayBuffer&& other) noexcept {
  std::unique_lock lock(other.mu_);
  capacity_ = other.capacity_;
  slots_ = std::move(other.slots_);
  next_seq_ = other.next_seq_;
  oldest_seq_ = other.oldest_seq_;
  episodes_ = std::move(other.episodes_);
}

void ReplayBuffer::Push(Transition t) {
  std::unique_lock lock(mu_);
  auto it = episodes_.find(t.episode_id);
  if (it != episodes_.end() && t.step != it->second.back().step + 1) {
    throw std::invalid_argument("ReplayBuffer: non-contiguous step " + std::to_string(t.step) +
                                " in episode " + std::to_string(t.episode_id));
  }
  if (next_seq_ - oldest_seq_ == capacity_) {
    const Transition& victim = AtSeq(oldest_seq_);
    auto vit = episodes_.find(victim.episode_id);
    vit->second.pop_front();
    if (vit->second.empty()) episodes_.erase(vit);
    ++oldest_seq_;
  }
  const uint64_t seq = next_seq_++;
  episodes_[t.episode_id].push_back({t.step, seq});
  slots_[seq % capacity_] = std::move(t);
}

size_t ReplayBuffer::size() const {
  std::shared_lock lock(mu_);
  return static_cast<size_t>(next_seq_ - oldest_seq_);
}

std::vector<SampledTransition> ReplayBuffer::Sample(size_t batch_size, const HERConfig& her,
                                                    Rng& rng) const {
  her.Validate();
  std::shared_lock lock(mu_);
  const uint64_t live = next_seq_ - oldest_seq_;
  if (live == 0) throw std::logic_error("ReplayBuffer::Sample on an empty buffer");
  std::vector<SampledTransition> batch;
  batch.reserve(batch_size);
  for (size_t b = 0; b < batch_size; ++b) {
    const Transition& t = AtSeq(oldest_seq_ + rng.UniformInt(live));
    SampledTransition s{t, false, -1};
    if (rng.Bernoulli(her.relabel_ratio)) {
      // Steps of one episode are contiguous and sorted, so the candidates
      // are the tail starting at t.
      const auto& steps = episodes_.at(t.episode_id);
      const size_t first = static_cast<size_t>(t.step - steps.front().step);
      const size_t pick = first + rng.UniformInt(steps.size() - first);
      const Transition& source = AtSeq(steps[pick].seq);
      s.transition = Relabel(t, source);
      s.relabeled = true;
      s.source_step = source.step;
    }
    batch.push_back(std::move(s));
  }
  return batch;
}

std::map<uint64_t, std::vector<int>> ReplayBuffer::EpisodeSteps() const {
  std::shared_lock lock(mu_);
  std::map<uint64_t, std::vector<int>> out;
  for (const auto& [id, entries] : episodes_) {
    for (const Entry& e : entries) out[id].push_back(e.step);
  }
  return out;
}

std::vector<Transition> ReplayBuffer::Contents() const {
  std::shared_lock lock(mu_);
  std::vector<Transition> out;
  for (uint64_t s = oldest_seq_; s < next_seq_; ++s) out.push_back(AtSeq(s));
  return out;
}

void ReplayBuffer::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::vector<Transition> items = Contents();
  internal::WriteMagic(out, "S2SR");
  WriteLe<uint16_t>(out, kReplayFormatVersion);
  WriteLe<uint64_t>(out, capacity_);
  WriteLe<uint64_t>(out, items.size());
  for (const Transition& t : items) {
    WriteFloats(out, t.obs);
    WriteFloats(out, t.next_obs);
    WriteLe<uint32_t>(out, static_cast<uint32_t>(t.action.size()));
    for (const ActionTuple& a : t.action) {
      WriteLe(out, a.steer);
      WriteLe(out, a.accel);
    }
    for (double v : {t.terms.goal, t.terms.upright, t.terms.steer, t.terms.collision,
                     t.weights.goal, t.weights.upright, t.weights.steer, t.weights.collision,
                     t.goal_radius, t.reward}) {
      WriteLe(out, v);
    }
    WritePose(out, t.reference_pose);
    WritePose(out, t.next_reference_pose);
    for (Vec2 v : {t.goal_world, t.goal, t.next_goal, t.achieved_world, t.achieved}) WriteVec(out, v);
    const uint8_t flags = (t.done ? 1 : 0) | (t.goal_reached ? 2 : 0) |
                          (t.collision_terminated ? 4 : 0) | (t.budget_exhausted ? 8 : 0);
    WriteLe<uint8_t>(out, flags);
    WriteLe<uint64_t>(out, t.episode_id);
    WriteLe<int32_t>(out, t.step);
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ReplayBuffer ReplayBuffer::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  internal::ExpectMagic(in, "S2SR");
  if (ReadLe<uint16_t>(in) != kReplayFormatVersion) {
    throw std::runtime_error("unsupported replay format version");
  }
  ReplayBuffer buffer(ReadLe<uint64_t>(in));
  const auto count = ReadLe<uint64_t>(in);
  for (uint64_t i = 0; i < count; ++i) {
    Transition t;
    t.obs = ReadFloats(in);
    t.next_obs = ReadFloats(in);
    t.action.resize(ReadLe<uint32_t>(in));
    for (ActionTuple& a : t.action) {
      a.steer = ReadLe<double>(in);
      a.accel = ReadLe<double>(in);
    }
    for (double* v : {&t.terms.goal, &t.terms.upright, &t.terms.steer, &t.terms.collision,
                      &t.weights.goal, &t.weights.upright, &t.weights.steer, &t.weights.collision,
                      &t.goal_radius, &t.reward}) {
      *v = ReadLe<double>(in);
    }
    t.reference_pose = ReadPose(in);
    t.next_reference_pose = ReadPose(in);
    for (Vec2* v : {&t.goal_world, &t.goal, &t.next_goal, &t.achieved_world, &t.achieved}) {
      *v = ReadVec(in);
    }
    const auto flags = ReadLe<uint8_t>(in);
    t.done = flags & 1;
    t.goal_reached = flags & 2;
    t.collision_terminated = flags & 4;
    t.budget_exhausted = flags & 8;
    t.episode_id = ReadLe<uint64_t>(in);
    t.step = ReadLe<int32_t>(in);
    buffer.Push(std::move(t));
  }
  return buffer;
}

void ReplayBuffer::ExportJsonl(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const Transition& t : Contents()) {
    nlohmann::json j;
    j["episode"] = t.episode_id;
    j["t"] = t.step;
    j["state"] = {{"x", t.reference_pose.x}, {"y", t.reference_pose.y}, {"yaw", t.reference_pose.yaw}};
    nlohmann::json acts = nlohmann::json::array();
    for (const ActionTuple& a : t.action) acts.push_back({a.steer, a.accel});
    j["actions"] = std::move(acts);
    j["reward"] = t.reward;
    j["reward_components"] = {{"goal", t.weights.goal * t.terms.goal},
                              {"upright", t.weights.upright * t.terms.upright},
                              {"steer", t.weights.steer * t.terms.steer},
                              {"collision", t.weights.collision * t.terms.collision}};
    j["done"] = t.done;
    j["info"] = {{"achieved", {t.achieved_world.x, t.achieved_world.y}},
                 {"goal", {t.goal_world.x, t.goal_world.y}},
                 {"goal_reached", t.goal_reached}};
    out << j.dump() << '\n';
  }
}

}  // namespace s2s
