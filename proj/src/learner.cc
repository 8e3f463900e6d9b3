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

#include "s2s/learner.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "binary_io.h"
#include "s2s/parallel.h"

namespace s2s {
namespace {

constexpr uint16_t kPolicyFormatVersion = 1;

// Per-block input scaling keeps every block near unit magnitude: the map
// block sums to 256 over all cells, past points are a few meters, goals up
// to ~20 m.
constexpr double kMapScale = 1.0 / kPoolGrid;
constexpr double kPastScale = 0.2;
constexpr double kGoalScale = 0.1;

double InputScale(int index) {
  if (index < kMapFeatures) return kMapScale;
  if (index < kMapFeatures + kPastFeatures) return kPastScale;
  if (index < kGoalFreeFeatureDim) return 1.0;
  return kGoalScale;
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

FeatureVector GoalFreeFeatures(const Observation& obs) {
  const ClassMap& map = obs.class_map;
  if (map.width <= 0 || map.height <= 0 || map.width % kPoolGrid != 0 ||
      map.height % kPoolGrid != 0) {
    throw std::invalid_argument("Featurize: class map dimensions must be multiples of 16");
  }
  if (obs.past.size() != static_cast<size_t>(kPastLength)) {
    throw std::invalid_argument("Featurize: past trajectory must have 10 points");
  }
  FeatureVector f(kGoalFreeFeatureDim, 0.0f);
  const int cell_h = map.height / kPoolGrid;
  const int cell_w = map.width / kPoolGrid;
  std::vector<int> counts(kNumClasses);
  for (int r = 0; r < kPoolGrid; ++r) {
    for (int c = 0; c < kPoolGrid; ++c) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int y = r * cell_h; y < (r + 1) * cell_h; ++y) {
        for (int x = c * cell_w; x < (c + 1) * cell_w; ++x) {
          const int label = map.labels[static_cast<size_t>(y) * map.width + x];
          if (label >= kNumClasses) throw std::invalid_argument("Featurize: invalid class label");
          ++counts[label];
        }
      }
      const float inv = 1.0f / static_cast<float>(cell_h * cell_w);
      float* cell = &f[(r * kPoolGrid + c) * kNumClasses];
      for (int k = 0; k < kNumClasses; ++k) cell[k] = static_cast<float>(counts[k]) * inv;
    }
  }
  float* past = &f[kMapFeatures];
  for (int i = 0; i < kPastLength; ++i) {
    past[3 * i] = static_cast<float>(obs.past[i].x);
    past[3 * i + 1] = static_cast<float>(obs.past[i].y);
    past[3 * i + 2] = static_cast<float>(obs.past[i].yaw);
  }
  f[kMapFeatures + kPastFeatures] = static_cast<float>(obs.achieved.x);
  f[kMapFeatures + kPastFeatures + 1] = static_cast<float>(obs.achieved.y);
  return f;
}

FeatureVector WithGoal(std::span<const float> goal_free, Vec2 goal) {
  if (goal_free.size() != static_cast<size_t>(kGoalFreeFeatureDim)) {
    throw std::invalid_argument("WithGoal: wrong goal-free feature length");
  }
  FeatureVector f(goal_free.begin(), goal_free.end());
  f.push_back(static_cast<float>(goal.x));
  f.push_back(static_cast<float>(goal.y));
  return f;
}

FeatureVector Featurize(const Observation& obs) {
  return WithGoal(GoalFreeFeatures(obs), obs.goal);
}

size_t PolicyParams::Count(int feature_dim, int hidden, int horizon) {
  const size_t f = feature_dim, h = hidden, out = 2 * static_cast<size_t>(horizon);
  return h * f + h + out * h + out;
}

PolicyParams PolicyParams::Zeros(int hidden, int horizon, int feature_dim) {
  PolicyParams p;
  p.feature_dim = feature_dim;
  p.hidden = hidden;
  p.horizon = horizon;
  p.values.assign(Count(feature_dim, hidden, horizon), 0.0);
  return p;
}

void PolicyParams::Validate() const {
  if (feature_dim < 1 || hidden < 1 || horizon < 1) {
    throw std::invalid_argument("PolicyParams: dimensions must be positive");
  }
  if (values.size() != Count(feature_dim, hidden, horizon)) {
    throw std::invalid_argument("PolicyParams: parameter count does not match dimensions");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("PolicyParams: non-finite parameter");
  }
}

void PolicyParams::Save(const std::filesystem::path& path) const {
  Validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  internal::WriteMagic(out, "S2SP");
  internal::WriteLe<uint16_t>(out, kPolicyFormatVersion);
  internal::WriteLe<uint32_t>(out, feature_dim);
  internal::WriteLe<uint32_t>(out, hidden);
  internal::WriteLe<uint32_t>(out, horizon);
  internal::WriteLe<uint64_t>(out, values.size());
  for (double v : values) internal::WriteLe(out, v);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PolicyParams PolicyParams::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  internal::ExpectMagic(in, "S2SP");
  if (internal::ReadLe<uint16_t>(in) != kPolicyFormatVersion) {
    throw std::runtime_error("unsupported policy format version");
  }
  PolicyParams p;
  p.feature_dim = static_cast<int>(internal::ReadLe<uint32_t>(in));
  p.hidden = static_cast<int>(internal::ReadLe<uint32_t>(in));
  p.horizon = static_cast<int>(internal::ReadLe<uint32_t>(in));
  const auto n = internal::ReadLe<uint64_t>(in);
  if (n != Count(p.feature_dim, p.hidden, p.horizon)) {
    throw std::runtime_error("policy checkpoint: parameter count mismatch");
  }
  p.values.resize(n);
  for (double& v : p.values) v = internal::ReadLe<double>(in);
  p.Validate();
  return p;
}

std::vector<ActionTuple> Act(const PolicyParams& params, std::span<const float> features) {
  if (features.size() != static_cast<size_t>(params.feature_dim) ||
      params.values.size() != PolicyParams::Count(params.feature_dim, params.hidden,
                                                  params.horizon)) {
    throw std::invalid_argument("Act: feature length does not match policy parameters");
  }
  const bool standard = params.feature_dim == kFeatureDim;
  const size_t fd = params.feature_dim;
  const double* w1 = params.values.data();
  const double* b1 = w1 + params.hidden * fd;
  const double* w2 = b1 + params.hidden;
  const double* b2 = w2 + 2 * params.horizon * params.hidden;

  std::vector<double> x(fd);
  for (size_t i = 0; i < fd; ++i) x[i] = features[i] * (standard ? InputScale(static_cast<int>(i)) : 1.0);
  std::vector<double> h(params.hidden);
  for (int j = 0; j < params.hidden; ++j) {
    const double* row = w1 + j * fd;
    double acc = b1[j];
    for (size_t i = 0; i < fd; ++i) acc += row[i] * x[i];
    h[j] = std::tanh(acc);
  }
  std::vector<ActionTuple> out(params.horizon);
  for (int k = 0; k < params.horizon; ++k) {
    double z[2];
    for (int m = 0; m < 2; ++m) {
      const int o = 2 * k + m;
      double acc = b2[o];
      for (int j = 0; j < params.hidden; ++j) acc += w2[o * params.hidden + j] * h[j];
      z[m] = acc;
    }
    out[k] = ActionTuple{kMaxSteer * std::tanh(z[0]), Sigmoid(z[1])}.Clamped();
  }
  return out;
}

MlpPolicy::MlpPolicy(PolicyParams params) : params_(std::move(params)) { params_.Validate(); }

std::vector<ActionTuple> MlpPolicy::Act(const Observation& obs, Rng&) const {
  return s2s::Act(params_, Featurize(obs));
}

std::vector<ActionTuple> RandomPolicy::Act(const Observation&, Rng& rng) const {
  std::vector<ActionTuple> out(horizon_);
  for (ActionTuple& a : out) {
    a.steer = rng.Uniform(-kMaxSteer, kMaxSteer);
    a.accel = rng.Uniform();
  }
  return out;
}

std::vector<ActionTuple> GoalSeekingPolicy::Act(const Observation& obs, Rng&) const {
  const double bearing = std::atan2(obs.goal.y, obs.goal.x);
  return std::vector<ActionTuple>(horizon_, ActionTuple{bearing, accel_}.Clamped());
}

std::vector<ActionTuple> ExpertActions(const World& world, const VehicleState& state,
                                       std::span<const Pose2> past_ego, Vec2 goal_world,
                                       int horizon, const EnvConfig& env,
                                       const ExpertConfig& cfg) {
  if (past_ego.size() < 2) throw std::invalid_argument("ExpertActions: need two past points");
  const Pose2 pose = state.pose();
  const double period = env.episode.action_period();
  const Vec2 last = past_ego.back().Position();
  const Vec2 prev = past_ego[past_ego.size() - 2].Position();
  const double spacing = (last - prev).Norm();
  const double accel = std::clamp(cfg.target_speed * period - spacing, 0.0, 1.0);
  const int steps = horizon * std::max(1, cfg.lookahead_decisions);
  const double radius = env.vehicle.footprint_radius + cfg.clearance;
  const double goal_radius = env.episode.goal_radius;

  double best_score = std::numeric_limits<double>::infinity();
  double best_steer = 0.0;
  constexpr int kCandidates = 9;
  for (int j = 0; j < kCandidates; ++j) {
    const double steer = kMaxSteer * (2.0 * j / (kCandidates - 1) - 1.0);
    std::vector<ActionTuple> plan(steps, ActionTuple{steer, 0.0});
    plan[0].accel = accel;
    const Trajectory world_traj = EgocentricToWorld(GetTraj(steps + 1, past_ego, plan, env.rollout), pose);
    double score = 0.0;
    double closest = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < world_traj.size(); ++i) {
      const Vec2 a = world_traj[i - 1].Position();
      const Vec2 b = world_traj[i].Position();
      bool hit = false;
      for (double t : {0.5, 1.0}) {
        const Vec2 p = a + t * (b - a);
        hit = hit || QueryCollision(world, p.x, p.y, radius);
        closest = std::min(closest, (p - goal_world).Norm());
      }
      if (hit) {
        score += 1000.0 / static_cast<double>(i);
        break;
      }
      if (closest < goal_radius) break;
    }
    score += closest + 0.5 * std::abs(steer);
    if (score < best_score) {
      best_score = score;
      best_steer = steer;
    }
  }
  std::vector<ActionTuple> out(horizon, ActionTuple{best_steer, 0.0});
  out[0].accel = accel;
  return out;
}

EvalReport SummarizeOutcomes(std::vector<EpisodeOutcome> outcomes) {
  EvalReport report;
  report.episodes = static_cast<int>(outcomes.size());
  report.outcomes = std::move(outcomes);
  if (report.episodes == 0) return report;
  const int n_episodes = report.episodes;
  int successes = 0, collisions = 0, decisions_to_goal = 0;
  double total = 0.0;
  for (const EpisodeOutcome& o : report.outcomes) {
    total += o.total_return;
    if (o.success) {
      ++successes;
      decisions_to_goal += o.decisions;
    }
    if (o.collision) ++collisions;
  }
  report.success_rate = static_cast<double>(successes) / n_episodes;
  report.collision_rate = static_cast<double>(collisions) / n_episodes;
  report.mean_return = total / n_episodes;
  report.mean_decisions_to_goal =
      successes > 0 ? static_cast<double>(decisions_to_goal) / successes : 0.0;
  return report;
}

namespace {

EpisodeOutcome Drive(Env& env, const Policy& policy, Observation obs, uint64_t seed,
                     const StepObserver& observer) {
  EpisodeOutcome outcome;
  outcome.seed = seed;
  Rng rng(DeriveSeed(seed, 0x9011c7));
  while (!env.done()) {
    const std::vector<ActionTuple> actions = policy.Act(obs, rng);
    StepResult step = env.Step(actions);
    if (observer) observer(outcome.decisions, actions, step);
    outcome.total_return += step.reward;
    outcome.collision = outcome.collision || step.info.collision;
    outcome.success = outcome.success || step.info.goal_reached;
    ++outcome.decisions;
    obs = std::move(step.observation);
  }
  return outcome;
}

EvalReport RunMany(const EnvFactory& factory, int n_episodes, uint64_t seed, int threads,
                   const std::function<EpisodeOutcome(Env&, uint64_t)>& run) {
  if (n_episodes < 1) throw std::invalid_argument("Evaluate: n_episodes must be >= 1");
  if (threads <= 0) threads = ThreadCount();
  const int workers = std::min(threads, n_episodes);
  std::vector<std::unique_ptr<Env>> envs(workers);
  for (auto& e : envs) e = factory();
  EvalReport report;
  report.outcomes.resize(n_episodes);
  ParallelFor(
      n_episodes,
      [&](size_t i, int worker) { report.outcomes[i] = run(*envs[worker], DeriveSeed(seed, i)); },
      workers);
  return SummarizeOutcomes(std::move(report.outcomes));
}

}  // namespace

EpisodeOutcome RunEpisode(Env& env, const Policy& policy, uint64_t seed,
                          const StepObserver& observer) {
  return Drive(env, policy, env.Reset(seed), seed, observer);
}

EpisodeOutcome RunScenarioEpisode(Env& env, const Policy& policy, const Scenario& scene,
                                  uint64_t seed, const StepObserver& observer) {
  return Drive(env, policy, env.ResetScenario(scene.world, scene.start, scene.goal, seed), seed,
               observer);
}

EvalReport Evaluate(const Policy& policy, const EnvFactory& factory, int n_episodes,
                    uint64_t seed, int threads) {
  return RunMany(factory, n_episodes, seed, threads,
                 [&](Env& env, uint64_t s) { return RunEpisode(env, policy, s); });
}

EvalReport EvaluateScenario(const Policy& policy, const EnvFactory& factory, const Scenario& scene,
                            int n_episodes, uint64_t seed, int threads) {
  return RunMany(factory, n_episodes, seed, threads, [&](Env& env, uint64_t s) {
    return RunScenarioEpisode(env, policy, scene, s);
  });
}

int CEMConfig::elite_count() const {
  return std::max(1, static_cast<int>(std::lround(population * elite_fraction)));
}

void CEMConfig::Validate() const {
  if (population < 1) throw std::invalid_argument("CEM population must be >= 1");
  if (!(elite_fraction > 0 && elite_fraction < 1)) {
    throw std::invalid_argument("CEM elite fraction must be in (0, 1)");
  }
  if (iterations < 1) throw std::invalid_argument("CEM iterations must be >= 1");
  if (!(init_noise > 0) || !(min_noise >= 0) || !(first_layer_noise_ratio >= 0) ||
      !(extra_noise >= 0)) {
    throw std::invalid_argument("CEM noise must be positive");
  }
  if (episodes_per_candidate < 1) throw std::invalid_argument("CEM episodes per candidate must be >= 1");
  if (hidden < 1 || horizon < 1) throw std::invalid_argument("CEM policy dimensions must be positive");
}

CemResult TrainCem(const EnvFactory& factory, const CEMConfig& cfg, uint64_t seed,
                   const CemProgress& progress) {
  cfg.Validate();
  const size_t dim = PolicyParams::Count(kFeatureDim, cfg.hidden, cfg.horizon);
  const size_t w1_count = static_cast<size_t>(cfg.hidden) * kFeatureDim;
  std::vector<double> mean(dim, 0.0);
  std::vector<double> sigma(dim, cfg.init_noise);
  std::fill(sigma.begin(), sigma.begin() + w1_count, cfg.init_noise * cfg.first_layer_noise_ratio);
  {
    Rng init(DeriveSeed(seed, 1));
    for (size_t i = 0; i < w1_count; ++i) {
      const bool map_input = static_cast<int>(i % kFeatureDim) < kMapFeatures;
      mean[i] = (map_input ? cfg.map_init_scale : cfg.init_weight_scale) * init.Normal();
    }
  }

  const int threads = cfg.parallel_envs > 0 ? cfg.parallel_envs : ThreadCount();
  std::vector<std::unique_ptr<Env>> envs(threads);
  for (auto& e : envs) e = factory();

  const int episodes = cfg.episodes_per_candidate;
  auto eval_seeds = [&](int iteration) {
    std::vector<uint64_t> seeds(episodes);
    const uint64_t base = cfg.fixed_eval_seeds ? DeriveSeed(seed, 2) : DeriveSeed(seed, 1000 + iteration);
    for (int j = 0; j < episodes; ++j) seeds[j] = DeriveSeed(base, j);
    return seeds;
  };
  auto evaluate = [&](const std::vector<std::vector<double>>& candidates,
                      const std::vector<uint64_t>& seeds) {
    std::vector<PolicyParams> params(candidates.size());
    for (size_t c = 0; c < candidates.size(); ++c) {
      params[c] = PolicyParams::Zeros(cfg.hidden, cfg.horizon);
      params[c].values = candidates[c];
    }
    std::vector<double> returns(candidates.size() * episodes);
    ParallelFor(
        returns.size(),
        [&](size_t i, int worker) {
          const MlpPolicy policy(params[i / episodes]);
          returns[i] = RunEpisode(*envs[worker], policy, seeds[i % episodes]).total_return;
        },
        threads);
    std::vector<double> scores(candidates.size());
    for (size_t c = 0; c < candidates.size(); ++c) {
      scores[c] = std::accumulate(returns.begin() + c * episodes,
                                  returns.begin() + (c + 1) * episodes, 0.0) / episodes;
    }
    return scores;
  };

  struct Scored {
    std::vector<double> values;
    double score;
  };
  std::vector<Scored> elites;
  const int k = cfg.elite_count();
  CemResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    const std::vector<uint64_t> seeds = eval_seeds(it);
    Rng rng(DeriveSeed(seed, 100 + it));
    std::vector<std::vector<double>> candidates;
    candidates.push_back(mean);
    for (int c = 0; c < cfg.population; ++c) {
      std::vector<double> v(dim);
      for (size_t i = 0; i < dim; ++i) v[i] = mean[i] + sigma[i] * rng.Normal();
      candidates.push_back(std::move(v));
    }
    if (!cfg.fixed_eval_seeds) {
      for (const Scored& e : elites) candidates.push_back(e.values);
      elites.clear();
    }
    const std::vector<double> scores = evaluate(candidates, seeds);

    CemIterationStats stats;
    stats.iteration = it;
    stats.population_mean =
        std::accumulate(scores.begin() + 1, scores.begin() + 1 + cfg.population, 0.0) /
        cfg.population;

    std::vector<Scored> pool = std::move(elites);
    for (size_t c = 0; c < candidates.size(); ++c) pool.push_back({std::move(candidates[c]), scores[c]});
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Scored& a, const Scored& b) { return a.score > b.score; });
    pool.resize(std::min<size_t>(pool.size(), k));
    elites = std::move(pool);

    double noise_sum = 0.0;
    const double decay = 1.0 - static_cast<double>(it + 1) / cfg.iterations;
    const double extra = cfg.extra_noise * decay;
    for (size_t i = 0; i < dim; ++i) {
      double m = 0.0;
      for (const Scored& e : elites) m += e.values[i];
      m /= elites.size();
      double var = 0.0;
      for (const Scored& e : elites) var += (e.values[i] - m) * (e.values[i] - m);
      var /= elites.size();
      mean[i] = m;
      const double e = i < w1_count ? extra * cfg.first_layer_noise_ratio : extra;
      sigma[i] = std::max(std::sqrt(var + e * e), cfg.min_noise);
      noise_sum += sigma[i];
    }
    double elite_total = 0.0;
    for (const Scored& e : elites) elite_total += e.score;
    stats.elite_mean = elite_total / elites.size();
    stats.best_return = elites.front().score;
    stats.mean_noise = noise_sum / dim;
    result.curve.push_back(stats);
    if (progress) progress(stats);
  }
  result.params = PolicyParams::Zeros(cfg.hidden, cfg.horizon);
  result.params.values = elites.front().values;
  result.best_return = elites.front().score;
  return result;
}

void WriteCurveCsv(const std::filesystem::path& path, std::span<const CemIterationStats> curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "iteration,elite_mean,population_mean,best_return\n";
  char line[160];
  for (const CemIterationStats& s : curve) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", s.iteration, s.elite_mean,
                  s.population_mean, s.best_return);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ReplaySmokeResult ReplayFillAndSampleSmoke(Env& env, ReplayBuffer& buffer, const HERConfig& her,
                                           int episodes, size_t batch_size, uint64_t seed) {
  ReplaySmokeResult result;
  const RandomPolicy policy(env.config().horizon);
  for (int e = 0; e < episodes; ++e) {
    const uint64_t episode_seed = DeriveSeed(seed, e);
    Observation obs = env.Reset(episode_seed);
    Rng rng(DeriveSeed(episode_seed, 0x9011c7));
    int t = 0;
    while (!env.done()) {
      const std::vector<ActionTuple> actions = policy.Act(obs, rng);
      StepResult step = env.Step(actions);
      const bool budget = env.decision_index() >= env.config().episode.max_decisions;
      buffer.Push(MakeTransition(GoalFreeFeatures(obs), GoalFreeFeatures(step.observation),
                                 actions, step, env.config(), episode_seed, t, budget));
      obs = std::move(step.observation);
      ++t;
      ++result.transitions;
    }
    ++result.episodes;
  }
  Rng rng(DeriveSeed(seed, 0xba7c4));
  result.batch = buffer.Sample(batch_size, her, rng);
  return result;
}

}  // namespace s2s
