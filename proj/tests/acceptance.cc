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

// Acceptance run: one [PASS]/[FAIL] line per criterion. Arguments select a
// subset by key (traj reward her render metrics table1 online appendix-e).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "oracles.h"
#include "s2s/env.h"
#include "s2s/learner.h"
#include "s2s/metrics.h"
#include "s2s/parallel.h"
#include "s2s/render.h"
#include "s2s/replay.h"
#include "s2s/vehicle.h"
#include "s2s/world.h"

namespace s2s {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

int g_failed = 0;
int g_run = 0;

FILE* g_log = nullptr;  // optional copy of the verdict lines

void Verdict(bool pass, const std::string& name, const std::string& detail) {
  ++g_run;
  g_failed += !pass;
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (g_log) {
    std::fprintf(g_log, "[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(g_log);
  }
}

void Info(const std::string& text) {
  std::printf("       %s\n", text.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// ------------------------------------------------------------------ rollout

void CheckTraj() {
  const auto t0 = Clock::now();
  Rng rng(20240917);
  double worst = 0;
  int invariant_failures = 0;
  for (int c = 0; c < 1000; ++c) {
    const int l = 1 + static_cast<int>(rng.UniformInt(11));
    RolloutConfig cfg;
    cfg.heading_rate = rng.Uniform(0.01, 0.5);
    Trajectory past;
    Pose2 p{rng.Uniform(-5, 5), rng.Uniform(-5, 5), 0};
    for (int i = 0; i < kPastLength; ++i) {
      past.push_back(p);
      p.x += rng.Uniform(-2, 2);
      p.y += rng.Uniform(-2, 2);
    }
    std::vector<ActionTuple> actions;
    std::vector<double> steer, accel;
    for (int i = 0; i + 1 < l; ++i) {
      steer.push_back(rng.Uniform(-kMaxSteer, kMaxSteer));
      accel.push_back(rng.Uniform(0, 1));
      actions.push_back({steer.back(), accel.back()});
    }
    const Trajectory got = GetTraj(l, past, actions, cfg);
    const Pose2 a = past[kPastLength - 2], b = past[kPastLength - 1];
    const auto want = s2s_oracle::GetTraj(l, b.x - a.x, b.y - a.y, steer, accel, cfg.heading_rate);
    if (got.size() != want.size()) {
      worst = INFINITY;
      continue;
    }
    double max_steer = 0;
    for (int i = 0; i < l; ++i) {
      worst = std::max({worst, std::abs(got[i].x - want[i].x), std::abs(got[i].y - want[i].y),
                        std::abs(got[i].yaw - want[i].h)});
      if (i > 0) {
        max_steer = std::max(max_steer, std::abs(steer[i - 1]));
        invariant_failures += std::abs(got[i].yaw) > max_steer + 1e-15;
      }
      if (i > 1) {
        const double prev = std::hypot(got[i - 1].x - got[i - 2].x, got[i - 1].y - got[i - 2].y);
        const double cur = std::hypot(got[i].x - got[i - 1].x, got[i].y - got[i - 1].y);
        invariant_failures += cur < prev - 1e-12;
      }
    }
  }
  const double secs = Seconds(t0);
  Verdict(worst <= 1e-9 && invariant_failures == 0 && secs < 5.0, "traj",
          Fmt("1000 cases, max |diff| %.3g (tol 1e-9), invariant violations %d, %.3f s (< 5 s)",
              worst, invariant_failures, secs));
}

// ------------------------------------------------------------------- reward

void CheckReward() {
  const RewardWeights ones{1, 1, 1, 1};
  const std::vector<ActionTuple> zero = {{0, 0}};
  const std::vector<ActionTuple> steer = {{0.5, 0}};
  const double r1 = Reward({0, 0}, {0.5, 0}, zero, false, 0, 0, ones);
  const double r2 = Reward({10, 0}, {0, 0}, zero, false, 0, 18, ones);
  const double r3 = Reward({10, 0}, {0, 0}, steer, true, 0, 0, ones);
  const bool examples =
      std::abs(r1 - 100) <= 1e-12 && std::abs(r2 + 1.1) <= 1e-12 && std::abs(r3 + 2.5) <= 1e-12;

  EnvConfig cfg = EnvConfig::EmptyMeadow(3);
  cfg.episode.goal_range = 8;
  Env env(cfg);
  int mismatches = 0, goal_ends = 0, steps = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    env.Reset(seed);
    Rng rng(DeriveSeed(seed, 77));
    while (!env.done()) {
      std::vector<ActionTuple> a(cfg.horizon);
      for (auto& t : a) t = {rng.Uniform(-kMaxSteer, kMaxSteer), rng.Uniform(0, 1)};
      const StepResult r = env.Step(a);
      ++steps;
      const bool rg100 = r.info.terms.goal == kGoalReward;
      const bool goal_end = r.done && !r.info.truncated && !r.info.collision_terminated;
      mismatches += (goal_end != rg100) + (r.info.goal_reached != rg100);
      goal_ends += goal_end;
    }
  }
  Verdict(examples && mismatches == 0 && goal_ends > 0, "reward",
          Fmt("examples %.12g / %.12g / %.12g (want 100 / -1.1 / -2.5, tol 1e-12); 100 episodes, "
              "%d decisions, %d goal terminations, %d termination/r_g mismatches",
              r1, r2, r3, steps, goal_ends, mismatches));
}

// ---------------------------------------------------------------------- HER

bool NonGoalFieldsIdentical(const Transition& a, const Transition& b) {
  return a.obs == b.obs && a.next_obs == b.next_obs && a.action == b.action &&
         a.terms.upright == b.terms.upright && a.terms.steer == b.terms.steer &&
         a.terms.collision == b.terms.collision && a.weights == b.weights &&
         a.reference_pose == b.reference_pose && a.next_reference_pose == b.next_reference_pose &&
         a.achieved_world == b.achieved_world && a.achieved == b.achieved &&
         a.collision_terminated == b.collision_terminated && a.episode_id == b.episode_id &&
         a.step == b.step;
}

void CheckHer() {
  EnvConfig cfg = EnvConfig::EmptyMeadow(5);
  cfg.camera.resolution = 16;
  cfg.episode.goal_range = 10;
  Env env(cfg);
  ReplayBuffer buffer(100000);
  const ReplaySmokeResult fill = ReplayFillAndSampleSmoke(env, buffer, HERConfig{1.0}, 60, 1, 11);
  std::map<std::pair<uint64_t, int>, Transition> stored;
  for (const Transition& t : buffer.Contents()) stored[{t.episode_id, t.step}] = t;

  Rng rng(12);
  int checked = 0, wrong_goal = 0, wrong_reward = 0, wrong_other = 0, not_relabeled = 0;
  for (const SampledTransition& s : buffer.Sample(5000, HERConfig{1.0}, rng)) {
    const Transition& t = s.transition;
    not_relabeled += !s.relabeled;
    const Transition& original = stored.at({t.episode_id, t.step});
    const Transition& source = stored.at({t.episode_id, s.source_step});
    ++checked;
    wrong_goal += !(t.goal_world == source.achieved_world) || s.source_step < t.step;
    const double rg = GoalTerm(t.goal_world, original.achieved_world, original.goal_radius);
    const bool reached = GoalReached(t.goal_world, original.achieved_world, original.goal_radius);
    wrong_reward += t.terms.goal != rg || t.goal_reached != reached ||
                    t.reward != t.terms.Weighted(t.weights);
    wrong_other += !NonGoalFieldsIdentical(t, original);
  }
  Rng rng2(13);
  const auto batch = buffer.Sample(10000, HERConfig{0.8}, rng2);
  const double fraction =
      static_cast<double>(std::count_if(batch.begin(), batch.end(),
                                        [](const SampledTransition& s) { return s.relabeled; })) /
      batch.size();
  const bool pass = not_relabeled == 0 && wrong_goal == 0 && wrong_reward == 0 &&
                    wrong_other == 0 && fraction >= 0.78 && fraction <= 0.82;
  Verdict(pass, "her",
          Fmt("%d env transitions; ratio 1: %d samples, %d not relabeled, %d goal, %d r_g, "
              "%d non-goal mismatches; ratio 0.8: relabeled fraction %.4f over 10^4 (want "
              "[0.78, 0.82])",
              fill.transitions, checked, not_relabeled, wrong_goal, wrong_reward, wrong_other,
              fraction));
}

// ----------------------------------------------------------------- renderer

World FlatWorldWith(std::vector<Obstacle> obstacles) {
  WorldSpec spec;
  spec.extent = 200;
  const size_t nodes = static_cast<size_t>(GridSizeFor(spec)) * GridSizeFor(spec);
  return World(spec, std::vector<double>(nodes, 0.0), std::move(obstacles),
               std::vector<uint8_t>(nodes, 0));
}

void CheckRender() {
  const auto t0 = Clock::now();
  WorldSpec spec = WorldSpec::ForPreset(Preset::kLandscape, 4);
  spec.tree_density = 0.3;
  spec.rock_density = 0.2;
  const World w = GenerateWorld(spec);
  CameraModel cam;
  cam.resolution = 64;
  const auto rand = RandomizationConfig::AppearanceOnly();
  const Pose2 pose{50, 50, 0.3};
  const RenderOutput ref = Render(w, pose, cam, rand, 0);
  int geometry_changes = 0;
  double min_diff = INFINITY;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    const RenderOutput out = Render(w, pose, cam, rand, seed);
    geometry_changes += !(out.class_map == ref.class_map) || out.depth != ref.depth ||
                        out.obstacle_mask != ref.obstacle_mask;
    double diff = 0;
    for (size_t i = 0; i < out.rgb.data.size(); ++i) {
      diff += std::abs(out.rgb.data[i] - ref.rgb.data[i]);
    }
    min_diff = std::min(min_diff, diff / out.rgb.data.size() / 255.0);
  }

  // One rock ahead of a level and of the default pitched camera.
  const Obstacle rock{ClassId::kRocks, {110, 100}, 2.0, 3.0, -0.2};
  const World rw = FlatWorldWith({rock});
  double worst = 0;
  int rock_pixels = 0;
  for (double pitch : {0.0, CameraModel{}.mount_pitch}) {
    CameraModel c = cam;
    c.mount_pitch = pitch;
    const RenderOutput out = Render(rw, {100, 100, 0}, c, RandomizationConfig::Disabled(), 3);
    const int n = c.resolution;
    for (int row = 0; row < n; ++row) {
      for (int col = 0; col < n; ++col) {
        double dx, dy, dz;
        s2s_oracle::PixelRay(row, col, n, c.fov, pitch, 0, &dx, &dy, &dz);
        const double tc = s2s_oracle::RayCylinder(100, 100, c.mount_offset.z, dx, dy, dz, 110, 100,
                                                  2.0, -0.2, 2.8);
        const double tp = s2s_oracle::RayPlane(c.mount_offset.z, dz, 0.0);
        const double t = std::min({tc, tp, c.max_range});
        if (std::abs(t - c.max_range) < 0.5) continue;  // horizon band
        const size_t idx = static_cast<size_t>(row) * n + col;
        if (tc <= tp) {
          ++rock_pixels;
          worst = std::max(worst, std::abs(out.depth[idx] - tc));
        }
      }
    }
  }
  const double secs = Seconds(t0);
  Verdict(geometry_changes == 0 && min_diff > 5.0 / 255 && worst <= 0.05 && rock_pixels > 0 &&
              secs < 30.0,
          "render",
          Fmt("50 appearance seeds: %d geometry changes, min mean RGB diff %.4f (> %.4f); "
              "rock depth worst error %.4f m over %d pixels (tol 0.05); %.2f s at 64^2 (< 30 s)",
              geometry_changes, min_diff, 5.0 / 255, worst, rock_pixels, secs));
}

// ------------------------------------------------------------------ metrics

Trajectory Line(double heading, double length, int points, Vec2 offset = {0, 0}) {
  Trajectory t;
  for (int i = 0; i < points; ++i) {
    const double s = length * i / (points - 1);
    t.push_back({offset.x + s * std::cos(heading), offset.y + s * std::sin(heading), heading});
  }
  return t;
}

void CheckMetrics() {
  Rng rng(8);
  int nonzero = 0;
  for (int c = 0; c < 100; ++c) {
    Trajectory t = {{0, 0, 0}};
    for (int i = 0; i < 6; ++i) {
      t.push_back({t.back().x + rng.Uniform(0.1, 2), t.back().y + rng.Uniform(-1, 1), 0});
    }
    nonzero += GtMetric(t, t) != 0.0 || AteMetric(t, t) != 0.0;
  }
  const double deg10 = GtMetric(Line(0, 10, 5), Line(10 * kPi / 180, 10, 5));
  const double ate = AteMetric(Line(0.3, 7, 8), Line(0.3, 7, 8, {0, 1}));
  const double l2a = L2Metric({10, 0}, Line(0, 10, 3));
  const double l2b = L2Metric({10, 0}, Trajectory{{0, 0, 0}});
  const double l2c = L2Metric({10, 0}, Trajectory{{0, 0, 0}, {10, 5, 0}});
  // 0.1745 is 10 degrees in radians to four places; the tolerance applies to
  // the exact value.
  const bool pass = nonzero == 0 && std::abs(deg10 - 10 * kPi / 180) <= 1e-6 &&
                    std::abs(ate - 1.0) <= 1e-12 && l2a == 0.0 && l2b == 1.0 && l2c == 0.5;
  Verdict(pass, "metrics",
          Fmt("identity nonzero in %d/100; GT(10 deg) %.7f (want 0.1745329, tol 1e-6); "
              "ATE(1 m shift) %.15f; L2 %.3g / %.3g / %.3g (want 0 / 1 / 0.5)",
              nonzero, deg10, ate, l2a, l2b, l2c));
}

// ------------------------------------------------- trained-policy criteria

constexpr int kSeeds = 5;
constexpr uint64_t kEvalSeed = 424242;
constexpr double kOfflineHorizon = 3.0;  // s

EnvConfig MeadowConfig(int horizon = 5) {
  EnvConfig cfg = EnvConfig::EmptyMeadow(1);
  cfg.episode.goal_range = 15;
  cfg.horizon = horizon;
  // Same time budget per episode whatever the horizon.
  cfg.episode.max_decisions = 150 / horizon;
  return cfg;
}

EnvFactory Factory(const EnvConfig& cfg) {
  auto cache = std::make_shared<WorldCache>();
  return [cfg, cache] { return std::make_unique<Env>(cfg, cache); };
}

struct Trained {
  PolicyParams params;
  double seconds = 0;
};

// Meadow policies, trained once and shared by the offline and online checks.
const std::vector<Trained>& MeadowPolicies() {
  static std::vector<Trained> policies = [] {
    std::vector<Trained> out;
    const EnvConfig env = MeadowConfig();
    CEMConfig cem;  // population 32, 30 iterations
    cem.horizon = env.horizon;
    for (int s = 1; s <= kSeeds; ++s) {
      const auto t0 = Clock::now();
      const CemResult r = TrainCem(Factory(env), cem, s);
      out.push_back({r.params, Seconds(t0)});
      Info(Fmt("meadow CEM seed %d: best return %.2f, %.1f s", s, r.best_return, out.back().seconds));
    }
    return out;
  }();
  return policies;
}

// Expert-driven records on the training distribution.
std::vector<OfflineRecord> ExpertDataset(const EnvConfig& cfg, double horizon_s, size_t n,
                                         uint64_t seed) {
  Env env(cfg);
  std::vector<EpisodeLog> logs;
  for (int batch = 0;; ++batch) {
    const auto more = CollectExpertLogs(env, 10, DeriveSeed(seed, batch));
    logs.insert(logs.end(), more.begin(), more.end());
    OfflineBuildResult built = BuildOfflineDataset(logs, horizon_s);
    if (built.records.size() >= n) {
      built.records.resize(n);
      return built.records;
    }
  }
}

void CheckTable1() {
  const EnvConfig env = MeadowConfig();
  const auto& policies = MeadowPolicies();
  const auto t0 = Clock::now();
  const double horizon = kOfflineHorizon;
  const std::vector<OfflineRecord> data = ExpertDataset(env, horizon, 200, 99);
  const RandomPolicy random(env.horizon);
  std::vector<MetricReport> cem_reports, random_reports;
  int ate_wins = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const MlpPolicy policy(policies[s].params);
    cem_reports.push_back(EvaluateOffline(PolicyTrajectoryModel(policy, env.rollout), data,
                                          DeriveSeed(kEvalSeed, s)));
    random_reports.push_back(EvaluateOffline(PolicyTrajectoryModel(random, env.rollout), data,
                                             DeriveSeed(kEvalSeed, s)));
    ate_wins += cem_reports.back().ate.mean < random_reports.back().ate.mean;
  }
  const std::vector<ReportRow> rows = {{"Random", "meadow-200", AggregateSeeds(random_reports)},
                                       {"CEM", "meadow-200", AggregateSeeds(cem_reports)}};
  std::printf("%s", FormatReportTable(rows).c_str());
  const SeedSummary& r = rows[0].summary;
  const SeedSummary& c = rows[1].summary;

  // Informational: the same policies against a reference as long as one
  // decision, where goals fall inside the goal radius.
  const double short_horizon = env.horizon * env.episode.action_period();
  const std::vector<OfflineRecord> short_data = ExpertDataset(env, short_horizon, 200, 99);
  std::vector<MetricReport> cem_short, random_short;
  for (int s = 0; s < kSeeds; ++s) {
    const MlpPolicy policy(policies[s].params);
    cem_short.push_back(EvaluateOffline(PolicyTrajectoryModel(policy, env.rollout), short_data,
                                       DeriveSeed(kEvalSeed, s)));
    random_short.push_back(EvaluateOffline(PolicyTrajectoryModel(random, env.rollout), short_data,
                                          DeriveSeed(kEvalSeed, s)));
  }
  const std::vector<ReportRow> short_rows = {
      {"Random", "meadow-200-short", AggregateSeeds(random_short)},
      {"CEM", "meadow-200-short", AggregateSeeds(cem_short)}};
  Info(Fmt("informational, %.1f s reference horizon:", short_horizon));
  std::printf("%s", FormatReportTable(short_rows).c_str());

  double train_secs = 0;
  for (const Trained& t : policies) train_secs += t.seconds;
  const double secs = Seconds(t0) + train_secs;
  Verdict(c.l2.mean < r.l2.mean && c.gt.mean < r.gt.mean && ate_wins >= 4 && secs < 900, "table1",
          Fmt("200 records, horizon %.1f s, 5 seeds: L2 %.3f vs random %.3f, GT %.3f vs %.3f, "
              "ATE lower in %d/5 seeds; %.0f s including training (< 900 s)",
              horizon, c.l2.mean, r.l2.mean, c.gt.mean, r.gt.mean, ate_wins, secs));
}

void CheckOnline() {
  const EnvConfig env = MeadowConfig();
  const auto& policies = MeadowPolicies();
  const auto t0 = Clock::now();
  const EvalReport random = Evaluate(RandomPolicy(env.horizon), Factory(env), 100, kEvalSeed);
  std::vector<double> success;
  for (const Trained& t : policies) {
    success.push_back(
        Evaluate(MlpPolicy(t.params), Factory(env), 100, kEvalSeed).success_rate);
  }
  Info(Fmt("meadow success by seed: %.2f %.2f %.2f %.2f %.2f; random %.2f", success[0],
           success[1], success[2], success[3], success[4], random.success_rate));
  const double meadow_secs = policies[0].seconds + Seconds(t0);

  // Rock avoidance: train on the constructed scene with collisions weighted
  // up. Episodes differ only in the appearance seed.
  const auto t1 = Clock::now();
  const Scenario scene = RockAvoidanceScene();
  EnvConfig rock_env = MeadowConfig();
  rock_env.scenes = [scene](uint64_t) { return scene; };
  rock_env.weights.collision = 5;
  CEMConfig cem;
  cem.horizon = rock_env.horizon;
  int clean_seeds = 0;
  std::string per_seed;
  for (int s = 1; s <= kSeeds; ++s) {
    const CemResult r = TrainCem(Factory(rock_env), cem, DeriveSeed(s, 0x70c6));
    const EvalReport e = EvaluateScenario(MlpPolicy(r.params), Factory(MeadowConfig()), scene, 10,
                                          kEvalSeed);
    int clean = 0;
    for (const EpisodeOutcome& o : e.outcomes) clean += o.success && !o.collision;
    clean_seeds += clean == 10;
    per_seed += Fmt(" %d/10", clean);
  }
  const double rock_secs = Seconds(t1);
  Verdict(success[0] >= 0.6 && random.success_rate <= 0.1 && clean_seeds >= 1 &&
              meadow_secs + rock_secs < 900,
          "online",
          Fmt("meadow CEM seed 1 success %.2f (>= 0.6) vs random %.2f (<= 0.1), 100 matched "
              "episodes; rock scene clean runs per seed:%s -> %d/5 seeds pass (>= 1); %.0f s "
              "(< 900 s)",
              success[0], random.success_rate, per_seed.c_str(), clean_seeds,
              meadow_secs + rock_secs));
}

void CheckAppendixE() {
  const auto t0 = Clock::now();
  std::vector<ReportRow> rows;
  std::string online;
  bool finite = true;
  // One dataset for every row.
  const std::vector<OfflineRecord> data = ExpertDataset(MeadowConfig(), kOfflineHorizon, 200, 99);
  for (int a : {1, 5, 10}) {
    const EnvConfig env = MeadowConfig(a);
    CEMConfig cem;
    cem.population = 16;
    cem.iterations = 10;
    cem.episodes_per_candidate = 4;
    cem.horizon = a;
    std::vector<MetricReport> reports;
    double success = 0;
    for (int s = 1; s <= 3; ++s) {
      const CemResult r = TrainCem(Factory(env), cem, s);
      const MlpPolicy policy(r.params);
      reports.push_back(EvaluateOffline(PolicyTrajectoryModel(policy, env.rollout), data,
                                        DeriveSeed(kEvalSeed, s)));
      success += Evaluate(policy, Factory(env), 50, kEvalSeed).success_rate / 3;
    }
    rows.push_back({Fmt("Action = %d Step%s", a, a == 1 ? "" : "s"), "meadow-200",
                    AggregateSeeds(reports)});
    const SeedSummary& m = rows.back().summary;
    finite = finite && std::isfinite(m.gt.mean) && std::isfinite(m.ate.mean) &&
             std::isfinite(m.gt_goal.mean) && std::isfinite(m.l2.mean);
    online += Fmt(" A=%d %.2f", a, success);
  }
  std::printf("%s", FormatReportTable(rows).c_str());
  Verdict(rows.size() == 3 && finite, "appendix-e",
          Fmt("A in {1, 5, 10} trained and evaluated through the same calls (3 seeds each, "
              "population 16, 10 iterations); online success:%s; %.0f s",
              online.c_str(), Seconds(t0)));
}

}  // namespace
}  // namespace s2s

int main(int argc, char** argv) {
  using namespace s2s;
  const std::vector<std::pair<std::string, void (*)()>> checks = {
      {"traj", CheckTraj},     {"reward", CheckReward}, {"her", CheckHer},
      {"render", CheckRender}, {"metrics", CheckMetrics}, {"table1", CheckTable1},
      {"online", CheckOnline}, {"appendix-e", CheckAppendixE}};
  // --report-only: exit 0 once every check has run, whatever the verdicts.
  // --log FILE: also write the verdict lines to FILE.
  bool report_only = false;
  std::set<std::string> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report-only") {
      report_only = true;
    } else if (arg == "--log" && i + 1 < argc) {
      g_log = std::fopen(argv[++i], "w");
      if (!g_log) {
        std::fprintf(stderr, "acceptance: cannot open %s\n", argv[i]);
        return 2;
      }
    } else {
      wanted.insert(arg);
    }
  }
  std::printf("acceptance: %d worker thread(s)\n", ThreadCount());
  for (const auto& [key, fn] : checks) {
    if (!wanted.empty() && !wanted.count(key)) continue;
    try {
      fn();
    } catch (const std::exception& e) {
      Verdict(false, key, std::string("exception: ") + e.what());
    }
  }
  std::printf("acceptance: %d/%d passed\n", g_run - g_failed, g_run);
  if (g_log) {
    std::fprintf(g_log, "acceptance: %d/%d passed\n", g_run - g_failed, g_run);
    std::fclose(g_log);
  }
  return g_failed == 0 || report_only ? 0 : 1;
}
