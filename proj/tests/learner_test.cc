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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "gtest/gtest.h"

namespace s2s {
namespace {

Observation Blank(int n = 64, ClassId fill = ClassId::kGround) {
  Observation obs;
  obs.class_map = ClassMap(n, n, fill);
  for (int i = 0; i < kPastLength; ++i) obs.past.push_back({(i - 9) * 0.2, 0, 0});
  obs.goal = {5, -3};
  return obs;
}

TEST(FeaturizeTest, AllGroundCells) {
  const FeatureVector f = Featurize(Blank());
  ASSERT_EQ(f.size(), static_cast<size_t>(kFeatureDim));
  EXPECT_EQ(kFeatureDim, 1570);
  for (int cell = 0; cell < kPoolGrid * kPoolGrid; ++cell) {
    for (int c = 0; c < kNumClasses; ++c) {
      ASSERT_EQ(f[cell * kNumClasses + c], c == static_cast<int>(ClassId::kGround) ? 1.0f : 0.0f);
    }
  }
  EXPECT_EQ(f[kFeatureDim - 2], 5.0f);
  EXPECT_EQ(f[kFeatureDim - 1], -3.0f);
}

TEST(FeaturizeTest, CheckerboardCountsHalf) {
  Observation obs = Blank();
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      obs.class_map.set(r, c, (r + c) % 2 ? ClassId::kRocks : ClassId::kGround);
    }
  }
  const FeatureVector f = Featurize(obs);
  for (int cell = 0; cell < kPoolGrid * kPoolGrid; ++cell) {
    const float* p = &f[cell * kNumClasses];
    ASSERT_EQ(p[1], 0.5f);
    ASSERT_EQ(p[3], 0.5f);
    ASSERT_EQ(p[0] + p[2] + p[4] + p[5], 0.0f);
  }
}

TEST(FeaturizeTest, FractionsSumToOneAndIgnoreRgb) {
  Observation obs = Blank(32);
  Rng rng(3);
  for (auto& l : obs.class_map.labels) l = static_cast<uint8_t>(rng.UniformInt(kNumClasses));
  const FeatureVector f = Featurize(obs);
  for (int cell = 0; cell < kPoolGrid * kPoolGrid; ++cell) {
    float sum = 0;
    for (int c = 0; c < kNumClasses; ++c) sum += f[cell * kNumClasses + c];
    ASSERT_NEAR(sum, 1.0f, 1e-6);
  }
  Observation with_rgb = obs;
  with_rgb.rgb = Image(32, 32, 3);
  EXPECT_EQ(Featurize(with_rgb), f);
  const FeatureVector free = GoalFreeFeatures(obs);
  EXPECT_EQ(free.size(), static_cast<size_t>(kGoalFreeFeatureDim));
  EXPECT_EQ(WithGoal(free, obs.goal), f);
}

TEST(FeaturizeTest, RejectsBadShapes) {
  EXPECT_THROW(Featurize(Blank(40)), std::invalid_argument);
  Observation obs = Blank();
  obs.past.pop_back();
  EXPECT_THROW(Featurize(obs), std::invalid_argument);
}

PolicyParams RandomParams(Rng& rng, int horizon, double scale) {
  PolicyParams p = PolicyParams::Zeros(8, horizon);
  for (double& v : p.values) v = scale * rng.Normal();
  return p;
}

TEST(ActTest, ZeroParamsGiveSquashOfZero) {
  const auto actions = Act(PolicyParams::Zeros(8, 5), Featurize(Blank()));
  ASSERT_EQ(actions.size(), 5u);
  for (const auto& a : actions) {
    EXPECT_EQ(a.steer, 0.0);
    EXPECT_EQ(a.accel, 0.5);
  }
}

TEST(ActTest, BoundsDeterminismAndDimensions) {
  Rng rng(9);
  PolicyParams p;
  for (int i = 0; i < 10000; ++i) {
    // A fresh parameter draw every 100 feature vectors keeps this fast.
    if (i % 100 == 0) {
      const int horizon = (i / 100) % 3 == 0 ? 1 : ((i / 100) % 3 == 1 ? 5 : 10);
      p = RandomParams(rng, horizon, rng.Uniform(0, 50));
    }
    const int horizon = p.horizon;
    FeatureVector f(kFeatureDim);
    for (float& v : f) v = static_cast<float>(rng.Uniform(-100, 100));
    const auto a = Act(p, f);
    ASSERT_EQ(a.size(), static_cast<size_t>(horizon));
    for (const auto& t : a) {
      ASSERT_GE(t.steer, -kPi / 4);
      ASSERT_LE(t.steer, kPi / 4);
      ASSERT_GE(t.accel, 0.0);
      ASSERT_LE(t.accel, 1.0);
    }
    if (i < 50) ASSERT_EQ(Act(p, f), a);
  }
  const FeatureVector short_f(kFeatureDim - 1);
  EXPECT_THROW(Act(PolicyParams::Zeros(8, 5), short_f), std::invalid_argument);
}

TEST(PolicyParamsTest, LayoutSaveLoadValidate) {
  EXPECT_EQ(PolicyParams::Count(10, 4, 5), 4u * 10 + 4 + 10 * 4 + 10);
  Rng rng(1);
  const PolicyParams p = RandomParams(rng, 10, 1.0);
  EXPECT_EQ(p.size(), PolicyParams::Count(kFeatureDim, 8, 10));
  const auto path = std::filesystem::temp_directory_path() / "s2s_params_test.bin";
  p.Save(path);
  const PolicyParams q = PolicyParams::Load(path);
  EXPECT_EQ(q.values, p.values);
  EXPECT_EQ(q.horizon, 10);
  EXPECT_EQ(q.hidden, 8);
  std::filesystem::remove(path);
  PolicyParams bad = p;
  bad.values[3] = std::nan("");
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad = p;
  bad.values.pop_back();
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

EnvFactory SmallFactory(double goal_range = 15.0, int max_decisions = 30) {
  return [=] {
    EnvConfig cfg = EnvConfig::EmptyMeadow(1);
    cfg.camera.resolution = 16;
    cfg.episode.goal_range = goal_range;
    cfg.episode.max_decisions = max_decisions;
    return std::make_unique<Env>(cfg);
  };
}

TEST(EvaluateTest, ScriptedSeekerSolvesEmptyWorld) {
  const EvalReport r = Evaluate(GoalSeekingPolicy(5), SmallFactory(), 40, 7);
  EXPECT_EQ(r.episodes, 40);
  EXPECT_EQ(r.success_rate, 1.0);
  EXPECT_EQ(r.collision_rate, 0.0);
  EXPECT_GT(r.mean_decisions_to_goal, 0.0);
}

TEST(EvaluateTest, ReproducibleAndValidated) {
  const RandomPolicy random(5);
  const EvalReport a = Evaluate(random, SmallFactory(), 12, 3);
  const EvalReport b = Evaluate(random, SmallFactory(), 12, 3, 1);
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  for (size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(a.outcomes[i].total_return, b.outcomes[i].total_return);
    EXPECT_EQ(a.outcomes[i].seed, DeriveSeed(3, i));
  }
  EXPECT_EQ(a.mean_return, b.mean_return);
  EXPECT_THROW(Evaluate(random, SmallFactory(), 0, 3), std::invalid_argument);
}

TEST(EvaluateTest, RandomPolicyCollidesInDenseWorld) {
  const EnvFactory dense = [] {
    EnvConfig cfg = EnvConfig::EmptyMeadow(1);
    cfg.camera.resolution = 16;
    cfg.worlds[0].rock_density = 1.0;
    cfg.worlds[0].tree_density = 0.5;
    return std::make_unique<Env>(cfg);
  };
  const EvalReport r = Evaluate(RandomPolicy(5), dense, 100, 1);
  EXPECT_GT(r.collision_rate, 0.0);
  for (const auto& o : r.outcomes) EXPECT_LE(o.decisions, 30);
}

TEST(ExpertTest, AvoidsRockAndStaysInBounds) {
  EnvConfig cfg = EnvConfig::EmptyMeadow(1);
  cfg.camera.resolution = 16;
  Env env(cfg);
  const Scenario scene = RockAvoidanceScene();
  Observation obs = env.ResetScenario(scene.world, scene.start, scene.goal);
  bool collided = false, reached = false;
  while (!env.done()) {
    const auto a = ExpertActions(env.world(), env.state(), obs.past, env.goal_world(), 5, cfg);
    for (const auto& t : a) {
      ASSERT_LE(std::abs(t.steer), kPi / 4);
      ASSERT_GE(t.accel, 0);
      ASSERT_LE(t.accel, 1);
    }
    const StepResult r = env.Step(a);
    collided |= r.info.collision;
    reached |= r.info.goal_reached;
    obs = r.observation;
  }
  EXPECT_FALSE(collided);
  EXPECT_TRUE(reached);
}

CEMConfig TinyCem(int horizon = 5) {
  CEMConfig cfg;
  cfg.population = 4;
  cfg.iterations = 3;
  cfg.episodes_per_candidate = 2;
  cfg.horizon = horizon;
  return cfg;
}

TEST(CemTest, ReproducibleCurveAndValidParams) {
  const CemResult a = TrainCem(SmallFactory(15, 8), TinyCem(), 5);
  const CemResult b = TrainCem(SmallFactory(15, 8), TinyCem(), 5);
  ASSERT_EQ(a.curve.size(), 3u);
  for (size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].elite_mean, b.curve[i].elite_mean);
    EXPECT_EQ(a.curve[i].population_mean, b.curve[i].population_mean);
  }
  EXPECT_EQ(a.params.values, b.params.values);
  EXPECT_NO_THROW(a.params.Validate());
}

TEST(CemTest, EliteMeanNonDecreasingWithFixedSeeds) {
  CEMConfig cfg = TinyCem();
  cfg.iterations = 5;
  cfg.fixed_eval_seeds = true;
  const CemResult r = TrainCem(SmallFactory(15, 8), cfg, 2);
  for (size_t i = 1; i < r.curve.size(); ++i) {
    EXPECT_GE(r.curve[i].elite_mean, r.curve[i - 1].elite_mean);
  }
}

TEST(CemTest, PopulationOneAndAllHorizons) {
  CEMConfig one = TinyCem();
  one.population = 1;
  EXPECT_NO_THROW(TrainCem(SmallFactory(15, 4), one, 1).params.Validate());
  for (int horizon : {1, 5, 10}) {
    const CemResult r = TrainCem(SmallFactory(15, 4), TinyCem(horizon), 1);
    EXPECT_EQ(r.params.horizon, horizon);
    EXPECT_EQ(r.params.size(), PolicyParams::Count(kFeatureDim, 8, horizon));
  }
}

TEST(CemTest, ConfigValidation) {
  CEMConfig cfg;
  cfg.elite_fraction = 1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = CEMConfig{};
  cfg.population = 0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_EQ(CEMConfig{}.elite_count(), 8);
}

TEST(CemTest, CurveCsvHasOneRowPerIteration) {
  std::vector<CemIterationStats> curve(4);
  for (int i = 0; i < 4; ++i) curve[i].iteration = i;
  const auto path = std::filesystem::temp_directory_path() / "s2s_curve_test.csv";
  WriteCurveCsv(path, curve);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iteration,elite_mean,population_mean,best_return");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4);
  std::filesystem::remove(path);
}

TEST(ReplaySmokeTest, RelabeledRewardsMatchLiveEnv) {
  EnvConfig cfg = EnvConfig::EmptyMeadow(1);
  cfg.camera.resolution = 16;
  Env env(cfg);
  ReplayBuffer buffer(10000);
  const auto r = ReplayFillAndSampleSmoke(env, buffer, HERConfig{1.0}, 5, 500, 3);
  EXPECT_EQ(r.episodes, 5);
  EXPECT_EQ(static_cast<size_t>(r.transitions), buffer.size());
  int hits = 0;
  for (const auto& s : r.batch) {
    const double g = s.transition.terms.goal;
    ASSERT_TRUE(g == -1.0 || g == 100.0);
    ASSERT_EQ(g, GoalTerm(s.transition.goal_world, s.transition.achieved_world, cfg.episode.goal_radius));
    hits += g == 100.0;
  }
  EXPECT_GT(hits, 0);

  ReplayBuffer plain(10000);
  const auto z = ReplayFillAndSampleSmoke(env, plain, HERConfig{0.0}, 3, 200, 4);
  const auto stored = plain.Contents();
  for (const auto& s : z.batch) {
    EXPECT_FALSE(s.relabeled);
    const auto it = std::find(stored.begin(), stored.end(), s.transition);
    EXPECT_NE(it, stored.end());
  }
}

}  // namespace
}  // namespace s2s
