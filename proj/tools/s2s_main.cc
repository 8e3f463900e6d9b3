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

// s2s: world generation, paired-data collection, training and evaluation.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "s2s/config.h"
#include "s2s/env.h"
#include "s2s/image.h"
#include "s2s/learner.h"
#include "s2s/metrics.h"
#include "s2s/parallel.h"
#include "s2s/render.h"
#include "s2s/world.h"

namespace s2s {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kPairsPerPreset = 2000;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by every command. Flags are staged as config keys and
// applied after the config file; --set overrides win over everything.
struct CommandLine {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  std::string command;
};

void AddCommon(CLI::App* cmd, CommandLine& cl) {
  cmd->add_option("--config", cl.config_file, "key = value configuration file");
  cmd->add_option("--set", cl.sets, "override one config key (KEY=VALUE), repeatable");
  cmd->add_option_function<std::string>(
      "--seed", [&cl](const std::string& v) { cl.flags["seed"] = v; }, "master seed");
  cmd->add_option_function<std::string>(
      "--out", [&cl](const std::string& v) { cl.flags["output"] = v; }, "output directory");
}

// A flag that writes one config key.
void AddKey(CLI::App* cmd, CommandLine& cl, const std::string& flag, const std::string& key,
            const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&cl, key](const std::string& v) { cl.flags[key] = v; }, help);
}

void AddPresetFlag(CLI::App* cmd, CommandLine& cl) {
  cmd->add_option_function<std::vector<std::string>>(
         "--preset",
         [&cl](const std::vector<std::string>& v) {
           std::string joined;
           for (const std::string& p : v) joined += (joined.empty() ? "" : ",") + p;
           cl.flags["presets"] = joined;
         },
         "world preset(s)")
      ->check(CLI::IsMember({"meadow", "landscape", "canyon"}));
}

void AddHorizonFlag(CLI::App* cmd, CommandLine& cl) {
  cmd->add_option_function<std::string>(
         "--A", [&cl](const std::string& v) { cl.flags["A"] = v; }, "action tuples per decision")
      ->check(CLI::IsMember({"1", "5", "10"}));
}

void AddEmptyFlag(CLI::App* cmd, CommandLine& cl) {
  cmd->add_flag_callback(
      "--empty",
      [&cl] {
        cl.flags["presets"] = "meadow";
        cl.flags["tree_density"] = "0";
        cl.flags["rock_density"] = "0";
        cl.flags["log_density"] = "0";
        cl.flags["relief_scale"] = "0";
        cl.flags["road"] = "false";
      },
      "flat meadows without obstacles or road");
}

RunConfig Resolve(const CommandLine& cl) {
  try {
    RunConfig cfg = RunConfig::Defaults();
    if (!cl.config_file.empty()) cfg.LoadFile(cl.config_file);
    for (const auto& [k, v] : cl.flags) cfg.Set(k, v);
    for (const std::string& kv : cl.sets) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects KEY=VALUE, got " + kv);
      cfg.Set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    // Surface malformed values now, as usage errors.
    BuildEnvConfig(cfg);
    BuildCemConfig(cfg);
    BuildHerConfig(cfg);
    if (cfg.GetString("n_pairs") != "auto" && cfg.GetInt("n_pairs") < 1) {
      throw std::invalid_argument("n_pairs must be >= 1");
    }
    if (!(cfg.GetDouble("offline_horizon") > 0)) {
      throw std::invalid_argument("offline_horizon must be positive");
    }
    if (cfg.GetInt("episodes") < 1) throw std::invalid_argument("episodes must be >= 1");
    return cfg;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

fs::path PrepareOutput(const RunConfig& cfg, const CommandLine& cl) {
  const fs::path out = cfg.GetString("output");
  fs::create_directories(out);
  std::ofstream f(out / "config.txt");
  f << "# s2s " << cl.command << "\n" << cfg.ToText();
  if (!f) throw std::runtime_error("cannot write " + (out / "config.txt").string());
  return out;
}

std::vector<Preset> Presets(const RunConfig& cfg) {
  std::vector<Preset> out;
  for (const WorldSpec& w : BuildEnvConfig(cfg).worlds) out.push_back(w.preset);
  return out;
}

EnvFactory MakeFactory(const EnvConfig& env) {
  auto cache = std::make_shared<WorldCache>();
  return [env, cache] { return std::make_unique<Env>(env, cache); };
}

std::unique_ptr<Policy> LoadPolicy(const fs::path& path, int expected_horizon) {
  PolicyParams params = PolicyParams::Load(path);
  if (params.horizon != expected_horizon) {
    throw std::runtime_error(path.string() + ": policy horizon " + std::to_string(params.horizon) +
                             " does not match A = " + std::to_string(expected_horizon));
  }
  return std::make_unique<MlpPolicy>(std::move(params));
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

json PoseJson(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}}; }

json ReportJson(const EvalReport& r) {
  return {{"episodes", r.episodes},
          {"success_rate", r.success_rate},
          {"collision_rate", r.collision_rate},
          {"mean_return", r.mean_return},
          {"mean_decisions_to_goal", r.mean_decisions_to_goal}};
}

// ---------------------------------------------------------------- gen-world

int GenWorld(const CommandLine& cl) {
  const RunConfig cfg = Resolve(cl);
  const fs::path out = PrepareOutput(cfg, cl);
  const World world = GenerateWorld(BuildWorldSpec(cfg, Presets(cfg).front(), cfg.GetU64("seed")));
  SaveWorld(world, out / "world.s2sw");
  WritePng(out / "world.png", TopDownImage(world));
  std::printf("%s: %zu obstacles, grid %d\n", (out / "world.s2sw").c_str(),
              world.obstacles().size(), world.grid_size());
  return 0;
}

// ------------------------------------------------------------ collect-pairs

struct PairJob {
  int preset_index = 0;
  const World* world = nullptr;  // owned by the world cache
  Pose2 pose;
  uint64_t render_seed = 0;
};

int CollectPairs(const CommandLine& cl) {
  const RunConfig cfg = Resolve(cl);
  const fs::path out = PrepareOutput(cfg, cl);
  const EnvConfig env_cfg = BuildEnvConfig(cfg);
  const uint64_t seed = cfg.GetU64("seed");
  const int n_presets = static_cast<int>(env_cfg.worlds.size());
  const int n = cfg.GetString("n_pairs") == "auto" ? kPairsPerPreset * n_presets
                                                   : cfg.GetInt("n_pairs");

  // Poses come from a random policy driving a cheap low-resolution env, one
  // per preset; pair i is drawn from preset i mod P.
  std::vector<std::unique_ptr<Env>> drivers;
  std::vector<Rng> policy_rngs;
  std::vector<int> episode_count(n_presets, 0);
  auto cache = std::make_shared<WorldCache>();
  for (int p = 0; p < n_presets; ++p) {
    EnvConfig drive = env_cfg;
    drive.worlds = {env_cfg.worlds[p]};
    drive.camera.resolution = 16;
    drive.randomization = RandomizationConfig::Disabled();
    drive.include_rgb = false;
    drivers.push_back(std::make_unique<Env>(drive, cache));
    policy_rngs.emplace_back(DeriveSeed(seed, 0xD81E + p));
  }
  const RandomPolicy random(env_cfg.horizon);
  std::vector<Observation> obs(n_presets);
  std::vector<PairJob> jobs(n);
  for (int i = 0; i < n; ++i) {
    const int p = i % n_presets;
    Env& env = *drivers[p];
    if (env.done()) {
      obs[p] = env.Reset(DeriveSeed(DeriveSeed(seed, 0xE915 + p), episode_count[p]++));
    } else {
      StepResult step = env.Step(random.Act(obs[p], policy_rngs[p]));
      obs[p] = std::move(step.observation);
      if (env.done()) {
        obs[p] = env.Reset(DeriveSeed(DeriveSeed(seed, 0xE915 + p), episode_count[p]++));
      }
    }
    jobs[i] = {p, &env.world(), env.state().pose(),
               DeriveSeed(seed, 1000000 + static_cast<uint64_t>(i))};
  }
  const int width = std::max(4, static_cast<int>(std::to_string(n - 1).size()));
  std::vector<std::string> meta(n);
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) {
    std::string id = std::to_string(i);
    ids[i] = std::string(width - std::min<int>(width, id.size()), '0') + id;
  }
  ParallelFor(n, [&](size_t i, int) {
    const PairJob& job = jobs[i];
    const RenderOutput r = Render(*job.world, job.pose, env_cfg.camera, env_cfg.randomization,
                                  job.render_seed);
    WritePairFiles(out, ids[i], r);
    json m = {{"id", ids[i]},
              {"preset", std::string(PresetName(env_cfg.worlds[job.preset_index].preset))},
              {"world_seed", job.world->spec().seed},
              {"pose", PoseJson(job.pose)},
              {"randomization_seed", job.render_seed}};
    meta[i] = m.dump();
  });
  std::ofstream f(out / "meta.jsonl");
  for (const std::string& line : meta) f << line << '\n';
  if (!f) throw std::runtime_error("cannot write " + (out / "meta.jsonl").string());
  std::printf("wrote %d pairs to %s\n", n, out.c_str());
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainOptions {
  int eval_episodes = 0;
};

int Train(const CommandLine& cl, const TrainOptions& opt) {
  const RunConfig cfg = Resolve(cl);
  const fs::path out = PrepareOutput(cfg, cl);
  const EnvConfig env = BuildEnvConfig(cfg);
  const CEMConfig cem = BuildCemConfig(cfg);
  const uint64_t seed = cfg.GetU64("seed");
  const CemResult result = TrainCem(MakeFactory(env), cem, seed, [](const CemIterationStats& s) {
    std::printf("iter %3d  elite %8.2f  population %8.2f  best %8.2f  noise %.3f\n", s.iteration,
                s.elite_mean, s.population_mean, s.best_return, s.mean_noise);
    std::fflush(stdout);
  });
  result.params.Save(out / "policy.bin");
  WriteCurveCsv(out / "curve.csv", result.curve);
  if (opt.eval_episodes > 0) {
    const MlpPolicy policy(result.params);
    const EvalReport report =
        Evaluate(policy, MakeFactory(env), opt.eval_episodes, DeriveSeed(seed, 0xE7A1));
    WriteText(out / "eval.json", ReportJson(report).dump(2) + "\n");
    std::printf("eval: success %.3f  collision %.3f  return %.2f\n", report.success_rate,
                report.collision_rate, report.mean_return);
  }
  return 0;
}

// ------------------------------------------------------------- make-offline

struct MakeOfflineOptions {
  std::string modality = "class";
};

int MakeOffline(const CommandLine& cl, const MakeOfflineOptions& opt) {
  const RunConfig cfg = Resolve(cl);
  const fs::path out = PrepareOutput(cfg, cl);
  EnvConfig env_cfg = BuildEnvConfig(cfg);
  env_cfg.include_rgb = opt.modality != "class";
  const double horizon = cfg.GetDouble("offline_horizon");
  Env env(env_cfg);
  const std::vector<EpisodeLog> logs = CollectExpertLogs(env, cfg.GetInt("episodes"),
                                                         cfg.GetU64("seed"));
  OfflineBuildResult built = BuildOfflineDataset(logs, horizon);
  if (built.records.empty()) throw std::runtime_error("no usable records; drive more episodes");
  if (opt.modality == "rgb") {
    for (OfflineRecord& r : built.records) r.class_map.reset();
  }
  WriteOfflineDataset(out, built.records);
  std::printf("wrote %zu records (skipped: %d history, %d future, %d degenerate) to %s\n",
              built.records.size(), built.skipped_history, built.skipped_future,
              built.skipped_degenerate, out.c_str());
  return 0;
}

// ------------------------------------------------------------- eval-offline

struct EvalOfflineOptions {
  std::string dataset;
  std::vector<std::string> policies;
  std::string label = "Policy";
  int random_seeds = 0;
  bool replay = false;
  std::string translator;
};

int EvalOffline(const CommandLine& cl, const EvalOfflineOptions& opt) {
  const RunConfig cfg = Resolve(cl);
  if (opt.policies.empty() && opt.random_seeds == 0 && !opt.replay) {
    throw UsageError("nothing to evaluate: give --policy, --random or --replay");
  }
  if (opt.random_seeds < 0) throw UsageError("--random must be >= 0");
  const fs::path out = PrepareOutput(cfg, cl);
  const EnvConfig env = BuildEnvConfig(cfg);
  const uint64_t seed = cfg.GetU64("seed");
  const std::vector<OfflineRecord> records = ReadOfflineDataset(opt.dataset);
  std::optional<SubprocessTranslator> translator;
  if (!opt.translator.empty()) translator.emplace(opt.translator, out / "translate");
  fs::path dataset_path = fs::path(opt.dataset).lexically_normal();
  if (dataset_path.filename().empty()) dataset_path = dataset_path.parent_path();
  const std::string name = dataset_path.filename().string();

  auto run = [&](const TrajectoryModel& model, uint64_t s) {
    return EvaluateOffline(model, records, s, translator ? &*translator : nullptr);
  };
  std::vector<ReportRow> rows;
  if (opt.replay) {
    const std::vector<MetricReport> reports = {run(ReplayReferenceModel(), DeriveSeed(seed, 0))};
    rows.push_back({"Replay", name, AggregateSeeds(reports)});
  }
  if (opt.random_seeds > 0) {
    const RandomPolicy random(env.horizon);
    const PolicyTrajectoryModel model(random, env.rollout);
    std::vector<MetricReport> reports;
    for (int i = 0; i < opt.random_seeds; ++i) reports.push_back(run(model, DeriveSeed(seed, i)));
    rows.push_back({"Random", name, AggregateSeeds(reports)});
  }
  if (!opt.policies.empty()) {
    std::vector<MetricReport> reports;
    for (size_t i = 0; i < opt.policies.size(); ++i) {
      const MlpPolicy policy(PolicyParams::Load(opt.policies[i]));
      reports.push_back(run(PolicyTrajectoryModel(policy, env.rollout), DeriveSeed(seed, i)));
    }
    rows.push_back({opt.label, name, AggregateSeeds(reports)});
  }
  WriteReportCsv(out / "report.csv", rows);
  std::printf("%s", FormatReportTable(rows).c_str());
  return 0;
}

// -------------------------------------------------------------- eval-online

struct EvalOnlineOptions {
  std::string policy;
  std::string baseline;
  std::string scene;
  int preview_episodes = 0;
};

// Top-down map at 4 px per cell with the driven trail, the tracked plan, the
// goal and the vehicle drawn on top.
Image TrajectoryPreview(const World& world, std::span<const Pose2> trail,
                        std::span<const Pose2> plan, Vec2 goal, Pose2 vehicle) {
  constexpr int kScale = 4;
  const Image base = TopDownImage(world);
  Image img(base.width * kScale, base.height * kScale, 3);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      std::copy_n(base.At(r / kScale, c / kScale), 3, img.At(r, c));
    }
  }
  const double px_per_m = kScale / world.resolution();
  auto disc = [&](Vec2 p, double radius_px, Rgb8 color) {
    const double cx = p.x * px_per_m + kScale / 2.0;
    const double cy = (base.height - 1) * kScale - p.y * px_per_m + kScale / 2.0;
    const int r0 = static_cast<int>(std::floor(cy - radius_px));
    const int c0 = static_cast<int>(std::floor(cx - radius_px));
    for (int r = r0; r <= static_cast<int>(std::ceil(cy + radius_px)); ++r) {
      for (int c = c0; c <= static_cast<int>(std::ceil(cx + radius_px)); ++c) {
        if (r < 0 || c < 0 || r >= img.height || c >= img.width) continue;
        if (std::hypot(c + 0.5 - cx, r + 0.5 - cy) > radius_px) continue;
        uint8_t* px = img.At(r, c);
        px[0] = color.r;
        px[1] = color.g;
        px[2] = color.b;
      }
    }
  };
  auto polyline = [&](std::span<const Pose2> pts, Rgb8 color) {
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      const Vec2 a = pts[i].Position(), b = pts[i + 1].Position();
      const int steps = 1 + static_cast<int>((b - a).Norm() * px_per_m * 2);
      for (int k = 0; k <= steps; ++k) disc(a + (static_cast<double>(k) / steps) * (b - a), 1.0, color);
    }
  };
  disc(goal, 2.0 * px_per_m, {255, 0, 255});
  polyline(trail, {255, 220, 0});
  polyline(plan, {255, 128, 0});
  disc(vehicle.Position(), 3.0, {0, 255, 255});
  return img;
}

int EvalOnline(const CommandLine& cl, const EvalOnlineOptions& opt) {
  const RunConfig cfg = Resolve(cl);
  if (opt.policy.empty() == opt.baseline.empty()) {
    throw UsageError("give exactly one of --policy or --baseline");
  }
  if (opt.preview_episodes < 0) throw UsageError("--preview-episodes must be >= 0");
  const fs::path out = PrepareOutput(cfg, cl);
  const EnvConfig env_cfg = BuildEnvConfig(cfg);
  const uint64_t seed = cfg.GetU64("seed");
  const int n = cfg.GetInt("episodes");

  std::unique_ptr<Policy> policy;
  std::string label = opt.baseline;
  if (!opt.policy.empty()) {
    policy = LoadPolicy(opt.policy, env_cfg.horizon);
    label = opt.policy;
  } else if (opt.baseline == "random") {
    policy = std::make_unique<RandomPolicy>(env_cfg.horizon);
  } else {
    policy = std::make_unique<GoalSeekingPolicy>(env_cfg.horizon);
  }
  std::optional<Scenario> scene;
  if (opt.scene == "rock") scene = RockAvoidanceScene();
  if (opt.preview_episodes > 0) fs::create_directories(out / "preview");

  const EnvFactory factory = MakeFactory(env_cfg);
  const int workers = std::min(ThreadCount(), n);
  std::vector<std::unique_ptr<Env>> envs(workers);
  for (auto& e : envs) e = factory();
  std::vector<EpisodeOutcome> outcomes(n);
  std::vector<std::string> logs(n);
  ParallelFor(
      n,
      [&](size_t i, int worker) {
        Env& env = *envs[worker];
        const uint64_t episode_seed = DeriveSeed(seed, i);
        std::string& lines = logs[i];
        std::vector<Pose2> trail;
        const StepObserver observer = [&](int t, std::span<const ActionTuple> actions,
                                          const StepResult& step) {
          json line = json::parse(EpisodeLogLine(t, actions, step, env_cfg.weights));
          line["episode"] = i;
          lines += line.dump() + "\n";
          if (static_cast<int>(i) >= opt.preview_episodes) return;
          if (trail.empty()) trail.push_back(step.info.decision_pose);
          const auto& hist = env.history();
          const size_t added = std::min<size_t>(
              hist.size(), step.info.substeps / env_cfg.episode.substeps_per_action);
          trail.insert(trail.end(), hist.end() - added, hist.end());
          trail.push_back(env.state().pose());
          std::vector<Pose2> plan;
          const Pose2& base = step.info.decision_pose;
          for (const Pose2& p : step.info.plan) {
            const double c = std::cos(base.yaw), s = std::sin(base.yaw);
            plan.push_back({base.x + c * p.x - s * p.y, base.y + s * p.x + c * p.y, 0.0});
          }
          char file[64];
          std::snprintf(file, sizeof(file), "ep%03zu_step%03d.png", i, t);
          WritePng(out / "preview" / file, TrajectoryPreview(env.world(), trail, plan,
                                                             env.goal_world(), env.state().pose()));
        };
        outcomes[i] = scene ? RunScenarioEpisode(env, *policy, *scene, episode_seed, observer)
                            : RunEpisode(env, *policy, episode_seed, observer);
      },
      workers);
  const EvalReport report = SummarizeOutcomes(std::move(outcomes));
  json j = ReportJson(report);
  j["policy"] = label;
  j["scene"] = opt.scene.empty() ? "sampled" : opt.scene;
  j["seed"] = seed;
  json per_episode = json::array();
  for (const EpisodeOutcome& o : report.outcomes) {
    per_episode.push_back({{"seed", o.seed},
                           {"return", o.total_return},
                           {"decisions", o.decisions},
                           {"success", o.success},
                           {"collision", o.collision}});
  }
  j["outcomes"] = std::move(per_episode);
  WriteText(out / "report.json", j.dump(2) + "\n");
  std::string all;
  for (const std::string& l : logs) all += l;
  WriteText(out / "episodes.jsonl", all);
  std::printf("episodes %d  success %.3f  collision %.3f  return %.2f  decisions-to-goal %.2f\n",
              report.episodes, report.success_rate, report.collision_rate, report.mean_return,
              report.mean_decisions_to_goal);
  return 0;
}

// ----------------------------------------------------------- render-preview

struct RenderPreviewOptions {
  std::string world_file;
  double yaw = 0.0;
};

int RenderPreview(const CommandLine& cl, const RenderPreviewOptions& opt) {
  const RunConfig cfg = Resolve(cl);
  const fs::path out = PrepareOutput(cfg, cl);
  const EnvConfig env = BuildEnvConfig(cfg);
  const uint64_t seed = cfg.GetU64("seed");
  const World world = opt.world_file.empty()
                          ? GenerateWorld(BuildWorldSpec(cfg, Presets(cfg).front(), seed))
                          : LoadWorld(opt.world_file);
  const Vec2 start = world.start_point();
  const RenderOutput r =
      Render(world, {start.x, start.y, opt.yaw}, env.camera, env.randomization, DeriveSeed(seed, 0x9E7));
  WritePng(out / "rgb.png", r.rgb);
  WritePng(out / "seg.png", ColorizeSegmentation(r.class_map));
  Image depth(r.class_map.width, r.class_map.height, 1);
  for (size_t i = 0; i < r.depth.size(); ++i) {
    const double near = 1.0 - std::clamp(r.depth[i] / env.camera.max_range, 0.0, 1.0);
    depth.data[i] = static_cast<uint8_t>(std::lround(255.0 * near));
  }
  WritePng(out / "depth.png", depth);
  std::printf("wrote rgb.png, seg.png, depth.png to %s\n", out.c_str());
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"s2s: off-road driving simulation, training and evaluation"};
  app.require_subcommand(1);
  CommandLine cl;

  CLI::App* gen = app.add_subcommand("gen-world", "generate a world file and top-down preview");
  AddCommon(gen, cl);
  AddPresetFlag(gen, cl);
  AddKey(gen, cl, "--extent", "extent", "world side length, m");
  AddKey(gen, cl, "--grid-resolution", "grid_resolution", "m per heightmap cell");
  AddKey(gen, cl, "--tree-density", "tree_density", "trees per 100 m^2");
  AddKey(gen, cl, "--rock-density", "rock_density", "rocks per 100 m^2");
  AddKey(gen, cl, "--log-density", "log_density", "logs per 100 m^2");
  AddKey(gen, cl, "--relief", "relief_scale", "terrain amplitude multiplier");
  AddKey(gen, cl, "--road", "road", "true, false or auto");

  CLI::App* collect = app.add_subcommand("collect-pairs", "render paired RGB/segmentation/depth");
  AddCommon(collect, cl);
  AddPresetFlag(collect, cl);
  AddHorizonFlag(collect, cl);
  AddKey(collect, cl, "--n", "n_pairs", "total pairs, split across presets");
  AddKey(collect, cl, "--image-size", "camera_resolution", "square image side, px");
  AddKey(collect, cl, "--randomization", "randomization", "full, appearance or off");

  TrainOptions train_opt;
  CLI::App* train = app.add_subcommand("train", "train a policy with the cross-entropy method");
  AddCommon(train, cl);
  AddPresetFlag(train, cl);
  AddHorizonFlag(train, cl);
  AddEmptyFlag(train, cl);
  AddKey(train, cl, "--iterations", "cem_iterations", "CEM iterations");
  AddKey(train, cl, "--population", "cem_population", "CEM population");
  AddKey(train, cl, "--episodes", "cem_episodes", "episodes per candidate");
  AddKey(train, cl, "--goal-range", "goal_range", "max goal distance, m");
  AddKey(train, cl, "--max-decisions", "max_decisions", "decisions per episode");
  train->add_option("--eval-episodes", train_opt.eval_episodes, "evaluate the result afterwards");

  MakeOfflineOptions offline_opt;
  CLI::App* make = app.add_subcommand("make-offline", "build an offline dataset from expert drives");
  AddCommon(make, cl);
  AddPresetFlag(make, cl);
  AddHorizonFlag(make, cl);
  AddEmptyFlag(make, cl);
  AddKey(make, cl, "--episodes", "episodes", "expert episodes");
  AddKey(make, cl, "--horizon", "offline_horizon", "reference horizon, s");
  make->add_option("--modality", offline_opt.modality, "observation stored per record")
      ->check(CLI::IsMember({"class", "rgb", "both"}));

  EvalOfflineOptions eval_off_opt;
  CLI::App* eoff = app.add_subcommand("eval-offline", "score trajectories against a dataset");
  AddCommon(eoff, cl);
  AddHorizonFlag(eoff, cl);
  eoff->add_option("--dataset", eval_off_opt.dataset, "dataset directory")->required();
  eoff->add_option("--policy", eval_off_opt.policies, "policy checkpoint, one per seed");
  eoff->add_option("--label", eval_off_opt.label, "method name for --policy rows");
  eoff->add_option("--random", eval_off_opt.random_seeds, "random-policy seeds");
  eoff->add_flag("--replay", eval_off_opt.replay, "replay the reference (oracle stub)");
  eoff->add_option("--translator", eval_off_opt.translator,
                   "command mapping RGB PNG paths (stdin) to class-map PNG paths (stdout)");

  EvalOnlineOptions eval_on_opt;
  CLI::App* eon = app.add_subcommand("eval-online", "closed-loop evaluation");
  AddCommon(eon, cl);
  AddPresetFlag(eon, cl);
  AddHorizonFlag(eon, cl);
  AddEmptyFlag(eon, cl);
  AddKey(eon, cl, "--episodes", "episodes", "episodes");
  AddKey(eon, cl, "--goal-range", "goal_range", "max goal distance, m");
  AddKey(eon, cl, "--max-decisions", "max_decisions", "decisions per episode");
  eon->add_option("--policy", eval_on_opt.policy, "policy checkpoint");
  eon->add_option("--baseline", eval_on_opt.baseline, "built-in policy")
      ->check(CLI::IsMember({"random", "seeker"}));
  eon->add_option("--scene", eval_on_opt.scene, "constructed scene instead of sampled episodes")
      ->check(CLI::IsMember({"rock"}));
  eon->add_flag_callback("--preview", [&] { eval_on_opt.preview_episodes = 1; },
                         "per-step preview PNGs for the first episode");
  eon->add_option("--preview-episodes", eval_on_opt.preview_episodes,
                  "per-step preview PNGs for the first N episodes");

  RenderPreviewOptions render_opt;
  CLI::App* render = app.add_subcommand("render-preview", "render one view from the start pose");
  AddCommon(render, cl);
  AddPresetFlag(render, cl);
  AddKey(render, cl, "--image-size", "camera_resolution", "square image side, px");
  AddKey(render, cl, "--randomization", "randomization", "full, appearance or off");
  render->add_option("--world", render_opt.world_file, "world file instead of generating one");
  render->add_option("--yaw", render_opt.yaw, "camera heading, rad");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  CLI::App* cmd = app.get_subcommands().front();
  cl.command = cmd->get_name();
  try {
    if (cmd == gen) return GenWorld(cl);
    if (cmd == collect) return CollectPairs(cl);
    if (cmd == train) return Train(cl, train_opt);
    if (cmd == make) return MakeOffline(cl, offline_opt);
    if (cmd == eoff) return EvalOffline(cl, eval_off_opt);
    if (cmd == eon) return EvalOnline(cl, eval_on_opt);
    if (cmd == render) return RenderPreview(cl, render_opt);
  } catch (const UsageError& e) {
    std::cerr << "s2s " << cl.command << ": " << e.what() << "\n"
              << "run 's2s " << cl.command << " --help' for usage\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "s2s " << cl.command << ": error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace
}  // namespace s2s

int main(int argc, char** argv) { return s2s::Main(argc, argv); }
