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

#include "s2s/config.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace s2s {
namespace {

std::string Trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value, const char* want) {
  throw std::invalid_argument("config key '" + key + "': expected " + want + ", got '" + value + "'");
}

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

RunConfig RunConfig::Defaults() {
  RunConfig c;
  c.values_ = {
      {"seed", "1"},
      {"output", "out"},
      // worlds
      {"presets", "meadow,landscape,canyon"},
      {"world_variants", "4"},
      {"extent", "100"},
      {"grid_resolution", "1"},
      {"tree_density", "auto"},
      {"rock_density", "auto"},
      {"log_density", "auto"},
      {"relief_scale", "1"},
      {"road", "auto"},
      // camera and randomization
      {"camera_resolution", "64"},
      {"camera_fov_deg", "90"},
      {"camera_max_range", "100"},
      {"randomization", "full"},
      {"include_rgb", "false"},
      // episode
      {"A", "5"},
      {"heading_rate", "0.1"},
      {"goal_range", "20"},
      {"goal_min_distance", "2"},
      {"goal_radius", "2"},
      {"max_decisions", "30"},
      {"substeps_per_action", "5"},
      {"dt", "0.02"},
      {"initial_speed", "2"},
      {"collision_terminal", "false"},
      {"footprint_radius", "1.5"},
      // reward
      {"weight_goal", "1"},
      {"weight_upright", "1"},
      {"weight_steer", "0.1"},
      {"weight_collision", "1"},
      // learner
      {"cem_population", "32"},
      {"cem_elite_fraction", "0.25"},
      {"cem_iterations", "30"},
      {"cem_init_noise", "2.0"},
      {"cem_extra_noise", "0.5"},
      {"cem_fixed_eval_seeds", "false"},
      {"cem_min_noise", "0.02"},
      {"cem_episodes", "8"},
      {"cem_hidden", "8"},
      {"her_ratio", "0.8"},
      // commands
      {"n_pairs", "auto"},          // 2000 per preset
      {"episodes", "50"},
      {"offline_horizon", "3"},
  };
  return c;
}

void RunConfig::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second = value;
}

std::string RunConfig::GetString(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::GetDouble(const std::string& key) const {
  const std::string v = GetString(key);
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  BadValue(key, v, "a number");
}

int RunConfig::GetInt(const std::string& key) const {
  const std::string v = GetString(key);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(key, v, "an integer");
  return out;
}

uint64_t RunConfig::GetU64(const std::string& key) const {
  const std::string v = GetString(key);
  uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(key, v, "an unsigned integer");
  return out;
}

bool RunConfig::GetBool(const std::string& key) const {
  const std::string v = GetString(key);
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  BadValue(key, v, "true or false");
}

std::string RunConfig::ToText() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::WriteResolved(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << ToText();
}

WorldSpec BuildWorldSpec(const RunConfig& cfg, Preset preset, uint64_t seed) {
  WorldSpec spec = WorldSpec::ForPreset(preset, seed);
  spec.extent = cfg.GetDouble("extent");
  spec.grid_resolution = cfg.GetDouble("grid_resolution");
  spec.relief_scale = cfg.GetDouble("relief_scale");
  if (cfg.GetString("tree_density") != "auto") spec.tree_density = cfg.GetDouble("tree_density");
  if (cfg.GetString("rock_density") != "auto") spec.rock_density = cfg.GetDouble("rock_density");
  if (cfg.GetString("log_density") != "auto") spec.log_density = cfg.GetDouble("log_density");
  if (cfg.GetString("road") != "auto") {
    if (cfg.GetBool("road")) {
      if (!spec.road) spec.road = RoadSpec{};
    } else {
      spec.road.reset();
    }
  }
  spec.Validate();
  return spec;
}

EnvConfig BuildEnvConfig(const RunConfig& cfg) {
  EnvConfig env;
  const uint64_t seed = cfg.GetU64("seed");
  const std::vector<std::string> names = SplitCommas(cfg.GetString("presets"));
  if (names.empty()) throw std::invalid_argument("config key 'presets' is empty");
  for (const std::string& name : names) {
    const std::optional<Preset> p = ParsePreset(name);
    if (!p) throw std::invalid_argument("unknown preset '" + name + "'");
    env.worlds.push_back(BuildWorldSpec(cfg, *p, DeriveSeed(seed, static_cast<uint64_t>(*p))));
  }
  env.world_variants = cfg.GetInt("world_variants");
  env.camera.resolution = cfg.GetInt("camera_resolution");
  env.camera.fov = cfg.GetDouble("camera_fov_deg") * kPi / 180.0;
  env.camera.max_range = cfg.GetDouble("camera_max_range");
  const std::string rand = cfg.GetString("randomization");
  if (rand == "full") {
    env.randomization = RandomizationConfig{};
  } else if (rand == "appearance") {
    env.randomization = RandomizationConfig::AppearanceOnly();
  } else if (rand == "off") {
    env.randomization = RandomizationConfig::Disabled();
  } else {
    BadValue("randomization", rand, "full, appearance or off");
  }
  env.include_rgb = cfg.GetBool("include_rgb");
  env.horizon = cfg.GetInt("A");
  env.rollout.heading_rate = cfg.GetDouble("heading_rate");
  env.episode.goal_range = cfg.GetDouble("goal_range");
  env.episode.goal_min_distance = cfg.GetDouble("goal_min_distance");
  env.episode.goal_radius = cfg.GetDouble("goal_radius");
  env.episode.max_decisions = cfg.GetInt("max_decisions");
  env.episode.substeps_per_action = cfg.GetInt("substeps_per_action");
  env.episode.dt = cfg.GetDouble("dt");
  env.episode.initial_speed = cfg.GetDouble("initial_speed");
  env.episode.collision_terminal = cfg.GetBool("collision_terminal");
  env.vehicle.footprint_radius = cfg.GetDouble("footprint_radius");
  env.tracker.point_period = env.episode.action_period();
  env.weights.goal = cfg.GetDouble("weight_goal");
  env.weights.upright = cfg.GetDouble("weight_upright");
  env.weights.steer = cfg.GetDouble("weight_steer");
  env.weights.collision = cfg.GetDouble("weight_collision");
  env.Validate();
  return env;
}

CEMConfig BuildCemConfig(const RunConfig& cfg) {
  CEMConfig c;
  c.population = cfg.GetInt("cem_population");
  c.elite_fraction = cfg.GetDouble("cem_elite_fraction");
  c.iterations = cfg.GetInt("cem_iterations");
  c.init_noise = cfg.GetDouble("cem_init_noise");
  c.min_noise = cfg.GetDouble("cem_min_noise");
  c.episodes_per_candidate = cfg.GetInt("cem_episodes");
  c.hidden = cfg.GetInt("cem_hidden");
  c.extra_noise = cfg.GetDouble("cem_extra_noise");
  c.fixed_eval_seeds = cfg.GetBool("cem_fixed_eval_seeds");
  c.horizon = cfg.GetInt("A");
  c.Validate();
  return c;
}

HERConfig BuildHerConfig(const RunConfig& cfg) {
  HERConfig h;
  h.relabel_ratio = cfg.GetDouble("her_ratio");
  h.Validate();
  return h;
}

}  // namespace s2s
