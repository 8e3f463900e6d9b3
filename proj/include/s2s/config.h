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

#ifndef S2S_CONFIG_H_
#define S2S_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "s2s/env.h"
#include "s2s/learner.h"
#include "s2s/replay.h"
#include "s2s/world.h"

namespace s2s {

// Flat key=value run configuration. Precedence: built-in defaults, then a
// config file, then explicit overrides. Unknown keys and malformed values
// throw std::invalid_argument.
class RunConfig {
 public:
  static RunConfig Defaults();

  // Lines are "key = value"; '#' starts a comment.
  void LoadFile(const std::filesystem::path& path);
  void Set(const std::string& key, const std::string& value);

  std::string GetString(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  int GetInt(const std::string& key) const;
  uint64_t GetU64(const std::string& key) const;
  bool GetBool(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

  // Sorted "key = value" lines.
  std::string ToText() const;
  void WriteResolved(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> values_;
};

// World spec for one preset; density keys set to "auto" keep the preset
// defaults.
WorldSpec BuildWorldSpec(const RunConfig& cfg, Preset preset, uint64_t seed);
EnvConfig BuildEnvConfig(const RunConfig& cfg);
CEMConfig BuildCemConfig(const RunConfig& cfg);
HERConfig BuildHerConfig(const RunConfig& cfg);

}  // namespace s2s

#endif  // S2S_CONFIG_H_
