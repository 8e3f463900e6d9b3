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

#ifndef S2S_WORLD_H_
#define S2S_WORLD_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s2s/common.h"
#include "s2s/image.h"

namespace s2s {

// Semantic classes of the canonical segmentation space. Indices are stable
// and written to disk.
enum class ClassId : uint8_t {
  kTrees = 0,  // trees and bushes
  kGround = 1,
  kSky = 2,
  kRocks = 3,
  kRoad = 4,
  kLogs = 5,
};

inline constexpr int kNumClasses = 6;

struct Rgb8 {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;
  friend bool operator==(Rgb8, Rgb8) = default;
};

constexpr bool IsObstacleClass(ClassId c) {
  return c == ClassId::kTrees || c == ClassId::kRocks || c == ClassId::kLogs;
}

// Visualization palette: ground blue, trees/bushes green, sky black, rocks
// red, road white, logs purple.
constexpr Rgb8 ClassColor(ClassId c) {
  constexpr std::array<Rgb8, kNumClasses> kPalette = {{
      {0, 255, 0},      // trees/bushes
      {0, 0, 255},      // ground
      {0, 0, 0},        // sky
      {255, 0, 0},      // rocks
      {255, 255, 255},  // road
      {128, 0, 128},    // logs
  }};
  return kPalette[static_cast<int>(c)];
}

std::optional<ClassId> ClassFromIndex(int index);
std::optional<ClassId> ClassFromColor(Rgb8 color);
std::string_view ClassName(ClassId c);

enum class Preset : uint8_t { kMeadow = 0, kLandscape = 1, kCanyon = 2 };

std::string_view PresetName(Preset p);
std::optional<Preset> ParsePreset(std::string_view name);

struct RoadSpec {
  double width = 4.0;
  int waypoints = 5;
  friend bool operator==(const RoadSpec&, const RoadSpec&) = default;
};

struct WorldSpec {
  uint64_t seed = 0;
  Preset preset = Preset::kMeadow;
  double extent = 100.0;          // side of the square world, m
  double grid_resolution = 1.0;   // m per heightmap cell
  // Obstacle counts per 100 m^2.
  double tree_density = 0.0;
  double rock_density = 0.0;
  double log_density = 0.0;
  std::optional<RoadSpec> road;
  // Multiplier on the preset's terrain relief; 0 gives a flat world.
  double relief_scale = 1.0;

  // Preset defaults for the obstacle mix and road.
  static WorldSpec ForPreset(Preset preset, uint64_t seed);

  // Throws std::invalid_argument with a diagnostic on a bad spec.
  void Validate() const;

  friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

// Peak terrain relief for a preset before relief_scale, in meters.
double PresetAmplitude(Preset preset);

// A vertical cylinder standing on the terrain. Logs are chains of 2-4 of
// these.
struct Obstacle {
  ClassId cls = ClassId::kRocks;
  Vec2 center;
  double radius = 1.0;
  double height = 1.0;
  double base = 0.0;  // elevation of the cylinder's bottom

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

// Immutable after construction; safe to share read-only across threads.
class World {
 public:
  World(WorldSpec spec, std::vector<double> heights,
        std::vector<Obstacle> obstacles, std::vector<uint8_t> road_mask);

  const WorldSpec& spec() const { return spec_; }
  int grid_size() const { return grid_size_; }
  double resolution() const { return spec_.grid_resolution; }
  double extent() const { return spec_.extent; }
  const std::vector<double>& heights() const { return heights_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  const std::vector<uint8_t>& road_mask() const { return road_mask_; }

  double node_height(int ix, int iy) const {
    return heights_[static_cast<size_t>(iy) * grid_size_ + ix];
  }
  bool road_at_node(int ix, int iy) const {
    return road_mask_[static_cast<size_t>(iy) * grid_size_ + ix] != 0;
  }

  // Upper bound on |grad h| of the interpolated surface.
  double max_gradient() const { return max_gradient_; }
  double min_height() const { return min_height_; }
  double max_height() const { return max_height_; }
  double max_obstacle_top() const { return max_obstacle_top_; }

  // Where episodes start by default; kept clear of obstacles.
  Vec2 start_point() const { return {spec_.extent / 2, spec_.extent / 2}; }

  // Indices of obstacles whose disc may intersect the disc (p, r).
  void CandidateObstacles(Vec2 p, double r, std::vector<int>& out) const;

  friend bool operator==(const World& a, const World& b) {
    return a.spec_ == b.spec_ && a.heights_ == b.heights_ &&
           a.obstacles_ == b.obstacles_ && a.road_mask_ == b.road_mask_;
  }

 private:
  WorldSpec spec_;
  int grid_size_ = 0;
  std::vector<double> heights_;  // row-major, row = y index
  std::vector<Obstacle> obstacles_;
  std::vector<uint8_t> road_mask_;
  double max_gradient_ = 0.0;
  double min_height_ = 0.0;
  double max_height_ = 0.0;
  double max_obstacle_top_ = 0.0;
  double max_obstacle_radius_ = 0.0;
  // Uniform bucket grid over obstacle centers.
  double bucket_size_ = 4.0;
  int buckets_per_side_ = 1;
  std::vector<std::vector<int>> buckets_;
};

inline constexpr double kStartClearance = 6.0;
inline constexpr double kDefaultFootprintRadius = 1.5;

int GridSizeFor(const WorldSpec& spec);

World GenerateWorld(const WorldSpec& spec);

// Smooth lattice value noise in [-1, 1] with unit lattice spacing.
double LatticeNoise(uint64_t seed, double x, double y);

// Terrain value in [-1, 1] used by the generator; exposed for testing.
double TerrainNoise(uint64_t seed, Preset preset, double x, double y);

// Bilinear interpolation of the heightmap. Queries outside the grid clamp to
// the boundary.
double HeightAt(const World& world, double x, double y);

// Count of clamped out-of-bounds HeightAt queries; only maintained in builds
// without NDEBUG.
uint64_t OutOfBoundsQueryCount();

struct Attitude {
  double roll_deg = 0.0;   // positive when the vehicle's left side is lower
  double pitch_deg = 0.0;  // positive nose-up
};

struct Footprint {
  double length = 2.9;
  double width = 1.6;
};

// Roll and pitch of a footprint aligned to `yaw` resting on the
// least-squares plane through the terrain under its four corners.
Attitude SurfaceAttitude(const World& world, double x, double y, double yaw,
                         const Footprint& footprint = {});

// True iff any obstacle disc strictly overlaps the vehicle disc.
bool QueryCollision(const World& world, double x, double y,
                    double footprint_radius);

// Surface class of bare terrain: road or ground.
ClassId GroundClassAt(const World& world, double x, double y);

// Versioned little-endian binary ("S2SW").
void SaveWorld(const World& world, const std::filesystem::path& path);
World LoadWorld(const std::filesystem::path& path);

// One pixel per grid node, north up, colored with the class palette.
Image TopDownImage(const World& world);

}  // namespace s2s

#endif  // S2S_WORLD_H_
