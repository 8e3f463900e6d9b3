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

#include "s2s/world.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "binary_io.h"

namespace s2s {
namespace {

constexpr uint16_t kWorldFormatVersion = 1;
constexpr int kPlacementAttempts = 30;

std::atomic<uint64_t> g_out_of_bounds{0};

double LatticeValue(uint64_t seed, int64_t ix, int64_t iy) {
  const uint64_t h = MixSeed(seed ^ MixSeed(static_cast<uint64_t>(ix) * 0x9E3779B97F4A7C15ull ^
                                            static_cast<uint64_t>(iy) * 0xC2B2AE3D27D4EB4Full));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;  // [-1, 1)
}

double Fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

double ValueNoise(uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<int64_t>(fx);
  const auto iy = static_cast<int64_t>(fy);
  const double u = Fade(x - fx);
  const double v = Fade(y - fy);
  const double a = LatticeValue(seed, ix, iy);
  const double b = LatticeValue(seed, ix + 1, iy);
  const double c = LatticeValue(seed, ix, iy + 1);
  const double d = LatticeValue(seed, ix + 1, iy + 1);
  return (a * (1 - u) + b * u) * (1 - v) + (c * (1 - u) + d * u) * v;
}

double Fbm(uint64_t seed, double x, double y, double wavelength, int octaves) {
  double sum = 0.0;
  double norm = 0.0;
  double amp = 1.0;
  double freq = 1.0 / wavelength;
  for (int k = 0; k < octaves; ++k) {
    sum += amp * ValueNoise(DeriveSeed(seed, 100 + k), x * freq, y * freq);
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

struct ClassShape {
  double radius_lo;
  double radius_hi;
  double height_lo;
  double height_hi;
};

// Log discs are sized separately (see PlaceLog).
constexpr ClassShape kTreeShape{0.4, 1.5, 3.0, 8.0};
constexpr ClassShape kRockShape{0.5, 2.0, 0.5, 2.0};

bool OverlapsAny(const std::vector<Obstacle>& placed, Vec2 c, double r) {
  for (const Obstacle& o : placed) {
    if ((o.center - c).Norm() < o.radius + r) return true;
  }
  return false;
}

class Placer {
 public:
  Placer(const WorldSpec& spec, const std::vector<uint8_t>& road, int n)
      : spec_(spec), road_(road), n_(n) {}

  bool Admissible(const std::vector<Obstacle>& placed, Vec2 c, double r) const {
    if (c.x < 0 || c.y < 0 || c.x > spec_.extent || c.y > spec_.extent) {
      return false;
    }
    const Vec2 start{spec_.extent / 2, spec_.extent / 2};
    if ((c - start).Norm() < kStartClearance + r) return false;
    const int ix = std::clamp(static_cast<int>(std::lround(c.x / spec_.grid_resolution)), 0, n_ - 1);
    const int iy = std::clamp(static_cast<int>(std::lround(c.y / spec_.grid_resolution)), 0, n_ - 1);
    if (road_[static_cast<size_t>(iy) * n_ + ix]) return false;
    return !OverlapsAny(placed, c, r);
  }

 private:
  const WorldSpec& spec_;
  const std::vector<uint8_t>& road_;
  int n_;
};

void PlaceCylinders(ClassId cls, const ClassShape& shape, double density,
                    const WorldSpec& spec, const Placer& placer,
                    std::vector<Obstacle>& placed) {
  Rng rng(DeriveSeed(spec.seed, 1000 + static_cast<uint64_t>(cls)));
  const uint64_t count = rng.Poisson(density * spec.extent * spec.extent / 100.0);
  for (uint64_t k = 0; k < count; ++k) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const Vec2 c{rng.Uniform(0, spec.extent), rng.Uniform(0, spec.extent)};
      const double r = rng.Uniform(shape.radius_lo, shape.radius_hi);
      const double h = rng.Uniform(shape.height_lo, shape.height_hi);
      if (placer.Admissible(placed, c, r)) {
        placed.push_back({cls, c, r, h, 0.0});
        break;
      }
    }
  }
}

void PlaceLogs(double density, const WorldSpec& spec, const Placer& placer,
               std::vector<Obstacle>& placed) {
  Rng rng(DeriveSeed(spec.seed, 1000 + static_cast<uint64_t>(ClassId::kLogs)));
  const uint64_t count = rng.Poisson(density * spec.extent * spec.extent / 100.0);
  for (uint64_t k = 0; k < count; ++k) {
    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const Vec2 c{rng.Uniform(0, spec.extent), rng.Uniform(0, spec.extent)};
      const int discs = 2 + static_cast<int>(rng.UniformInt(3));
      const double r = rng.Uniform(0.25, 0.4);
      const double dir = rng.Uniform(0, 2 * kPi);
      const double spacing = 1.5 * r;
      std::vector<Obstacle> chain;
      bool ok = true;
      for (int d = 0; d < discs && ok; ++d) {
        const double offset = (d - 0.5 * (discs - 1)) * spacing;
        const Vec2 p{c.x + offset * std::cos(dir), c.y + offset * std::sin(dir)};
        ok = placer.Admissible(placed, p, r);
        chain.push_back({ClassId::kLogs, p, r, 2 * r, 0.0});
      }
      if (ok) {
        placed.insert(placed.end(), chain.begin(), chain.end());
        break;
      }
    }
  }
}

double SegmentDistance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).Norm();
}

std::vector<uint8_t> BuildRoadMask(const WorldSpec& spec, int n) {
  std::vector<uint8_t> mask(static_cast<size_t>(n) * n, 0);
  if (!spec.road) return mask;
  Rng rng(DeriveSeed(spec.seed, 2000));
  std::vector<Vec2> waypoints;
  const int m = spec.road->waypoints;
  for (int k = 0; k < m; ++k) {
    waypoints.push_back({spec.extent * k / (m - 1), rng.Uniform(0.2, 0.8) * spec.extent});
  }
  const double half = spec.road->width / 2;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p{ix * spec.grid_resolution, iy * spec.grid_resolution};
      for (int k = 0; k + 1 < m; ++k) {
        if (SegmentDistance(p, waypoints[k], waypoints[k + 1]) <= half) {
          mask[static_cast<size_t>(iy) * n + ix] = 1;
          break;
        }
      }
    }
  }
  return mask;
}

}  // namespace

std::optional<ClassId> ClassFromIndex(int index) {
  if (index < 0 || index >= kNumClasses) return std::nullopt;
  return static_cast<ClassId>(index);
}

std::optional<ClassId> ClassFromColor(Rgb8 color) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (ClassColor(static_cast<ClassId>(i)) == color) return static_cast<ClassId>(i);
  }
  return std::nullopt;
}

std::string_view ClassName(ClassId c) {
  switch (c) {
    case ClassId::kTrees: return "trees";
    case ClassId::kGround: return "ground";
    case ClassId::kSky: return "sky";
    case ClassId::kRocks: return "rocks";
    case ClassId::kRoad: return "road";
    case ClassId::kLogs: return "logs";
  }
  return "unknown";
}

std::string_view PresetName(Preset p) {
  switch (p) {
    case Preset::kMeadow: return "meadow";
    case Preset::kLandscape: return "landscape";
    case Preset::kCanyon: return "canyon";
  }
  return "unknown";
}

std::optional<Preset> ParsePreset(std::string_view name) {
  if (name == "meadow") return Preset::kMeadow;
  if (name == "landscape" || name == "landscapes") return Preset::kLandscape;
  if (name == "canyon") return Preset::kCanyon;
  return std::nullopt;
}

WorldSpec WorldSpec::ForPreset(Preset preset, uint64_t seed) {
  WorldSpec spec;
  spec.seed = seed;
  spec.preset = preset;
  switch (preset) {
    case Preset::kMeadow:
      spec.tree_density = 0.3;
      spec.rock_density = 0.2;
      spec.log_density = 0.1;
      spec.road = RoadSpec{};
      break;
    case Preset::kLandscape:
      spec.tree_density = 0.6;
      spec.rock_density = 0.4;
      spec.log_density = 0.1;
      break;
    case Preset::kCanyon:
      spec.tree_density = 0.05;
      spec.rock_density = 1.0;
      spec.log_density = 0.02;
      break;
  }
  return spec;
}

void WorldSpec::Validate() const {
  std::ostringstream err;
  if (!(extent > 0) || !std::isfinite(extent)) err << "extent must be positive; ";
  if (!(grid_resolution > 0) || !std::isfinite(grid_resolution)) {
    err << "grid_resolution must be positive; ";
  }
  if (!(tree_density >= 0) || !(rock_density >= 0) || !(log_density >= 0)) {
    err << "obstacle densities must be non-negative; ";
  }
  if (!(relief_scale >= 0)) err << "relief_scale must be non-negative; ";
  if (road && (!(road->width > 0) || road->waypoints < 2)) {
    err << "road needs width > 0 and at least 2 waypoints; ";
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("invalid WorldSpec: " + msg);
}

double PresetAmplitude(Preset preset) {
  switch (preset) {
    case Preset::kMeadow: return 0.3;
    case Preset::kLandscape: return 3.0;
    case Preset::kCanyon: return 10.0;
  }
  return 0.0;
}

int GridSizeFor(const WorldSpec& spec) {
  return std::max(1, static_cast<int>(std::ceil(spec.extent / spec.grid_resolution - 1e-9)));
}

double TerrainNoise(uint64_t seed, Preset preset, double x, double y) {
  switch (preset) {
    case Preset::kMeadow:
      return Fbm(seed, x, y, 40.0, 3);
    case Preset::kLandscape:
      return Fbm(seed, x, y, 30.0, 4);
    case Preset::kCanyon: {
      // Ridged: high walls along the zero set of the base noise.
      const double ridge = 1.0 - std::abs(Fbm(seed, x, y, 60.0, 4));
      return ridge * ridge * ridge * ridge;
    }
  }
  return 0.0;
}

World::World(WorldSpec spec, std::vector<double> heights,
             std::vector<Obstacle> obstacles, std::vector<uint8_t> road_mask)
    : spec_(std::move(spec)),
      grid_size_(GridSizeFor(spec_)),
      heights_(std::move(heights)),
      obstacles_(std::move(obstacles)),
      road_mask_(std::move(road_mask)) {
  const int n = grid_size_;
  if (heights_.size() != static_cast<size_t>(n) * n ||
      road_mask_.size() != heights_.size()) {
    throw std::invalid_argument("World grid size does not match spec");
  }
  double gx = 0.0, gy = 0.0;
  min_height_ = std::numeric_limits<double>::infinity();
  max_height_ = -min_height_;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double h = node_height(ix, iy);
      if (!std::isfinite(h)) throw std::invalid_argument("non-finite elevation");
      min_height_ = std::min(min_height_, h);
      max_height_ = std::max(max_height_, h);
      if (ix + 1 < n) gx = std::max(gx, std::abs(node_height(ix + 1, iy) - h));
      if (iy + 1 < n) gy = std::max(gy, std::abs(node_height(ix, iy + 1) - h));
    }
  }
  max_gradient_ = std::hypot(gx, gy) / spec_.grid_resolution;

  max_obstacle_top_ = max_height_;
  for (const Obstacle& o : obstacles_) {
    max_obstacle_radius_ = std::max(max_obstacle_radius_, o.radius);
    max_obstacle_top_ = std::max(max_obstacle_top_, o.base + o.height);
  }
  bucket_size_ = std::max(4.0, 2.0 * max_obstacle_radius_);
  buckets_per_side_ = std::max(1, static_cast<int>(std::ceil(spec_.extent / bucket_size_)));
  buckets_.assign(static_cast<size_t>(buckets_per_side_) * buckets_per_side_, {});
  for (int i = 0; i < static_cast<int>(obstacles_.size()); ++i) {
    const Vec2 c = obstacles_[i].center;
    const int bx = std::clamp(static_cast<int>(c.x / bucket_size_), 0, buckets_per_side_ - 1);
    const int by = std::clamp(static_cast<int>(c.y / bucket_size_), 0, buckets_per_side_ - 1);
    buckets_[static_cast<size_t>(by) * buckets_per_side_ + bx].push_back(i);
  }
}

void World::CandidateObstacles(Vec2 p, double r, std::vector<int>& out) const {
  out.clear();
  if (obstacles_.empty()) return;
  const double reach = r + max_obstacle_radius_;
  const int x0 = std::clamp(static_cast<int>(std::floor((p.x - reach) / bucket_size_)), 0, buckets_per_side_ - 1);
  const int x1 = std::clamp(static_cast<int>(std::floor((p.x + reach) / bucket_size_)), 0, buckets_per_side_ - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor((p.y - reach) / bucket_size_)), 0, buckets_per_side_ - 1);
  const int y1 = std::clamp(static_cast<int>(std::floor((p.y + reach) / bucket_size_)), 0, buckets_per_side_ - 1);
  for (int by = y0; by <= y1; ++by) {
    for (int bx = x0; bx <= x1; ++bx) {
      const auto& bucket = buckets_[static_cast<size_t>(by) * buckets_per_side_ + bx];
      out.insert(out.end(), bucket.begin(), bucket.end());
    }
  }
}

World GenerateWorld(const WorldSpec& spec) {
  spec.Validate();
  const int n = GridSizeFor(spec);
  const double amplitude = PresetAmplitude(spec.preset) * spec.relief_scale;
  const uint64_t terrain_seed = DeriveSeed(spec.seed, 1);
  std::vector<double> heights(static_cast<size_t>(n) * n, 0.0);
  if (amplitude > 0) {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        heights[static_cast<size_t>(iy) * n + ix] =
            amplitude * TerrainNoise(terrain_seed, spec.preset,
                                     ix * spec.grid_resolution, iy * spec.grid_resolution);
      }
    }
  }
  std::vector<uint8_t> road = BuildRoadMask(spec, n);

  std::vector<Obstacle> obstacles;
  const Placer placer(spec, road, n);
  PlaceCylinders(ClassId::kTrees, kTreeShape, spec.tree_density, spec, placer, obstacles);
  PlaceCylinders(ClassId::kRocks, kRockShape, spec.rock_density, spec, placer, obstacles);
  PlaceLogs(spec.log_density, spec, placer, obstacles);

  // Bases need the finished heightmap; sink slightly so slopes leave no gap.
  World bare(spec, heights, {}, road);
  for (Obstacle& o : obstacles) o.base = HeightAt(bare, o.center.x, o.center.y) - 0.2;
  return World(spec, std::move(heights), std::move(obstacles), std::move(road));
}

double LatticeNoise(uint64_t seed, double x, double y) { return ValueNoise(seed, x, y); }

uint64_t OutOfBoundsQueryCount() { return g_out_of_bounds.load(); }

double HeightAt(const World& world, double x, double y) {
  const int n = world.grid_size();
  const double res = world.resolution();
  const double max_coord = (n - 1) * res;
#ifndef NDEBUG
  if (x < 0 || y < 0 || x > world.extent() || y > world.extent()) {
    g_out_of_bounds.fetch_add(1, std::memory_order_relaxed);
  }
#endif
  const double gx = std::clamp(x, 0.0, max_coord) / res;
  const double gy = std::clamp(y, 0.0, max_coord) / res;
  const int ix = std::min(static_cast<int>(gx), std::max(n - 2, 0));
  const int iy = std::min(static_cast<int>(gy), std::max(n - 2, 0));
  if (n == 1) return world.node_height(0, 0);
  const double u = gx - ix;
  const double v = gy - iy;
  const double h00 = world.node_height(ix, iy);
  const double h10 = world.node_height(ix + 1, iy);
  const double h01 = world.node_height(ix, iy + 1);
  const double h11 = world.node_height(ix + 1, iy + 1);
  return (h00 * (1 - u) + h10 * u) * (1 - v) + (h01 * (1 - u) + h11 * u) * v;
}

Attitude SurfaceAttitude(const World& world, double x, double y, double yaw,
                         const Footprint& footprint) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double hu = footprint.length / 2;
  const double hv = footprint.width / 2;
  double zu = 0.0, zv = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double u = (i & 1) ? hu : -hu;
    const double v = (i & 2) ? hv : -hv;
    const double z = HeightAt(world, x + c * u - s * v, y + s * u + c * v);
    zu += z * u;
    zv += z * v;
  }
  // Corners are symmetric, so the least-squares slopes decouple.
  const double slope_u = zu / (4 * hu * hu);
  const double slope_v = zv / (4 * hv * hv);
  constexpr double kDeg = 180.0 / kPi;
  return {std::atan(-slope_v) * kDeg, std::atan(slope_u) * kDeg};
}

bool QueryCollision(const World& world, double x, double y, double footprint_radius) {
  thread_local std::vector<int> candidates;
  world.CandidateObstacles({x, y}, footprint_radius, candidates);
  for (int i : candidates) {
    const Obstacle& o = world.obstacles()[i];
    if (std::hypot(o.center.x - x, o.center.y - y) < o.radius + footprint_radius) {
      return true;
    }
  }
  return false;
}

ClassId GroundClassAt(const World& world, double x, double y) {
  const int n = world.grid_size();
  const int ix = std::clamp(static_cast<int>(std::lround(x / world.resolution())), 0, n - 1);
  const int iy = std::clamp(static_cast<int>(std::lround(y / world.resolution())), 0, n - 1);
  return world.road_at_node(ix, iy) ? ClassId::kRoad : ClassId::kGround;
}

void SaveWorld(const World& world, const std::filesystem::path& path) {
  using internal::WriteLe;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const WorldSpec& spec = world.spec();
  internal::WriteMagic(out, "S2SW");
  WriteLe<uint16_t>(out, kWorldFormatVersion);
  WriteLe<uint64_t>(out, spec.seed);
  WriteLe<uint8_t>(out, static_cast<uint8_t>(spec.preset));
  WriteLe<double>(out, spec.extent);
  WriteLe<double>(out, spec.grid_resolution);
  WriteLe<double>(out, spec.tree_density);
  WriteLe<double>(out, spec.rock_density);
  WriteLe<double>(out, spec.log_density);
  WriteLe<double>(out, spec.relief_scale);
  WriteLe<uint8_t>(out, spec.road ? 1 : 0);
  WriteLe<double>(out, spec.road ? spec.road->width : 0.0);
  WriteLe<int32_t>(out, spec.road ? spec.road->waypoints : 0);
  WriteLe<uint32_t>(out, static_cast<uint32_t>(world.grid_size()));
  for (double h : world.heights()) WriteLe<double>(out, h);
  WriteLe<uint32_t>(out, static_cast<uint32_t>(world.obstacles().size()));
  for (const Obstacle& o : world.obstacles()) {
    WriteLe<uint8_t>(out, static_cast<uint8_t>(o.cls));
    WriteLe<double>(out, o.center.x);
    WriteLe<double>(out, o.center.y);
    WriteLe<double>(out, o.radius);
    WriteLe<double>(out, o.height);
    WriteLe<double>(out, o.base);
  }
  for (uint8_t m : world.road_mask()) WriteLe<uint8_t>(out, m);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

World LoadWorld(const std::filesystem::path& path) {
  using internal::ReadLe;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  internal::ExpectMagic(in, "S2SW");
  const auto version = ReadLe<uint16_t>(in);
  if (version != kWorldFormatVersion) {
    throw std::runtime_error("unsupported world format version " + std::to_string(version));
  }
  WorldSpec spec;
  spec.seed = ReadLe<uint64_t>(in);
  const auto preset = ReadLe<uint8_t>(in);
  if (preset > 2) throw std::runtime_error("bad preset in world file");
  spec.preset = static_cast<Preset>(preset);
  spec.extent = ReadLe<double>(in);
  spec.grid_resolution = ReadLe<double>(in);
  spec.tree_density = ReadLe<double>(in);
  spec.rock_density = ReadLe<double>(in);
  spec.log_density = ReadLe<double>(in);
  spec.relief_scale = ReadLe<double>(in);
  const bool has_road = ReadLe<uint8_t>(in) != 0;
  const double road_width = ReadLe<double>(in);
  const int road_waypoints = ReadLe<int32_t>(in);
  if (has_road) spec.road = RoadSpec{road_width, road_waypoints};
  spec.Validate();
  const auto n = ReadLe<uint32_t>(in);
  if (static_cast<int>(n) != GridSizeFor(spec)) throw std::runtime_error("grid size mismatch");
  std::vector<double> heights(static_cast<size_t>(n) * n);
  for (double& h : heights) h = ReadLe<double>(in);
  const auto count = ReadLe<uint32_t>(in);
  std::vector<Obstacle> obstacles(count);
  for (Obstacle& o : obstacles) {
    const auto cls = ClassFromIndex(ReadLe<uint8_t>(in));
    if (!cls || !IsObstacleClass(*cls)) throw std::runtime_error("bad obstacle class");
    o.cls = *cls;
    o.center.x = ReadLe<double>(in);
    o.center.y = ReadLe<double>(in);
    o.radius = ReadLe<double>(in);
    o.height = ReadLe<double>(in);
    o.base = ReadLe<double>(in);
  }
  std::vector<uint8_t> road(static_cast<size_t>(n) * n);
  for (uint8_t& m : road) m = ReadLe<uint8_t>(in);
  return World(spec, std::move(heights), std::move(obstacles), std::move(road));
}

Image TopDownImage(const World& world) {
  const int n = world.grid_size();
  Image img(n, n, 3);
  std::vector<int> candidates;
  for (int row = 0; row < n; ++row) {
    const int iy = n - 1 - row;
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p{ix * world.resolution(), iy * world.resolution()};
      ClassId cls = world.road_at_node(ix, iy) ? ClassId::kRoad : ClassId::kGround;
      world.CandidateObstacles(p, 0.0, candidates);
      for (int i : candidates) {
        const Obstacle& o = world.obstacles()[i];
        if ((o.center - p).Norm() < o.radius) {
          cls = o.cls;
          break;
        }
      }
      const Rgb8 c = ClassColor(cls);
      uint8_t* px = img.At(row, ix);
      px[0] = c.r;
      px[1] = c.g;
      px[2] = c.b;
    }
  }
  // Obstacles narrower than a cell still mark their nearest node.
  for (const Obstacle& o : world.obstacles()) {
    const int ix = std::clamp(static_cast<int>(std::lround(o.center.x / world.resolution())), 0, n - 1);
    const int iy = std::clamp(static_cast<int>(std::lround(o.center.y / world.resolution())), 0, n - 1);
    const Rgb8 c = ClassColor(o.cls);
    uint8_t* px = img.At(n - 1 - iy, ix);
    px[0] = c.r;
    px[1] = c.g;
    px[2] = c.b;
  }
  return img;
}

}  // namespace s2s
