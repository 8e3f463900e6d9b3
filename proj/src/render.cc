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

#include "s2s/render.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace s2s {
namespace {

using Mat3 = std::array<double, 9>;

Vec3 Mul(const Mat3& m, Vec3 v) {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 MatMul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
    }
  }
  return r;
}

Mat3 RotX(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {1, 0, 0, 0, c, -s, 0, s, c};
}
Mat3 RotY(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c, 0, s, 0, 1, 0, -s, 0, c};
}
Mat3 RotZ(double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c, -s, 0, s, c, 0, 0, 0, 1};
}

double Dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 Normalized(Vec3 v) {
  const double n = std::sqrt(Dot(v, v));
  return {v.x / n, v.y / n, v.z / n};
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  ClassId cls = ClassId::kSky;
  Vec3 normal{0, 0, 1};
  Vec3 point;
};

struct GeometryJitter {
  Vec3 offset;
  double roll = 0, pitch = 0, yaw = 0;
  double fov = 0;
};

// All draws happen regardless of the enable flags so that toggling one axis
// never shifts the random stream of another.
GeometryJitter DrawGeometry(const RandomizationConfig& rand, uint64_t seed) {
  Rng rng(DeriveSeed(seed, 11));
  GeometryJitter j;
  const double px = rng.Uniform(-1, 1), py = rng.Uniform(-1, 1), pz = rng.Uniform(-1, 1);
  const double ar = rng.Uniform(-1, 1), ap = rng.Uniform(-1, 1), ay = rng.Uniform(-1, 1);
  const double f = rng.Uniform(-1, 1);
  if (rand.randomize_extrinsics) {
    j.offset = {px * rand.position_jitter, py * rand.position_jitter, pz * rand.position_jitter};
    j.roll = ar * rand.angle_jitter;
    j.pitch = ap * rand.angle_jitter;
    j.yaw = ay * rand.angle_jitter;
  }
  if (rand.randomize_intrinsics) j.fov = f * rand.fov_jitter;
  return j;
}

struct Appearance {
  std::array<std::array<double, 3>, kNumClasses> color{};  // linear 0..1
  Vec3 light_dir;
  std::array<double, 3> light_color{1, 1, 1};
  uint64_t texture_seed = 0;
  double texture_scale = 1.0;
  double texture_amplitude = 0.0;
};

std::array<double, 3> ShiftHue(std::array<double, 3> rgb, double shift) {
  const double r = rgb[0], g = rgb[1], b = rgb[2];
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0) {
    if (mx == r) h = std::fmod((g - b) / d + 6.0, 6.0);
    else if (mx == g) h = (b - r) / d + 2.0;
    else h = (r - g) / d + 4.0;
    h /= 6.0;
  }
  const double s = mx > 0 ? d / mx : 0.0;
  const double v = mx;
  h = std::fmod(h + shift + 1.0, 1.0);
  const double hh = h * 6.0;
  const int sector = static_cast<int>(hh) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

Appearance DrawAppearance(const RandomizationConfig& rand, uint64_t seed) {
  Rng rng(DeriveSeed(seed, 12));
  Appearance a;
  for (int c = 0; c < kNumClasses; ++c) {
    const Rgb8 base = rand.base_colors[c];
    std::array<double, 3> col = {base.r / 255.0, base.g / 255.0, base.b / 255.0};
    const double hue = rng.Uniform(-1, 1) * rand.hue_jitter;
    const double bright = 1.0 + rng.Uniform(-1, 1) * rand.brightness_jitter;
    if (rand.randomize_color) {
      col = ShiftHue(col, hue);
      for (double& v : col) v *= bright;
    }
    a.color[c] = col;
  }
  const double az_j = rng.Uniform(-1, 1), el_j = rng.Uniform(-1, 1);
  std::array<double, 3> lc_j;
  for (double& v : lc_j) v = rng.Uniform(-1, 1);
  double azimuth = 0.5, elevation = 0.9;
  if (rand.randomize_lighting) {
    azimuth += az_j * rand.light_direction_jitter * kPi;
    elevation = std::clamp(elevation + el_j * rand.light_direction_jitter, 0.15, 1.5);
    for (int k = 0; k < 3; ++k) a.light_color[k] = 1.0 + lc_j[k] * rand.light_color_jitter;
  }
  a.light_dir = {std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                 std::sin(elevation)};
  a.texture_seed = rng.Next();
  const double scale = rng.Uniform(0.3, 1.5);
  if (rand.randomize_texture) {
    a.texture_scale = scale;
    a.texture_amplitude = rand.texture_noise;
  }
  return a;
}

// Vertical cylinder: side wall plus top cap.
void IntersectCylinder(const Obstacle& o, Vec3 origin, Vec3 dir, Hit& best) {
  const double ox = origin.x - o.center.x;
  const double oy = origin.y - o.center.y;
  const double top = o.base + o.height;
  const double a = dir.x * dir.x + dir.y * dir.y;
  const double c = ox * ox + oy * oy - o.radius * o.radius;
  if (a > 1e-12 && c > 0) {
    const double b = 2 * (ox * dir.x + oy * dir.y);
    const double disc = b * b - 4 * a * c;
    if (disc >= 0) {
      const double t = (-b - std::sqrt(disc)) / (2 * a);
      if (t > 0 && t < best.t) {
        const double z = origin.z + t * dir.z;
        if (z >= o.base && z <= top) {
          best.t = t;
          best.cls = o.cls;
          best.normal = {(ox + t * dir.x) / o.radius, (oy + t * dir.y) / o.radius, 0.0};
          best.point = {origin.x + t * dir.x, origin.y + t * dir.y, z};
          return;
        }
      }
    }
  }
  if (dir.z < 0 && origin.z > top) {
    const double t = (top - origin.z) / dir.z;
    if (t > 0 && t < best.t) {
      const double hx = ox + t * dir.x, hy = oy + t * dir.y;
      if (hx * hx + hy * hy <= o.radius * o.radius) {
        best.t = t;
        best.cls = o.cls;
        best.normal = {0, 0, 1};
        best.point = {origin.x + t * dir.x, origin.y + t * dir.y, top};
      }
    }
  }
}

Vec3 TerrainNormal(const World& world, double x, double y) {
  const double e = 0.5 * world.resolution();
  const double hx = (HeightAt(world, x + e, y) - HeightAt(world, x - e, y)) / (2 * e);
  const double hy = (HeightAt(world, x, y + e) - HeightAt(world, x, y - e)) / (2 * e);
  return Normalized({-hx, -hy, 1.0});
}

// Lipschitz-bounded march along the ray: the gap to the terrain can close no
// faster than `rate` per unit distance, so stepping by gap/rate never skips
// a crossing. Returns the hit distance or +inf.
double MarchTerrain(const World& world, Vec3 o, Vec3 d, double t_limit) {
  const double horiz = std::hypot(d.x, d.y);
  const double rate = world.max_gradient() * horiz - d.z;
  auto gap = [&](double t) {
    return o.z + t * d.z - HeightAt(world, o.x + t * d.x, o.y + t * d.y);
  };
  double g = gap(0.0);
  if (g <= 0) return 1e-3;
  if (rate <= 0) return std::numeric_limits<double>::infinity();
  const double min_step = 0.05 * world.resolution();
  double t = 0.0;
  for (int iter = 0; iter < 20000; ++iter) {
    if (d.z >= 0 && o.z + t * d.z > world.max_height()) break;
    const double step = std::max(g / rate, min_step);
    const double t_next = t + step;
    const double g_next = gap(t_next);
    if (g_next <= 1e-7) {
      if (g_next >= -1e-7) return t_next;
      double lo = t, hi = t_next;
      for (int k = 0; k < 40; ++k) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0 ? lo : hi) = mid;
      }
      return hi;
    }
    if (t_next > t_limit) break;
    t = t_next;
    g = g_next;
  }
  return std::numeric_limits<double>::infinity();
}

uint8_t ToByte(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)); }

}  // namespace

void CameraModel::Validate() const {
  if (!(fov > 0 && fov < kPi)) throw std::invalid_argument("camera fov must be in (0, pi)");
  if (resolution < 16) throw std::invalid_argument("camera resolution must be >= 16");
  if (!(max_range > 0)) throw std::invalid_argument("camera max_range must be positive");
}

RandomizationConfig RandomizationConfig::AppearanceOnly() {
  RandomizationConfig r;
  r.randomize_intrinsics = false;
  r.randomize_extrinsics = false;
  return r;
}

RandomizationConfig RandomizationConfig::Disabled() {
  RandomizationConfig r;
  r.randomize_color = r.randomize_lighting = r.randomize_texture = false;
  r.randomize_intrinsics = r.randomize_extrinsics = false;
  return r;
}

void RandomizationConfig::Validate() const {
  for (double v : {hue_jitter, brightness_jitter, light_direction_jitter, light_color_jitter,
                   texture_noise, fov_jitter, position_jitter, angle_jitter}) {
    if (!(v >= 0)) throw std::invalid_argument("randomization ranges must be non-negative");
  }
}

RenderOutput Render(const World& world, const Pose2& pose, const CameraModel& camera,
                    const RandomizationConfig& rand, uint64_t rng_seed) {
  camera.Validate();
  const GeometryJitter jit = DrawGeometry(rand, rng_seed);
  const Appearance look = DrawAppearance(rand, rng_seed);

  const Attitude att = SurfaceAttitude(world, pose.x, pose.y, pose.yaw);
  constexpr double kRad = kPi / 180.0;
  const Mat3 body = MatMul(RotZ(pose.yaw),
                           MatMul(RotY(-att.pitch_deg * kRad), RotX(-att.roll_deg * kRad)));
  const Mat3 mount = MatMul(RotZ(jit.yaw), MatMul(RotY(camera.mount_pitch + jit.pitch), RotX(jit.roll)));
  const Mat3 cam = MatMul(body, mount);
  const Vec3 offset{camera.mount_offset.x + jit.offset.x, camera.mount_offset.y + jit.offset.y,
                    camera.mount_offset.z + jit.offset.z};
  const Vec3 rotated = Mul(body, offset);
  const Vec3 origin{pose.x + rotated.x, pose.y + rotated.y,
                    HeightAt(world, pose.x, pose.y) + rotated.z};
  const double fov = std::clamp(camera.fov + jit.fov, 0.05, kPi - 0.05);
  const double tan_half = std::tan(fov / 2);
  const double max_range = camera.max_range;

  // Cull obstacles out of range or well outside the horizontal view cone.
  const Vec3 fwd = Mul(cam, {1, 0, 0});
  const double fwd_h = std::hypot(fwd.x, fwd.y);
  const double cone = std::atan(tan_half * std::sqrt(2.0)) + 0.35;
  std::vector<const Obstacle*> candidates;
  for (const Obstacle& o : world.obstacles()) {
    const double dx = o.center.x - origin.x, dy = o.center.y - origin.y;
    const double dist = std::hypot(dx, dy);
    if (dist - o.radius > max_range) continue;
    if (dist > o.radius + 1e-9 && fwd_h > 0.5) {
      const double bearing = std::acos(std::clamp((dx * fwd.x + dy * fwd.y) / (dist * fwd_h), -1.0, 1.0));
      if (bearing - std::asin(std::min(1.0, o.radius / dist)) > cone) continue;
    }
    candidates.push_back(&o);
  }

  const int n = camera.resolution;
  RenderOutput out;
  out.rgb = Image(n, n, 3);
  out.class_map = ClassMap(n, n, ClassId::kSky);
  out.depth.assign(static_cast<size_t>(n) * n, static_cast<float>(max_range));
  out.obstacle_mask.assign(static_cast<size_t>(n) * n, 0);

  for (int row = 0; row < n; ++row) {
    const double v = (1.0 - (row + 0.5) / n * 2.0) * tan_half;
    for (int col = 0; col < n; ++col) {
      const double u = ((col + 0.5) / n * 2.0 - 1.0) * tan_half;
      const Vec3 dir = Normalized(Mul(cam, {1.0, -u, v}));
      Hit hit;
      for (const Obstacle* o : candidates) IntersectCylinder(*o, origin, dir, hit);
      const double t_terrain = MarchTerrain(world, origin, dir, std::min(hit.t, max_range));
      if (t_terrain < hit.t) {
        hit.t = t_terrain;
        hit.point = {origin.x + t_terrain * dir.x, origin.y + t_terrain * dir.y,
                     origin.z + t_terrain * dir.z};
        hit.cls = GroundClassAt(world, hit.point.x, hit.point.y);
        hit.normal = TerrainNormal(world, hit.point.x, hit.point.y);
      }
      const size_t idx = static_cast<size_t>(row) * n + col;
      std::array<double, 3> color;
      if (hit.t <= max_range) {
        out.class_map.labels[idx] = static_cast<uint8_t>(hit.cls);
        out.depth[idx] = static_cast<float>(hit.t);
        out.obstacle_mask[idx] = IsObstacleClass(hit.cls) ? 1 : 0;
        const double lambert = std::max(0.0, Dot(hit.normal, look.light_dir));
        const double shade = 0.35 + 0.65 * lambert;
        double speckle = 1.0;
        if (look.texture_amplitude > 0) {
          const uint64_t s = look.texture_seed + static_cast<uint64_t>(hit.cls);
          speckle += look.texture_amplitude *
                     LatticeNoise(s, (hit.point.x + hit.point.z) / look.texture_scale,
                                  (hit.point.y - hit.point.z) / look.texture_scale);
        }
        const auto& base = look.color[static_cast<int>(hit.cls)];
        for (int k = 0; k < 3; ++k) color[k] = base[k] * look.light_color[k] * shade * speckle;
      } else {
        // Sky brightens toward the zenith.
        const auto& base = look.color[static_cast<int>(ClassId::kSky)];
        const double grad = 0.85 + 0.15 * std::clamp(dir.z, 0.0, 1.0);
        for (int k = 0; k < 3; ++k) color[k] = base[k] * look.light_color[k] * grad;
      }
      uint8_t* px = out.rgb.At(row, col);
      for (int k = 0; k < 3; ++k) px[k] = ToByte(color[k]);
    }
  }
  return out;
}

Image ColorizeSegmentation(const ClassMap& class_map) {
  Image img(class_map.width, class_map.height, 3);
  for (size_t i = 0; i < class_map.labels.size(); ++i) {
    const auto cls = ClassFromIndex(class_map.labels[i]);
    if (!cls) {
      throw std::invalid_argument("class index " + std::to_string(class_map.labels[i]) +
                                  " out of range");
    }
    const Rgb8 c = ClassColor(*cls);
    img.data[3 * i] = c.r;
    img.data[3 * i + 1] = c.g;
    img.data[3 * i + 2] = c.b;
  }
  return img;
}

ClassMap ClassMapFromColors(const Image& image) {
  if (image.channels != 3) throw std::invalid_argument("palette image must be RGB");
  ClassMap map(image.width, image.height);
  for (size_t i = 0; i < map.labels.size(); ++i) {
    const auto cls = ClassFromColor({image.data[3 * i], image.data[3 * i + 1], image.data[3 * i + 2]});
    if (!cls) throw std::invalid_argument("color not in class palette");
    map.labels[i] = static_cast<uint8_t>(*cls);
  }
  return map;
}

std::vector<uint8_t> ObstacleMask(const ClassMap& class_map) {
  std::vector<uint8_t> mask(class_map.labels.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    mask[i] = IsObstacleClass(static_cast<ClassId>(class_map.labels[i])) ? 1 : 0;
  }
  return mask;
}

Image ClassMapToGray(const ClassMap& class_map) {
  Image img(class_map.width, class_map.height, 1);
  img.data = class_map.labels;
  return img;
}

ClassMap ClassMapFromGray(const Image& image) {
  if (image.channels != 1) throw std::invalid_argument("segmentation image must be grayscale");
  ClassMap map;
  map.width = image.width;
  map.height = image.height;
  map.labels = image.data;
  for (uint8_t v : map.labels) {
    if (v >= kNumClasses) {
      throw std::invalid_argument("segmentation value " + std::to_string(v) + " out of range");
    }
  }
  return map;
}

void WritePairFiles(const std::filesystem::path& dir, const std::string& id,
                    const RenderOutput& out) {
  WritePng(dir / (id + "_rgb.png"), out.rgb);
  WritePng(dir / (id + "_seg.png"), ClassMapToGray(out.class_map));
  WriteF32(dir / (id + "_depth.f32"), out.depth);
}

}  // namespace s2s
