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

#ifndef S2S_RENDER_H_
#define S2S_RENDER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "s2s/common.h"
#include "s2s/image.h"
#include "s2s/world.h"

namespace s2s {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Camera rigidly mounted on the vehicle. Vehicle frame: x forward, y left,
// z up; mount_pitch > 0 tilts the camera down.
struct CameraModel {
  Vec3 mount_offset{0.0, 0.0, 1.5};
  double mount_pitch = 0.17;
  double fov = kPi / 2;  // horizontal; images are square
  int resolution = 256;
  double max_range = 100.0;

  void Validate() const;
};

struct RandomizationConfig {
  // Unlit appearance of each class before jitter; indexed by ClassId.
  std::array<Rgb8, kNumClasses> base_colors = {{
      {46, 94, 38},     // trees/bushes
      {128, 104, 72},   // ground
      {150, 190, 230},  // sky
      {120, 118, 112},  // rocks
      {176, 164, 140},  // road
      {98, 70, 44},     // logs
  }};
  double hue_jitter = 0.12;         // fraction of the hue circle
  double brightness_jitter = 0.35;  // relative
  double light_direction_jitter = 0.6;  // rad
  double light_color_jitter = 0.3;      // relative, per channel
  double texture_noise = 0.3;           // relative speckle amplitude
  double fov_jitter = 0.1;              // rad
  double position_jitter = 0.2;         // m, per axis
  double angle_jitter = 0.05;           // rad, per axis

  bool randomize_color = true;
  bool randomize_lighting = true;
  bool randomize_texture = true;
  bool randomize_intrinsics = true;
  bool randomize_extrinsics = true;

  // Appearance axes only; geometry is left untouched.
  static RandomizationConfig AppearanceOnly();
  static RandomizationConfig Disabled();

  void Validate() const;
};

// Per-pixel semantic labels, row-major, values are ClassId indices.
struct ClassMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> labels;

  ClassMap() = default;
  ClassMap(int w, int h, ClassId fill = ClassId::kGround)
      : width(w), height(h),
        labels(static_cast<size_t>(w) * h, static_cast<uint8_t>(fill)) {}

  ClassId at(int row, int col) const {
    return static_cast<ClassId>(labels[static_cast<size_t>(row) * width + col]);
  }
  void set(int row, int col, ClassId c) {
    labels[static_cast<size_t>(row) * width + col] = static_cast<uint8_t>(c);
  }
  friend bool operator==(const ClassMap&, const ClassMap&) = default;
};

struct RenderOutput {
  Image rgb;
  ClassMap class_map;
  std::vector<float> depth;           // meters; sky = max_range
  std::vector<uint8_t> obstacle_mask;  // 1 on trees/rocks/logs
};

// Raycasts one ray per pixel against terrain and obstacle cylinders.
// Geometric jitter (pose, fov) moves the ray bundle and so affects every
// output; appearance jitter touches only `rgb`.
RenderOutput Render(const World& world, const Pose2& vehicle_pose,
                    const CameraModel& camera, const RandomizationConfig& rand,
                    uint64_t rng_seed);

// Palette image; throws std::invalid_argument on a label outside 0..5.
Image ColorizeSegmentation(const ClassMap& class_map);
// Inverse of ColorizeSegmentation; throws on a color not in the palette.
ClassMap ClassMapFromColors(const Image& image);

std::vector<uint8_t> ObstacleMask(const ClassMap& class_map);

// Grayscale encoding used on disk: pixel value = class index.
Image ClassMapToGray(const ClassMap& class_map);
ClassMap ClassMapFromGray(const Image& image);

// Writes <id>_rgb.png, <id>_seg.png and <id>_depth.f32 into `dir`.
void WritePairFiles(const std::filesystem::path& dir, const std::string& id,
                    const RenderOutput& out);

}  // namespace s2s

#endif  // S2S_RENDER_H_
