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

#ifndef S2S_COMMON_H_
#define S2S_COMMON_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace s2s {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
  double Norm() const { return std::hypot(x, y); }
};

// Planar pose: position in meters, yaw in radians (counter-clockwise from +x).
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  Vec2 Position() const { return {x, y}; }
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Wraps an angle into (-pi, pi].
inline double WrapAngle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

// splitmix64 finalizer; used to derive independent stream seeds from a
// master seed and a tag.
inline uint64_t MixSeed(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t DeriveSeed(uint64_t seed, uint64_t tag) {
  return MixSeed(MixSeed(seed) ^ MixSeed(tag * 0xD1B54A32D192ED03ull + 1));
}

// Random source with distribution code pinned here rather than in the
// standard library, so streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n).
  uint64_t UniformInt(uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  double Normal() {
    // Box-Muller, one value per call.
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Knuth's multiplication method, chunked so exp(-lambda) never underflows.
  uint64_t Poisson(double lambda) {
    uint64_t total = 0;
    while (lambda > 0.0) {
      const double chunk = lambda > 200.0 ? 200.0 : lambda;
      lambda -= chunk;
      const double limit = std::exp(-chunk);
      double p = 1.0;
      uint64_t k = 0;
      while (true) {
        p *= Uniform();
        if (p <= limit) break;
        ++k;
      }
      total += k;
    }
    return total;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace s2s

#endif  // S2S_COMMON_H_
