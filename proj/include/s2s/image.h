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

#ifndef S2S_IMAGE_H_
#define S2S_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace s2s {

// Interleaved 8-bit image, row-major, `channels` is 1 (gray) or 3 (RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<uint8_t> data;

  Image() = default;
  Image(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, 0) {}

  uint8_t* At(int row, int col) {
    return data.data() + (static_cast<size_t>(row) * width + col) * channels;
  }
  const uint8_t* At(int row, int col) const {
    return data.data() + (static_cast<size_t>(row) * width + col) * channels;
  }
  friend bool operator==(const Image&, const Image&) = default;
};

// Throws std::runtime_error on I/O failure.
void WritePng(const std::filesystem::path& path, const Image& image);
Image ReadPng(const std::filesystem::path& path);

// Little-endian float32 raster, row-major.
void WriteF32(const std::filesystem::path& path, const std::vector<float>& values);
std::vector<float> ReadF32(const std::filesystem::path& path);

}  // namespace s2s

#endif  // S2S_IMAGE_H_
