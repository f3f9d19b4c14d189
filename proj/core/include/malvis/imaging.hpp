/*
 * Copyright 2026 The malvis Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Binary-to-image preprocessing: bytes are scaled to [0,1], laid out
// row-major at a width chosen from the file size, zero padded to a full
// rectangle, then resampled to a square.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace malvis {

inline constexpr std::size_t kDefaultImageSide = 224;
inline constexpr std::size_t kSmallImageSide = 28;

struct ByteStream {
  std::vector<std::uint8_t> bytes;
  std::string source_id;
};

// Row-major grayscale image with pixels in [0,1].
class GrayImage {
 public:
  GrayImage(std::size_t height, std::size_t width);
  GrayImage(std::size_t height, std::size_t width, std::vector<double> pixels);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  double at(std::size_t r, std::size_t c) const { return pixels_[r * width_ + c]; }
  double& at(std::size_t r, std::size_t c) { return pixels_[r * width_ + c]; }
  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> pixels_;
};

class SquareImage {
 public:
  explicit SquareImage(std::size_t side, double fill = 0.0);
  SquareImage(std::size_t side, std::vector<double> pixels);

  std::size_t side() const { return side_; }
  double at(std::size_t r, std::size_t c) const { return pixels_[r * side_ + c]; }
  double& at(std::size_t r, std::size_t c) { return pixels_[r * side_ + c]; }
  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  GrayImage as_gray() const { return GrayImage(side_, side_, pixels_); }

  friend bool operator==(const SquareImage&, const SquareImage&) = default;

 private:
  std::size_t side_;
  std::vector<double> pixels_;
};

// side x side x 3, channel-last. All three planes are equal when built by
// replicate_channels.
class RgbTensor {
 public:
  explicit RgbTensor(std::size_t side);

  std::size_t side() const { return side_; }
  static constexpr std::size_t channels() { return 3; }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return data_[(r * side_ + c) * 3 + ch];
  }
  double& at(std::size_t r, std::size_t c, std::size_t ch) {
    return data_[(r * side_ + c) * 3 + ch];
  }
  std::span<const double> data() const { return data_; }
  SquareImage channel(std::size_t ch) const;

 private:
  std::size_t side_;
  std::vector<double> data_;
};

// File-size to image-width lookup. 1 kb = 1024 bytes, brackets are (lo, hi];
// anything above 2000 kb maps to 2048.
std::size_t width_for_size(std::uint64_t file_size_bytes);

// Throws EmptyInput for an empty stream.
GrayImage bytes_to_gray(std::span<const std::uint8_t> bytes);
inline GrayImage bytes_to_gray(const ByteStream& stream) {
  return bytes_to_gray(stream.bytes);
}

// Bilinear resampling with half-pixel-centre alignment and edge clamping.
SquareImage resize_bilinear(const GrayImage& img, std::size_t side);

RgbTensor replicate_channels(const SquareImage& img);

inline SquareImage to_small(const GrayImage& img) {
  return resize_bilinear(img, kSmallImageSide);
}

}  // namespace malvis
