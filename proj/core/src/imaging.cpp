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

#include "malvis/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "malvis/error.hpp"

namespace malvis {

GrayImage::GrayImage(std::size_t height, std::size_t width)
    : height_(height), width_(width), pixels_(height * width, 0.0) {
  if (height == 0 || width == 0) fail("ShapeMismatch", "empty image");
}

GrayImage::GrayImage(std::size_t height, std::size_t width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height == 0 || width == 0) fail("ShapeMismatch", "empty image");
  if (pixels_.size() != height * width)
    fail("ShapeMismatch", "pixel count does not match height x width");
}

SquareImage::SquareImage(std::size_t side, double fill)
    : side_(side), pixels_(side * side, fill) {
  if (side == 0) fail("ShapeMismatch", "square image side must be positive");
}

SquareImage::SquareImage(std::size_t side, std::vector<double> pixels)
    : side_(side), pixels_(std::move(pixels)) {
  if (side == 0) fail("ShapeMismatch", "square image side must be positive");
  if (pixels_.size() != side * side)
    fail("ShapeMismatch", "pixel count does not match side^2");
}

RgbTensor::RgbTensor(std::size_t side) : side_(side), data_(side * side * 3, 0.0) {}

SquareImage RgbTensor::channel(std::size_t ch) const {
  std::vector<double> plane(side_ * side_);
  for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = data_[i * 3 + ch];
  return SquareImage(side_, std::move(plane));
}

namespace {

struct WidthBracket {
  std::uint64_t upper_kb;
  std::size_t width;
};

constexpr std::array<WidthBracket, 8> kWidthTable{{
    {10, 32},
    {30, 64},
    {60, 128},
    {100, 256},
    {200, 384},
    {500, 512},
    {1000, 768},
    {2000, 1024},
}};

constexpr std::size_t kLargestWidth = 2048;

}  // namespace

std::size_t width_for_size(std::uint64_t file_size_bytes) {
  for (const auto& b : kWidthTable)
    if (file_size_bytes <= b.upper_kb * 1024) return b.width;
  return kLargestWidth;
}

GrayImage bytes_to_gray(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) fail("EmptyInput", "byte stream is empty");
  const std::size_t width = width_for_size(bytes.size());
  const std::size_t height = (bytes.size() + width - 1) / width;
  std::vector<double> pixels(height * width, 0.0);
  for (std::size_t i = 0; i < bytes.size(); ++i) pixels[i] = bytes[i] / 255.0;
  return GrayImage(height, width, std::move(pixels));
}

namespace {

// Source index pair and blend weight for one output coordinate.
struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> make_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double max_pos = static_cast<double>(in - 1);
  for (std::size_t i = 0; i < out; ++i) {
    double pos = (static_cast<double>(i) + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, max_pos);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    taps[i] = {lo, std::min(lo + 1, in - 1), pos - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

SquareImage resize_bilinear(const GrayImage& img, std::size_t side) {
  if (side == 0) fail("ShapeMismatch", "resize side must be positive");
  const auto rows = make_taps(img.height(), side);
  const auto cols = make_taps(img.width(), side);
  SquareImage out(side);
  for (std::size_t r = 0; r < side; ++r) {
    const Tap& ty = rows[r];
    for (std::size_t c = 0; c < side; ++c) {
      const Tap& tx = cols[c];
      const double top = (1.0 - tx.frac) * img.at(ty.lo, tx.lo) + tx.frac * img.at(ty.lo, tx.hi);
      const double bottom =
          (1.0 - tx.frac) * img.at(ty.hi, tx.lo) + tx.frac * img.at(ty.hi, tx.hi);
      // Convex weights can overshoot 1 by an ulp; keep the range invariant.
      out.at(r, c) = std::clamp((1.0 - ty.frac) * top + ty.frac * bottom, 0.0, 1.0);
    }
  }
  return out;
}

RgbTensor replicate_channels(const SquareImage& img) {
  RgbTensor t(img.side());
  for (std::size_t r = 0; r < img.side(); ++r)
    for (std::size_t c = 0; c < img.side(); ++c)
      for (std::size_t ch = 0; ch < 3; ++ch) t.at(r, c, ch) = img.at(r, c);
  return t;
}

}  // namespace malvis
