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

// ".mimg" image store:
//   "MIMG" | version u8 = 1 | record count u32
//   per record: id (u16 length + UTF-8) | width u16 | height u16 |
//               channels u8 | width*height*channels f32, row-major,
//               channel-last
// All integers and floats are little-endian.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "malvis/imaging.hpp"

namespace malvis {

inline constexpr std::uint8_t kImageStoreVersion = 1;

struct ImageRecord {
  std::string id;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t channels = 1;
  std::vector<float> pixels;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

ImageRecord make_record(std::string id, const SquareImage& img);
ImageRecord make_record(std::string id, const RgbTensor& img);

// Channel 0 of a square record as an image.
SquareImage record_to_square(const ImageRecord& rec);

class ImageStore {
 public:
  void add(ImageRecord rec);
  std::size_t size() const { return records_.size(); }
  const std::vector<ImageRecord>& records() const { return records_; }
  const ImageRecord& at(std::size_t i) const { return records_.at(i); }
  // nullptr when absent.
  const ImageRecord* find(const std::string& id) const;

  friend bool operator==(const ImageStore& a, const ImageStore& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<ImageRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::vector<std::uint8_t> encode_image_store(const ImageStore& store);
ImageStore decode_image_store(std::span<const std::uint8_t> bytes);

void write_image_store(const std::filesystem::path& path, const ImageStore& store);
ImageStore read_image_store(const std::filesystem::path& path);

}  // namespace malvis
