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

#include "malvis/image_store.hpp"

#include <limits>

#include "malvis/binio.hpp"
#include "malvis/error.hpp"

namespace malvis {

namespace {

std::uint16_t checked_u16(std::size_t v, const char* what) {
  if (v == 0 || v > std::numeric_limits<std::uint16_t>::max())
    fail("BadFormat", std::string(what) + " out of u16 range: " + std::to_string(v));
  return static_cast<std::uint16_t>(v);
}

}  // namespace

ImageRecord make_record(std::string id, const SquareImage& img) {
  ImageRecord rec;
  rec.id = std::move(id);
  rec.width = checked_u16(img.side(), "width");
  rec.height = rec.width;
  rec.channels = 1;
  rec.pixels.assign(img.pixels().begin(), img.pixels().end());
  return rec;
}

ImageRecord make_record(std::string id, const RgbTensor& img) {
  ImageRecord rec;
  rec.id = std::move(id);
  rec.width = checked_u16(img.side(), "width");
  rec.height = rec.width;
  rec.channels = 3;
  rec.pixels.assign(img.data().begin(), img.data().end());
  return rec;
}

SquareImage record_to_square(const ImageRecord& rec) {
  if (rec.width != rec.height)
    fail("ShapeMismatch", "record " + rec.id + " is not square");
  const std::size_t n = std::size_t{rec.width} * rec.height;
  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) px[i] = rec.pixels[i * rec.channels];
  return SquareImage(rec.width, std::move(px));
}

void ImageStore::add(ImageRecord rec) {
  if (index_.contains(rec.id)) fail("DuplicateId", "duplicate record id " + rec.id);
  if (rec.pixels.size() != std::size_t{rec.width} * rec.height * rec.channels)
    fail("ShapeMismatch", "record " + rec.id + " pixel count mismatch");
  index_.emplace(rec.id, records_.size());
  records_.push_back(std::move(rec));
}

const ImageRecord* ImageStore::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<std::uint8_t> encode_image_store(const ImageStore& store) {
  ByteWriter w;
  w.raw("MIMG");
  w.u8(kImageStoreVersion);
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (const auto& rec : store.records()) {
    w.str16(rec.id);
    w.u16(rec.width);
    w.u16(rec.height);
    w.u8(rec.channels);
    for (float v : rec.pixels) w.f32(v);
  }
  return w.take();
}

ImageStore decode_image_store(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "image store");
  r.expect_magic("MIMG");
  const auto version = r.u8();
  if (version != kImageStoreVersion)
    r.fail_at("BadFormat", "unsupported version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  ImageStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    ImageRecord rec;
    rec.id = r.str16();
    rec.width = r.u16();
    rec.height = r.u16();
    rec.channels = r.u8();
    if (rec.width == 0 || rec.height == 0 || rec.channels == 0)
      r.fail_at("BadFormat", "zero dimension in record " + rec.id);
    const std::size_t n = std::size_t{rec.width} * rec.height * rec.channels;
    r.require(n * 4, "pixel data");
    rec.pixels.resize(n);
    for (auto& v : rec.pixels) v = r.f32();
    store.add(std::move(rec));
  }
  if (!r.at_end()) r.fail_at("BadFormat", "trailing bytes after last record");
  return store;
}

void write_image_store(const std::filesystem::path& path, const ImageStore& store) {
  write_file_bytes(path, encode_image_store(store));
}

ImageStore read_image_store(const std::filesystem::path& path) {
  return decode_image_store(read_file_bytes(path));
}

}  // namespace malvis
