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

#include "malvis/transfer.hpp"

#include <cmath>

#include "malvis/binio.hpp"
#include "malvis/dataset.hpp"
#include "malvis/error.hpp"

namespace malvis {

EmbeddingSet::EmbeddingSet(std::vector<std::string> ids, Matrix vectors, std::string backbone_tag)
    : ids_(std::move(ids)), vectors_(std::move(vectors)), backbone_tag_(std::move(backbone_tag)) {
  if (ids_.size() != vectors_.rows())
    fail("DimMismatch", std::to_string(ids_.size()) + " ids for " +
                            std::to_string(vectors_.rows()) + " embedding rows");
  if (!vectors_.all_finite()) fail("NonFinite", "embedding vectors contain NaN or infinity");
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!index_.emplace(ids_[i], i).second)
      fail("DuplicateId", "embedding id \"" + ids_[i] + "\" appears twice");
}

const std::size_t* EmbeddingSet::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &it->second;
}

Matrix EmbeddingSet::gather(std::span<const std::string> ids) const {
  std::vector<std::size_t> rows;
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& id : ids) {
    if (const std::size_t* at = find(id)) {
      rows.push_back(*at);
    } else {
      ++n_missing;
      if (n_missing <= 20) missing += (missing.empty() ? "" : ", ") + id;
    }
  }
  if (n_missing > 0) {
    if (n_missing > 20) missing += ", ... (" + std::to_string(n_missing) + " in total)";
    fail("MissingEmbedding", "no embedding for: " + missing);
  }
  return vectors_.select_rows(rows);
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set) {
  ByteWriter w;
  w.raw(std::string_view("MEMB"));
  w.u8(kEmbeddingVersion);
  w.u32(static_cast<std::uint32_t>(set.size()));
  w.u32(static_cast<std::uint32_t>(set.dim()));
  w.str16(set.backbone_tag());
  for (std::size_t i = 0; i < set.size(); ++i) {
    w.str16(set.ids()[i]);
    for (double v : set.vectors().row(i)) w.f32(static_cast<float>(v));
  }
  return w.take();
}

namespace {

// True when n records of (str16 id, d f32) end exactly at the end of bytes.
bool records_fit(std::span<const std::uint8_t> bytes, std::size_t pos, std::uint32_t n,
                 std::size_t d) {
  for (std::uint32_t i = 0; i < n; ++i) {
    if (bytes.size() - pos < 2) return false;
    const std::size_t len = bytes[pos] | (static_cast<std::size_t>(bytes[pos + 1]) << 8);
    const std::size_t step = 2 + len + 4 * d;
    if (bytes.size() - pos < step) return false;
    pos += step;
  }
  return pos == bytes.size();
}

}  // namespace

EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ".memb");
  r.expect_magic("MEMB");
  const std::uint8_t version = r.u8();
  if (version != kEmbeddingVersion)
    r.fail_at("BadFormat", "unsupported embedding version " + std::to_string(version));
  const std::uint32_t n = r.u32();
  const std::size_t d_at = r.offset();
  const std::uint32_t d = r.u32();
  if (d == 0) fail("DimMismatch", ".memb: dimension field at byte " + std::to_string(d_at) + " is 0");
  std::string tag = r.str16();
  const std::size_t payload = r.offset();
  if (!records_fit(bytes, payload, n, d)) {
    // A payload that parses exactly under some other width means the d field
    // is wrong rather than the file being cut short.
    const std::size_t cap = n ? (bytes.size() - payload) / (4ull * n) : 0;
    for (std::size_t alt = 1; alt <= cap; ++alt)
      if (alt != d && records_fit(bytes, payload, n, alt))
        fail("DimMismatch", ".memb: dimension field at byte " + std::to_string(d_at) +
                                " says d=" + std::to_string(d) + " but the records hold " +
                                std::to_string(alt) + " values each");
  }
  r.require(static_cast<std::size_t>(n) * (2 + 4ull * d), std::to_string(n) + " embedding records");
  std::vector<std::string> ids;
  ids.reserve(n);
  Matrix vectors(n, d);
  for (std::uint32_t i = 0; i < n; ++i) {
    ids.push_back(r.str16());
    for (std::uint32_t j = 0; j < d; ++j) vectors(i, j) = r.f32();
  }
  if (!r.at_end())
    fail("DimMismatch", ".memb: " + std::to_string(r.remaining()) + " bytes left after byte " +
                            std::to_string(r.offset()) + "; the n or d field is inconsistent");
  return EmbeddingSet(std::move(ids), std::move(vectors), std::move(tag));
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  write_file_bytes(path, encode_embeddings(set));
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file_bytes(path));
}

HeadResult train_head(const EmbeddingSet& embeddings, const Corpus& corpus,
                      const SplitAssignment& split, const GradientOptions& options) {
  const Matrix X_train = embeddings.gather(split.train);
  const Matrix X_val = embeddings.gather(split.val);
  const std::vector<int> y_train = labels_of(corpus, split.train);
  const std::vector<int> y_val = labels_of(corpus, split.val);
  HeadResult result;
  result.model = std::make_unique<SoftmaxClassifier>(options);
  result.fit = result.model->fit(X_train, y_train, corpus.n_classes(),
                                 X_val.rows() ? &X_val : nullptr, y_val);
  return result;
}

}  // namespace malvis
