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

// Transfer learning with a frozen backbone: the backbone runs out of process
// and hands over its pooled features as an embedding file; only the final
// dense layer (a softmax classifier) is trained here.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "malvis/baselines.hpp"
#include "malvis/corpus.hpp"
#include "malvis/matrix.hpp"

namespace malvis {

inline constexpr std::uint8_t kEmbeddingVersion = 1;

class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  // Throws DuplicateId, DimMismatch, or NonFinite.
  EmbeddingSet(std::vector<std::string> ids, Matrix vectors, std::string backbone_tag);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return vectors_.cols(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& vectors() const { return vectors_; }
  const std::string& backbone_tag() const { return backbone_tag_; }
  // nullptr when absent.
  const std::size_t* find(const std::string& id) const;

  // Rows for the given ids, in order. Throws MissingEmbedding naming every
  // id that has no vector.
  Matrix gather(std::span<const std::string> ids) const;

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    return a.ids_ == b.ids_ && a.vectors_ == b.vectors_ && a.backbone_tag_ == b.backbone_tag_;
  }

 private:
  std::vector<std::string> ids_;
  Matrix vectors_;
  std::string backbone_tag_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ".memb": "MEMB" | version u8 | n u32 | d u32 | backbone tag (str16) |
// n records of (id str16, d f32). Values are stored as f32, so a set
// round-trips exactly when its entries are f32-representable.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set);
EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes);
void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

struct HeadResult {
  std::unique_ptr<SoftmaxClassifier> model;
  FitResult fit;
};

// Softmax head on the train embeddings, selected by validation accuracy.
HeadResult train_head(const EmbeddingSet& embeddings, const Corpus& corpus,
                      const SplitAssignment& split, const GradientOptions& options);

}  // namespace malvis
