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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "malvis/classifier.hpp"
#include "malvis/pca.hpp"

namespace malvis {

inline constexpr std::uint8_t kModelVersion = 1;

enum class InputKind { kPixels, kEmbeddings };

// A fitted classifier together with what it needs to score raw inputs: the
// optional PCA projection, the input description and the label names.
struct Model {
  std::unique_ptr<Classifier> classifier;
  std::optional<PcaModel> pca;
  InputKind input = InputKind::kPixels;
  std::size_t input_side = 0;  // pixels only; images are resized to this side
  std::vector<std::string> label_names;
  int selected_epoch = 0;      // 0 for models without a training history

  // Width of the rows predict_proba accepts.
  std::size_t raw_dim() const;
  ProbMatrix predict_proba(const Matrix& X) const;
};

// ".mmod": "MMOD" | version u8 | kind u8 | u32 length + JSON block |
// u32 blob count | per blob: u64 count + count f64 LE. The JSON block holds
// hyperparameters and metadata; PCA arrays follow the classifier blobs.
std::vector<std::uint8_t> encode_model(const Model& model);
Model decode_model(std::span<const std::uint8_t> bytes);
void write_model(const std::filesystem::path& path, const Model& model);
Model read_model(const std::filesystem::path& path);

}  // namespace malvis
