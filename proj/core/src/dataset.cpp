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

#include "malvis/dataset.hpp"

#include <algorithm>

#include "malvis/error.hpp"
#include "malvis/imaging.hpp"

namespace malvis {

Matrix image_matrix(const ImageStore& store, std::span<const std::string> ids, std::size_t side) {
  Matrix X(ids.size(), side * side);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const ImageRecord* rec = store.find(ids[r]);
    if (!rec) fail("MissingSample", "id \"" + ids[r] + "\" is not in the image store");
    SquareImage img = record_to_square(*rec);
    if (img.side() != side) img = resize_bilinear(img.as_gray(), side);
    std::copy(img.pixels().begin(), img.pixels().end(), X.row(r).begin());
  }
  return X;
}

std::vector<int> labels_of(const Corpus& corpus, std::span<const std::string> ids) {
  std::vector<int> y;
  y.reserve(ids.size());
  for (const auto& id : ids) y.push_back(corpus.samples[corpus.index_of(id)].label);
  return y;
}

}  // namespace malvis
