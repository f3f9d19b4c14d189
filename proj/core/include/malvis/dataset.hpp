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
#include <span>
#include <string>
#include <vector>

#include "malvis/corpus.hpp"
#include "malvis/image_store.hpp"
#include "malvis/matrix.hpp"

namespace malvis {

// Flattened channel-0 pixels of the given records, one row per id. Records
// whose side differs from `side` are resized bilinearly. Throws
// MissingSample for ids absent from the store.
Matrix image_matrix(const ImageStore& store, std::span<const std::string> ids, std::size_t side);

// Label index of every id. Throws MissingSample.
std::vector<int> labels_of(const Corpus& corpus, std::span<const std::string> ids);

}  // namespace malvis
