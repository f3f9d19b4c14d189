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

// Internal helpers shared by the classifier implementations.

#include <cmath>
#include <cstddef>
#include <string>

#include "malvis/classifier.hpp"
#include "malvis/error.hpp"

namespace malvis::detail {

inline double hyper_value(const Hyperparameters& h, const std::string& key) {
  auto it = h.find(key);
  if (it == h.end()) fail("BadFormat", "model hyperparameter \"" + key + "\" missing");
  return it->second;
}

inline std::size_t hyper_size(const Hyperparameters& h, const std::string& key) {
  const double v = hyper_value(h, key);
  if (!(v >= 0) || v != std::floor(v)) fail("BadFormat", "hyperparameter " + key + " not a count");
  return static_cast<std::size_t>(v);
}

inline void expect_blobs(const ParameterBlobs& b, std::size_t count, const char* what) {
  if (b.size() != count)
    fail("BadFormat", std::string(what) + ": expected " + std::to_string(count) +
                          " parameter blobs, got " + std::to_string(b.size()));
}

inline void expect_blob_size(const std::vector<double>& blob, std::size_t n, const char* what) {
  if (blob.size() != n)
    fail("DimMismatch", std::string(what) + ": blob has " + std::to_string(blob.size()) +
                            " values, expected " + std::to_string(n));
}

}  // namespace malvis::detail
