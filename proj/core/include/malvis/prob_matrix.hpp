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
#include <span>
#include <vector>

#include "malvis/matrix.hpp"

namespace malvis {

// n x c row-stochastic matrix of class probabilities.
class ProbMatrix {
 public:
  static constexpr double kRowTolerance = 1e-9;

  ProbMatrix() = default;
  // Throws InvalidProbabilities unless every entry is in [0,1] and every row
  // sums to 1 within kRowTolerance.
  explicit ProbMatrix(Matrix probs);

  static ProbMatrix uniform(std::size_t n, std::size_t c);

  std::size_t n() const { return probs_.rows(); }
  std::size_t c() const { return probs_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return probs_(i, j); }
  std::span<const double> row(std::size_t i) const { return probs_.row(i); }
  const Matrix& matrix() const { return probs_; }

  // argmax per row, ties to the lowest class index.
  std::vector<int> predictions() const;
  std::vector<double> column(std::size_t j) const;

  friend bool operator==(const ProbMatrix&, const ProbMatrix&) = default;

 private:
  Matrix probs_;
};

// In-place softmax using the log-sum-exp shift.
void softmax_inplace(std::span<double> scores);

// ".mprob": "MPRB" | n u32 | c u32 | n*c f32, row-major, little-endian.
std::vector<std::uint8_t> encode_probs(const ProbMatrix& p);
// Entries must be in [0,1] and rows must sum to 1 within f32 precision;
// rows are renormalized in double after loading.
ProbMatrix decode_probs(std::span<const std::uint8_t> bytes);
void write_probs(const std::filesystem::path& path, const ProbMatrix& p);
ProbMatrix read_probs(const std::filesystem::path& path);

}  // namespace malvis
