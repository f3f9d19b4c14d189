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
#include <vector>

#include "malvis/matrix.hpp"

namespace malvis {

enum class PcaMethod {
  kAuto,        // Gram when d > n, covariance otherwise
  kGram,        // eigendecomposition of the n x n Gram matrix
  kCovariance,  // eigendecomposition of the d x d covariance matrix
};

// Principal components of the sample covariance (n - 1 denominator).
// Invariants: component rows are orthonormal, explained_variance is
// nonincreasing, and each component's largest-magnitude entry is positive.
struct PcaModel {
  std::vector<double> mean;
  Matrix components;  // k x d
  std::vector<double> explained_variance;
  double total_variance = 0.0;
  // Set when fewer than the requested components carry nonzero variance;
  // only the numerically nonzero ones are kept.
  bool rank_deficient = false;

  std::size_t k() const { return components.rows(); }
  std::size_t dim() const { return mean.size(); }
};

// Requires n >= 2 and 1 <= k <= min(n - 1, d).
PcaModel pca_fit(const Matrix& X, std::size_t k, PcaMethod method = PcaMethod::kAuto);

// (X - mean) * components^T. Throws DimMismatch.
Matrix pca_transform(const PcaModel& model, const Matrix& X);
Matrix pca_inverse_transform(const PcaModel& model, const Matrix& Z);

// Explained-variance ratios of the retained components.
std::vector<double> scree(const PcaModel& model);

}  // namespace malvis
