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

// Convex combination alpha * P1 + (1 - alpha) * P2 of two models' outputs,
// with alpha picked by exhaustive grid search against a chosen metric.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "malvis/prob_matrix.hpp"

namespace malvis {

enum class EnsembleMetric { kAccuracy, kAvgTpr, kF1, kAuc, kNegAvgFpr };

std::string_view metric_name(EnsembleMetric metric);
// Throws UnknownMetric.
EnsembleMetric metric_from_name(std::string_view name);

// Throws ShapeMismatch, or InvalidArgument for alpha outside [0, 1].
ProbMatrix combine(const ProbMatrix& p1, const ProbMatrix& p2, double alpha);

// Value of the metric for the given predictions (larger is better). F1 and
// AUC take class 1 as positive and require two classes.
double metric_value(EnsembleMetric metric, const ProbMatrix& probs, std::span<const int> y_true);

struct AlphaPoint {
  double alpha;
  double value;

  friend bool operator==(const AlphaPoint&, const AlphaPoint&) = default;
};

struct CombinationResult {
  double alpha = 0.0;
  double objective_value = 0.0;
  std::string metric_name;
  double grid_step = 0.01;
  std::vector<AlphaPoint> curve;  // in grid order
};

// Grid alpha_i = i * step for i = 0 .. ceil(1 / step) - 1, plus alpha = 1.
// Ties go to the smallest alpha.
CombinationResult optimize_alpha(const ProbMatrix& p1, const ProbMatrix& p2,
                                 std::span<const int> y_true, EnsembleMetric metric,
                                 double grid_step = 0.01, std::size_t threads = 1);

std::string combination_to_json(const CombinationResult& result);
// "alpha,value"
std::string alpha_curve_csv(const CombinationResult& result);

}  // namespace malvis
