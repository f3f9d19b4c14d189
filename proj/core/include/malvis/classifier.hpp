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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "malvis/matrix.hpp"
#include "malvis/prob_matrix.hpp"
#include "malvis/training.hpp"

namespace malvis {

// Numeric values are the kind tags stored in ".mmod" files.
enum class ClassifierKind : std::uint8_t {
  kKnn = 0,
  kGnb = 1,
  kLda = 2,
  kSoftmax = 3,
  kLinearSvm = 4,
  kMlp = 5,
  kSmallCnn = 6,
};

std::string_view kind_name(ClassifierKind kind);
// Accepts the names printed by kind_name ("knn", "linear_svm", ...).
ClassifierKind kind_from_name(std::string_view name);

using Hyperparameters = std::map<std::string, double>;
using ParameterBlobs = std::vector<std::vector<double>>;

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ClassifierKind kind() const = 0;
  virtual std::size_t n_classes() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual ProbMatrix predict_proba(const Matrix& X) const = 0;

  // Everything needed to rebuild the fitted model: hyperparameters plus
  // structural sizes, and the learned parameters as flat f64 blobs.
  virtual Hyperparameters hyperparameters() const = 0;
  virtual ParameterBlobs parameter_blobs() const = 0;

 protected:
  void check_input(const Matrix& X) const;
};

// Rebuilds a fitted classifier from what hyperparameters() and
// parameter_blobs() produced.
std::unique_ptr<Classifier> restore_classifier(ClassifierKind kind, const Hyperparameters& hyper,
                                               const ParameterBlobs& blobs);

// Options for the mini-batch gradient loop shared by softmax and MLP.
struct GradientOptions {
  int epochs = 25;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

// A classifier whose parameters live in one flat vector and whose training
// objective is mean cross-entropy plus an L2 penalty.
//
// Training runs plain mini-batch gradient descent. After every epoch the full
// training objective is recomputed; if it went up the epoch is rolled back
// and the learning rate halved, so the recorded loss never increases. The
// parameters returned are those of the epoch with the best validation
// accuracy (earliest on ties). Without validation data the training accuracy
// stands in for it.
class GradientClassifier : public Classifier {
 public:
  std::span<const double> parameters() const { return params_; }
  void set_parameters(std::vector<double> params);

  // Objective over the given rows (all rows when empty). When grad is
  // nonempty it receives the gradient, same layout as parameters().
  virtual double objective(const Matrix& X, std::span<const int> y,
                           std::span<const std::size_t> rows, std::span<double> grad) const = 0;

  const GradientOptions& options() const { return options_; }

 protected:
  explicit GradientClassifier(GradientOptions options) : options_(options) {}

  FitResult run_training(const Matrix& X, std::span<const int> y, const Matrix* X_val,
                         std::span<const int> y_val);

  GradientOptions options_;
  std::vector<double> params_;
};

}  // namespace malvis
