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

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "classifier_detail.hpp"
#include "malvis/classifier.hpp"
#include "malvis/error.hpp"
#include "malvis/rng.hpp"

namespace malvis {

namespace {

constexpr std::array<std::string_view, 7> kKindNames{
    "knn", "gnb", "lda", "softmax", "linear_svm", "mlp", "smallcnn"};

}  // namespace

std::string_view kind_name(ClassifierKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

ClassifierKind kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<ClassifierKind>(i);
  throw Error(ErrorCode::kUsage, "UnknownModel", "unknown model kind \"" + std::string(name) + "\"");
}

void Classifier::check_input(const Matrix& X) const {
  if (X.cols() != input_dim())
    fail("DimMismatch", std::string(kind_name(kind())) + " expects " +
                            std::to_string(input_dim()) + " features, got " +
                            std::to_string(X.cols()));
}

void GradientClassifier::set_parameters(std::vector<double> params) {
  if (params.size() != params_.size())
    fail("DimMismatch", "parameter vector has the wrong length");
  params_ = std::move(params);
}

FitResult GradientClassifier::run_training(const Matrix& X, std::span<const int> y,
                                           const Matrix* X_val, std::span<const int> y_val) {
  if (options_.epochs < 1) fail("InvalidArgument", "epochs must be positive");
  if (options_.batch_size < 1) fail("InvalidArgument", "batch size must be positive");
  const bool has_val = X_val != nullptr && X_val->rows() > 0;
  if (has_val && y_val.size() != X_val->rows())
    fail("DimMismatch", "validation labels do not match validation rows");

  Rng rng = Rng::derive(options_.seed, 0x5eed);
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(params_.size());
  double lr = options_.learning_rate;
  double prev_loss = objective(X, y, {}, {});
  if (!std::isfinite(prev_loss)) fail_numeric("Diverged", "initial objective is not finite");

  FitResult result;
  std::vector<double> best = params_;
  double best_val = -1.0;
  for (int epoch = 1; epoch <= options_.epochs; ++epoch) {
    const std::vector<double> saved = params_;
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += options_.batch_size) {
      const std::size_t end = std::min(order.size(), start + options_.batch_size);
      const double batch_loss =
          objective(X, y, std::span(order).subspan(start, end - start), grad);
      if (!std::isfinite(batch_loss))
        fail_numeric("Diverged", "mini-batch loss became non-finite in epoch " +
                                     std::to_string(epoch));
      for (std::size_t p = 0; p < params_.size(); ++p) params_[p] -= lr * grad[p];
    }
    double loss = objective(X, y, {}, {});
    if (!std::isfinite(loss))
      fail_numeric("Diverged", "training loss became non-finite in epoch " + std::to_string(epoch));
    if (loss > prev_loss) {
      params_ = saved;
      lr *= 0.5;
      loss = prev_loss;
    }
    prev_loss = loss;

    TrainRecord rec;
    rec.epoch = epoch;
    rec.loss = loss;
    rec.train_accuracy = accuracy(predict_proba(X), y);
    rec.val_accuracy = has_val ? accuracy(predict_proba(*X_val), y_val) : rec.train_accuracy;
    result.history.push_back(rec);
    if (rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      best = params_;
      result.selected_epoch = epoch;
    }
  }
  params_ = std::move(best);
  return result;
}

}  // namespace malvis
