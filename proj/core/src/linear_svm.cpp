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
#include <cmath>
#include <numeric>

#include "classifier_detail.hpp"
#include "malvis/baselines.hpp"
#include "malvis/rng.hpp"

namespace malvis {

FitResult LinearSvmClassifier::fit(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                                   const Matrix* X_val, std::span<const int> y_val) {
  check_labels(y, n_classes, X.rows(), true);
  if (!X.all_finite()) fail("InvalidArgument", "svm input has non-finite entries");
  if (!(options_.lambda > 0)) fail("InvalidArgument", "svm lambda must be positive");
  if (options_.epochs < 1) fail("InvalidArgument", "epochs must be positive");
  const bool has_val = X_val != nullptr && X_val->rows() > 0;

  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  const double lambda = options_.lambda;
  const double radius = 1.0 / std::sqrt(lambda);
  weights_ = Matrix(n_classes, d + 1);

  Rng rng = Rng::derive(options_.seed, 0x5eed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  FitResult result;
  Matrix best = weights_;
  double best_val = -1.0;
  std::uint64_t t = 0;
  for (int epoch = 1; epoch <= options_.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double shrink = 1.0 - eta * lambda;
      const auto x = X.row(i);
      for (std::size_t c = 0; c < n_classes; ++c) {
        auto w = weights_.row(c);
        const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const double margin = target * (dot(w.first(d), x) + w[d]);
        for (double& v : w) v *= shrink;
        if (margin < 1.0) {
          for (std::size_t j = 0; j < d; ++j) w[j] += eta * target * x[j];
          w[d] += eta * target;
        }
        double norm = 0.0;
        for (double v : w) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > radius)
          for (double& v : w) v *= radius / norm;
      }
    }
    TrainRecord rec;
    rec.epoch = epoch;
    rec.loss = objective(X, y);
    if (!std::isfinite(rec.loss) || !weights_.all_finite())
      fail_numeric("Diverged", "svm objective became non-finite in epoch " + std::to_string(epoch));
    rec.train_accuracy = accuracy(predict_proba(X), y);
    rec.val_accuracy = has_val ? accuracy(predict_proba(*X_val), y_val) : rec.train_accuracy;
    result.history.push_back(rec);
    if (rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      best = weights_;
      result.selected_epoch = epoch;
    }
  }
  weights_ = std::move(best);
  return result;
}

double LinearSvmClassifier::objective(const Matrix& X, std::span<const int> y) const {
  const Matrix m = margins(X);
  double hinge = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
      hinge += std::max(0.0, 1.0 - target * m(i, c));
    }
  double sq = 0.0;
  for (double v : weights_.data()) sq += v * v;
  return hinge / static_cast<double>(m.rows()) + 0.5 * options_.lambda * sq;
}

Matrix LinearSvmClassifier::margins(const Matrix& X) const {
  check_input(X);
  const std::size_t d = input_dim();
  Matrix out(X.rows(), n_classes());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t c = 0; c < n_classes(); ++c) {
      const auto w = weights_.row(c);
      out(i, c) = dot(w.first(d), X.row(i)) + w[d];
    }
  return out;
}

ProbMatrix LinearSvmClassifier::predict_proba(const Matrix& X) const {
  Matrix m = margins(X);
  for (std::size_t i = 0; i < m.rows(); ++i) softmax_inplace(m.row(i));
  return ProbMatrix(std::move(m));
}

Hyperparameters LinearSvmClassifier::hyperparameters() const {
  return {{"n_classes", static_cast<double>(n_classes())},
          {"input_dim", static_cast<double>(input_dim())},
          {"lambda", options_.lambda},
          {"epochs", static_cast<double>(options_.epochs)},
          {"seed", static_cast<double>(options_.seed)}};
}

ParameterBlobs LinearSvmClassifier::parameter_blobs() const { return {weights_.storage()}; }

std::unique_ptr<LinearSvmClassifier> LinearSvmClassifier::restore(const Hyperparameters& h,
                                                                  const ParameterBlobs& b) {
  detail::expect_blobs(b, 1, "linear_svm");
  SvmOptions o;
  o.lambda = detail::hyper_value(h, "lambda");
  o.epochs = static_cast<int>(detail::hyper_value(h, "epochs"));
  o.seed = static_cast<std::uint64_t>(detail::hyper_value(h, "seed"));
  auto m = std::make_unique<LinearSvmClassifier>(o);
  m->weights_ = Matrix(detail::hyper_size(h, "n_classes"), detail::hyper_size(h, "input_dim") + 1,
                       b[0]);
  return m;
}

}  // namespace malvis
