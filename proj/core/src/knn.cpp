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
#include <utility>

#include "classifier_detail.hpp"
#include "malvis/baselines.hpp"
#include "malvis/parallel.hpp"

namespace malvis {

void KnnClassifier::fit(const Matrix& X, std::span<const int> y, std::size_t n_classes) {
  check_labels(y, n_classes, X.rows(), false);
  if (k_ < 1) fail("InvalidArgument", "k must be positive");
  if (k_ > X.rows())
    fail("KTooLarge", "k = " + std::to_string(k_) + " exceeds " + std::to_string(X.rows()) +
                          " training samples");
  X_ = X;
  y_.assign(y.begin(), y.end());
  n_classes_ = n_classes;
}

std::vector<std::size_t> KnnClassifier::neighbors(std::span<const double> query) const {
  std::vector<std::pair<double, std::size_t>> d(X_.rows());
  for (std::size_t i = 0; i < X_.rows(); ++i) d[i] = {squared_distance(query, X_.row(i)), i};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_), d.end());
  std::vector<std::size_t> out(k_);
  for (std::size_t i = 0; i < k_; ++i) out[i] = d[i].second;
  return out;
}

ProbMatrix KnnClassifier::predict_proba(const Matrix& X) const {
  check_input(X);
  Matrix probs(X.rows(), n_classes_);
  parallel_for(X.rows(), threads, [&](std::size_t q) {
    for (std::size_t idx : neighbors(X.row(q)))
      probs(q, static_cast<std::size_t>(y_[idx])) += 1.0;
    for (double& v : probs.row(q)) v /= static_cast<double>(k_);
  });
  return ProbMatrix(std::move(probs));
}

Hyperparameters KnnClassifier::hyperparameters() const {
  return {{"k", static_cast<double>(k_)},
          {"n_classes", static_cast<double>(n_classes_)},
          {"input_dim", static_cast<double>(X_.cols())},
          {"n_train", static_cast<double>(X_.rows())}};
}

ParameterBlobs KnnClassifier::parameter_blobs() const {
  return {X_.storage(), std::vector<double>(y_.begin(), y_.end())};
}

std::unique_ptr<KnnClassifier> KnnClassifier::restore(const Hyperparameters& h,
                                                      const ParameterBlobs& b) {
  detail::expect_blobs(b, 2, "knn");
  const std::size_t n = detail::hyper_size(h, "n_train");
  const std::size_t d = detail::hyper_size(h, "input_dim");
  detail::expect_blob_size(b[0], n * d, "knn training matrix");
  detail::expect_blob_size(b[1], n, "knn labels");
  auto m = std::make_unique<KnnClassifier>(detail::hyper_size(h, "k"));
  std::vector<int> y(b[1].begin(), b[1].end());
  m->fit(Matrix(n, d, b[0]), y, detail::hyper_size(h, "n_classes"));
  return m;
}

}  // namespace malvis
