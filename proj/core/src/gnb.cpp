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

#include <cmath>
#include <limits>
#include <numbers>

#include "classifier_detail.hpp"
#include "malvis/baselines.hpp"

namespace malvis {

void GaussianNbClassifier::fit(const Matrix& X, std::span<const int> y, std::size_t n_classes) {
  check_labels(y, n_classes, X.rows(), false);
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();

  std::vector<double> counts(n_classes, 0.0);
  means_ = Matrix(n_classes, d);
  variances_ = Matrix(n_classes, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    counts[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) means_(c, j) += X(i, j);
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (counts[c] > 0)
      for (std::size_t j = 0; j < d; ++j) means_(c, j) /= counts[c];
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double r = X(i, j) - means_(c, j);
      variances_(c, j) += r * r;
    }
  }

  // Largest per-feature variance over the whole training set.
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += X(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (X(i, j) - mean) * (X(i, j) - mean);
    max_var = std::max(max_var, var / static_cast<double>(n));
  }
  epsilon_ = max_var > 0 ? 1e-9 * max_var : 1e-9;

  priors_.assign(n_classes, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    priors_[c] = counts[c] / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      if (counts[c] > 0) variances_(c, j) /= counts[c];
      variances_(c, j) += epsilon_;
    }
  }
}

ProbMatrix GaussianNbClassifier::predict_proba(const Matrix& X) const {
  check_input(X);
  const std::size_t c_count = priors_.size();
  Matrix probs(X.rows(), c_count);
  std::vector<double> scores(c_count);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t c = 0; c < c_count; ++c) {
      if (priors_[c] <= 0) {
        scores[c] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double s = std::log(priors_[c]);
      for (std::size_t j = 0; j < X.cols(); ++j) {
        const double v = variances_(c, j);
        const double r = X(i, j) - means_(c, j);
        s -= 0.5 * (std::log(2.0 * std::numbers::pi * v) + r * r / v);
      }
      scores[c] = s;
    }
    softmax_inplace(scores);
    std::copy(scores.begin(), scores.end(), probs.row(i).begin());
  }
  return ProbMatrix(std::move(probs));
}

Hyperparameters GaussianNbClassifier::hyperparameters() const {
  return {{"n_classes", static_cast<double>(priors_.size())},
          {"input_dim", static_cast<double>(means_.cols())},
          {"epsilon", epsilon_}};
}

ParameterBlobs GaussianNbClassifier::parameter_blobs() const {
  return {priors_, means_.storage(), variances_.storage()};
}

std::unique_ptr<GaussianNbClassifier> GaussianNbClassifier::restore(const Hyperparameters& h,
                                                                    const ParameterBlobs& b) {
  detail::expect_blobs(b, 3, "gnb");
  const std::size_t c = detail::hyper_size(h, "n_classes");
  const std::size_t d = detail::hyper_size(h, "input_dim");
  detail::expect_blob_size(b[0], c, "gnb priors");
  auto m = std::make_unique<GaussianNbClassifier>();
  m->priors_ = b[0];
  m->means_ = Matrix(c, d, b[1]);
  m->variances_ = Matrix(c, d, b[2]);
  m->epsilon_ = detail::hyper_value(h, "epsilon");
  return m;
}

}  // namespace malvis
