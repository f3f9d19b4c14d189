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

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "classifier_detail.hpp"
#include "malvis/baselines.hpp"

namespace malvis {

void LdaClassifier::fit(const Matrix& X, std::span<const int> y, std::size_t n_classes) {
  check_labels(y, n_classes, X.rows(), false);
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  const auto di = static_cast<Eigen::Index>(d);

  std::vector<double> counts(n_classes, 0.0);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_classes), di);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(y[i]);
    counts[static_cast<std::size_t>(c)] += 1.0;
    for (std::size_t j = 0; j < d; ++j) means(c, static_cast<Eigen::Index>(j)) += X(i, j);
  }
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (counts[c] > 0) {
      means.row(static_cast<Eigen::Index>(c)) /= counts[c];
      ++present;
    }
  }

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), di);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          X(i, j) - means(y[i], static_cast<Eigen::Index>(j));
  const double dof = n > present ? static_cast<double>(n - present) : static_cast<double>(n);
  Eigen::MatrixXd cov = (centered.transpose() * centered) / dof;
  const double trace = cov.trace();
  const double ridge = trace > 0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6;
  cov.diagonal().array() += ridge;

  const Eigen::LDLT<Eigen::MatrixXd> solver(cov);
  const Eigen::MatrixXd coef = solver.solve(means.transpose()).transpose();  // c x d

  coef_ = Matrix(n_classes, d);
  intercepts_.assign(n_classes, 0.0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    if (counts[c] == 0) {
      intercepts_[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) coef_(c, j) = coef(ci, static_cast<Eigen::Index>(j));
    intercepts_[c] = -0.5 * coef.row(ci).dot(means.row(ci)) +
                     std::log(counts[c] / static_cast<double>(n));
  }
}

Matrix LdaClassifier::discriminants(const Matrix& X) const {
  check_input(X);
  Matrix out(X.rows(), intercepts_.size());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t c = 0; c < intercepts_.size(); ++c)
      out(i, c) = std::isfinite(intercepts_[c]) ? dot(coef_.row(c), X.row(i)) + intercepts_[c]
                                                : intercepts_[c];
  return out;
}

ProbMatrix LdaClassifier::predict_proba(const Matrix& X) const {
  Matrix scores = discriminants(X);
  for (std::size_t i = 0; i < scores.rows(); ++i) softmax_inplace(scores.row(i));
  return ProbMatrix(std::move(scores));
}

Hyperparameters LdaClassifier::hyperparameters() const {
  return {{"n_classes", static_cast<double>(intercepts_.size())},
          {"input_dim", static_cast<double>(coef_.cols())}};
}

ParameterBlobs LdaClassifier::parameter_blobs() const { return {coef_.storage(), intercepts_}; }

std::unique_ptr<LdaClassifier> LdaClassifier::restore(const Hyperparameters& h,
                                                      const ParameterBlobs& b) {
  detail::expect_blobs(b, 2, "lda");
  const std::size_t c = detail::hyper_size(h, "n_classes");
  const std::size_t d = detail::hyper_size(h, "input_dim");
  detail::expect_blob_size(b[1], c, "lda intercepts");
  auto m = std::make_unique<LdaClassifier>();
  m->coef_ = Matrix(c, d, b[0]);
  m->intercepts_ = b[1];
  return m;
}

}  // namespace malvis
