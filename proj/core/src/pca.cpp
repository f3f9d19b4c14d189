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

#include "malvis/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "malvis/error.hpp"

namespace malvis {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

PcaModel pca_fit(const Matrix& X, std::size_t k, PcaMethod method) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (n < 2) fail("InvalidArgument", "PCA needs at least two samples");
  if (k < 1 || k > std::min(n - 1, d))
    fail("InvalidArgument", "PCA k must lie in [1, min(n-1, d)], got " + std::to_string(k));
  if (!X.all_finite()) fail("InvalidArgument", "PCA input has non-finite entries");

  const auto x = view(X);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMajor xc = x.rowwise() - mean;
  const double denom = static_cast<double>(n - 1);

  if (method == PcaMethod::kAuto) method = d > n ? PcaMethod::kGram : PcaMethod::kCovariance;

  // Eigenpairs sorted by descending eigenvalue; columns of `vecs` are the
  // unit principal directions in feature space.
  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  if (method == PcaMethod::kCovariance) {
    const Eigen::MatrixXd cov = (xc.transpose() * xc) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    vals = es.eigenvalues().reverse();
    vecs = es.eigenvectors().rowwise().reverse();
  } else {
    const Eigen::MatrixXd gram = xc * xc.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    vals = es.eigenvalues().reverse() / denom;
    const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    const Eigen::Index take = static_cast<Eigen::Index>(std::min(k, n));
    vecs.resize(static_cast<Eigen::Index>(d), take);
    for (Eigen::Index j = 0; j < take; ++j) {
      const double g = vals(j) * denom;
      if (g > 0) {
        vecs.col(j) = xc.transpose() * u.col(j) / std::sqrt(g);
      } else {
        vecs.col(j).setZero();
      }
    }
  }

  const double total = xc.squaredNorm() / denom;
  const double top = std::max(vals(0), 0.0);
  // Numerical rank cut-off relative to the dominant eigenvalue.
  const double tol = std::max(top * 1e-10, 1e-300);

  PcaModel model;
  model.mean.assign(mean.data(), mean.data() + d);
  model.total_variance = total;
  std::size_t kept = 0;
  while (kept < k && vals(static_cast<Eigen::Index>(kept)) > tol) ++kept;
  model.rank_deficient = kept < k;
  model.components = Matrix(kept, d);
  for (std::size_t j = 0; j < kept; ++j) {
    const auto col = vecs.col(static_cast<Eigen::Index>(j));
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < col.size(); ++i)
      if (std::abs(col(i)) > std::abs(col(pivot))) pivot = i;
    const double sign = col(pivot) < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < d; ++i)
      model.components(j, i) = sign * col(static_cast<Eigen::Index>(i));
    model.explained_variance.push_back(vals(static_cast<Eigen::Index>(j)));
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& X) {
  if (X.cols() != model.dim())
    fail("DimMismatch", "PCA expects " + std::to_string(model.dim()) + " columns, got " +
                            std::to_string(X.cols()));
  Matrix out(X.rows(), model.k());
  if (model.k() == 0) return out;
  const auto x = view(X);
  const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(),
                                                  static_cast<Eigen::Index>(model.dim()));
  Eigen::Map<RowMajor> z(out.data().data(), static_cast<Eigen::Index>(out.rows()),
                         static_cast<Eigen::Index>(out.cols()));
  z.noalias() = (x.rowwise() - mean) * view(model.components).transpose();
  return out;
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& Z) {
  if (Z.cols() != model.k()) fail("DimMismatch", "PCA inverse expects k columns");
  Matrix out(Z.rows(), model.dim());
  const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(),
                                                  static_cast<Eigen::Index>(model.dim()));
  Eigen::Map<RowMajor> x(out.data().data(), static_cast<Eigen::Index>(out.rows()),
                         static_cast<Eigen::Index>(out.cols()));
  if (model.k() == 0) {
    x.rowwise() = mean;
  } else {
    x = (view(Z) * view(model.components)).rowwise() + mean;
  }
  return out;
}

std::vector<double> scree(const PcaModel& model) {
  std::vector<double> ratios;
  for (double v : model.explained_variance)
    ratios.push_back(model.total_variance > 0 ? v / model.total_variance : 0.0);
  return ratios;
}

}  // namespace malvis
