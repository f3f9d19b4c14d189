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
#include <memory>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "malvis/baselines.hpp"
#include "malvis/error.hpp"
#include "malvis/model_io.hpp"
#include "malvis/pca.hpp"
#include "oracles.hpp"

using namespace malvis;

namespace {

struct Blobs {
  Matrix X;
  std::vector<int> y;
};

// Gaussian clusters around random centres.
Blobs blobs(std::size_t per_class, std::size_t classes, std::size_t d, double spread, Rng& rng) {
  Blobs b{Matrix(per_class * classes, d), {}};
  Matrix centres = oracle::random_matrix(classes, d, rng, -3, 3);
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = c * per_class + i;
      for (std::size_t j = 0; j < d; ++j) b.X(r, j) = centres(c, j) + spread * rng.normal();
      b.y.push_back(static_cast<int>(c));
    }
  return b;
}

void check_stochastic(const ProbMatrix& p) {
  for (std::size_t i = 0; i < p.n(); ++i) {
    double s = 0.0;
    for (double v : p.row(i)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(std::isfinite(v));
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
}

// Dense inverse by Gauss-Jordan with partial pivoting.
oracle::Dense2 inverse(oracle::Dense2 a) {
  const std::size_t n = a.size();
  oracle::Dense2 inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    const double d = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= d;
      inv[col][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

std::unique_ptr<Classifier> round_trip(const Classifier& c) {
  Model m;
  m.classifier = restore_classifier(c.kind(), c.hyperparameters(), c.parameter_blobs());
  m.input_side = 0;
  m.label_names.resize(c.n_classes(), "x");
  const auto bytes = encode_model(m);
  Model back = decode_model(bytes);
  CHECK(encode_model(back) == bytes);
  return std::move(back.classifier);
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("knn examples") {
    KnnClassifier one(1);
    one.fit(Matrix{{0.5, 0.5}}, std::vector<int>{1}, 2);
    CHECK(one.predict_proba(Matrix{{9, -4}})(0, 1) == 1.0);

    KnnClassifier two(2);
    two.fit(Matrix{{-1, 0}, {1, 0}}, std::vector<int>{0, 1}, 2);
    const ProbMatrix p = two.predict_proba(Matrix{{0, 0}});
    CHECK(p(0, 0) == 0.5);
    CHECK(p(0, 1) == 0.5);

    KnnClassifier big(3);
    try {
      big.fit(Matrix{{0}, {1}}, std::vector<int>{0, 1}, 2);
      FAIL("k larger than n accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == "KTooLarge");
    }
  }

  TEST_CASE("knn matches the exhaustive scan on a 20-point set") {
    Rng rng(20);
    const Blobs b = blobs(10, 2, 3, 1.5, rng);
    KnnClassifier knn(5);
    knn.fit(b.X, b.y, 2);
    const Matrix Q = oracle::random_matrix(30, 3, rng, -4, 4);
    const ProbMatrix p = knn.predict_proba(Q);
    for (std::size_t q = 0; q < Q.rows(); ++q) {
      CHECK(knn.neighbors(Q.row(q)) == oracle::brute_neighbors(b.X, Q.row(q), 5));
      const auto ref = oracle::brute_knn_proba(b.X, b.y, 2, 5, Q.row(q));
      CHECK(std::ranges::equal(ref, p.row(q)));
    }
  }

  TEST_CASE("knn distance ties go to the lower index") {
    KnnClassifier knn(1);
    knn.fit(Matrix{{1, 0}, {-1, 0}, {0, 1}}, std::vector<int>{1, 0, 0}, 2);
    CHECK(knn.neighbors(std::vector<double>{0, 0}) == std::vector<std::size_t>{0});
  }

  TEST_CASE("gaussian naive bayes") {
    GaussianNbClassifier sym;
    sym.fit(Matrix{{-1, 0}, {-1.5, 1}, {1, 0}, {1.5, 1}}, std::vector<int>{0, 0, 1, 1}, 2);
    const ProbMatrix mid = sym.predict_proba(Matrix{{0, 0.5}});
    CHECK(mid(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(4);
    const Blobs b = blobs(30, 3, 4, 0.3, rng);
    GaussianNbClassifier g;
    g.fit(b.X, b.y, 3);
    for (std::size_t c = 0; c < 3; ++c) {
      // the first sample of each class sits near its centre
      Matrix q(1, 4);
      for (std::size_t j = 0; j < 4; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < 30; ++i) m += b.X(c * 30 + i, j) / 30.0;
        q(0, j) = m;
      }
      CHECK(g.predict_proba(q)(0, c) > 0.99);
    }

    // Direct density ratio on one query.
    const Matrix q = oracle::random_matrix(1, 4, rng, -2, 2);
    std::vector<double> logp(3);
    for (std::size_t c = 0; c < 3; ++c) {
      double lp = std::log(1.0 / 3.0);
      for (std::size_t j = 0; j < 4; ++j) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < 30; ++i) m += b.X(c * 30 + i, j) / 30.0;
        for (std::size_t i = 0; i < 30; ++i) v += std::pow(b.X(c * 30 + i, j) - m, 2) / 30.0;
        v += g.epsilon();
        lp += -0.5 * std::log(2 * std::numbers::pi * v) - std::pow(q(0, j) - m, 2) / (2 * v);
      }
      logp[c] = lp;
    }
    const double top = *std::ranges::max_element(logp);
    double z = 0.0;
    for (double& v : logp) z += (v = std::exp(v - top));
    const ProbMatrix p = g.predict_proba(q);
    for (std::size_t c = 0; c < 3; ++c) CHECK(p(0, c) == doctest::Approx(logp[c] / z).epsilon(1e-9));

    // A constant feature in both classes.
    GaussianNbClassifier flat;
    flat.fit(Matrix{{1, 0}, {1, 0.2}, {1, 3}, {1, 3.1}}, std::vector<int>{0, 0, 1, 1}, 2);
    check_stochastic(flat.predict_proba(Matrix{{1, 0.1}, {2, 5}}));
  }

  TEST_CASE("lda") {
    LdaClassifier sym;
    sym.fit(Matrix{{-1, 0}, {-1, 1}, {1, 0}, {1, 1}}, std::vector<int>{0, 0, 1, 1}, 2);
    CHECK(sym.predict_proba(Matrix{{0, 0.5}})(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    // log-ratio affine along a line
    Rng rng(12);
    const Blobs b = blobs(15, 3, 3, 1.0, rng);
    LdaClassifier lda;
    lda.fit(b.X, b.y, 3);
    const Matrix line{{0, 0, 0}, {1, 2, -1}, {2, 4, -2}};
    const ProbMatrix pl = lda.predict_proba(line);
    std::vector<double> lr;
    for (std::size_t i = 0; i < 3; ++i) lr.push_back(std::log(pl(i, 0) / pl(i, 1)));
    CHECK(lr[2] - lr[1] == doctest::Approx(lr[1] - lr[0]).epsilon(1e-9));

    // Hand-rolled shared-covariance posteriors.
    const std::size_t n = b.X.rows(), d = 3;
    oracle::Dense2 means(3, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) means[b.y[i]][j] += b.X(i, j) / 15.0;
    oracle::Dense2 cov(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c)
          cov[a][c] += (b.X(i, a) - means[b.y[i]][a]) * (b.X(i, c) - means[b.y[i]][c]) /
                       static_cast<double>(n - 3);
    double trace = 0.0;
    for (std::size_t a = 0; a < d; ++a) trace += cov[a][a];
    for (std::size_t a = 0; a < d; ++a) cov[a][a] += 1e-6 * trace / d;
    const auto inv = inverse(cov);
    const Matrix Q = oracle::random_matrix(10, 3, rng, -3, 3);
    const ProbMatrix p = lda.predict_proba(Q);
    for (std::size_t q = 0; q < Q.rows(); ++q) {
      std::vector<double> lp(3);
      for (std::size_t c = 0; c < 3; ++c) {
        double quad = 0.0;
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t e = 0; e < d; ++e)
            quad += (Q(q, a) - means[c][a]) * inv[a][e] * (Q(q, e) - means[c][e]);
        lp[c] = std::log(1.0 / 3.0) - 0.5 * quad;
      }
      const double top = *std::ranges::max_element(lp);
      double z = 0.0;
      for (double& v : lp) z += (v = std::exp(v - top));
      for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(p(q, c) - lp[c] / z) < 1e-8);
    }
  }

  TEST_CASE("softmax regression") {
    SoftmaxClassifier fresh;
    fresh.initialize(3, 4);
    const ProbMatrix u = fresh.predict_proba(Matrix{{1, 2, 3}});
    for (std::size_t c = 0; c < 4; ++c) CHECK(u(0, c) == 0.25);

    Rng rng(30);
    Blobs b{Matrix(40, 2), {}};
    for (std::size_t i = 0; i < 40; ++i) {
      const double c = i < 20 ? -2.0 : 2.0;
      b.X(i, 0) = c + 0.3 * rng.normal();
      b.X(i, 1) = c + 0.3 * rng.normal();
      b.y.push_back(i < 20 ? 0 : 1);
    }
    GradientOptions o;
    o.epochs = 30;
    SoftmaxClassifier s(o);
    const FitResult fit = s.fit(b.X, b.y, 2);
    CHECK(accuracy(s.predict_proba(b.X), b.y) == 1.0);
    for (std::size_t e = 1; e < fit.history.size(); ++e)
      CHECK(fit.history[e].loss <= fit.history[e - 1].loss);

    SoftmaxClassifier again(o);
    again.fit(b.X, b.y, 2);
    CHECK(std::ranges::equal(again.parameters(), s.parameters()));
  }

  TEST_CASE("softmax gradient matches finite differences") {
    Rng rng(31);
    const Matrix X = oracle::random_matrix(12, 5, rng);
    std::vector<int> y(12);
    for (int& v : y) v = static_cast<int>(rng.below(3));
    GradientOptions o;
    o.l2 = 1e-2;
    for (int point = 0; point < 10; ++point) {
      SoftmaxClassifier s(o);
      s.initialize(5, 3);
      std::vector<double> params(s.parameters().size());
      for (double& p : params) p = rng.uniform(-2, 2);
      s.set_parameters(params);
      std::vector<double> g(params.size());
      s.objective(X, y, {}, g);
      auto f = [&](std::span<const double> p) {
        SoftmaxClassifier t(o);
        t.initialize(5, 3);
        t.set_parameters({p.begin(), p.end()});
        return t.objective(X, y, {}, {});
      };
      for (std::size_t i = 0; i < params.size(); ++i)
        CHECK(oracle::rel_error(g[i], oracle::central_diff(f, params, i)) < 1e-6);
    }
  }

  TEST_CASE("linear svm") {
    Rng rng(40);
    const Blobs b = blobs(25, 2, 2, 0.3, rng);
    LinearSvmClassifier svm;
    svm.fit(b.X, b.y, 2);
    CHECK(accuracy(svm.predict_proba(b.X), b.y) == 1.0);

    std::vector<int> flipped(b.y);
    for (int& v : flipped) v = 1 - v;
    LinearSvmClassifier flip;
    flip.fit(b.X, flipped, 2);
    const Matrix m1 = svm.margins(b.X), m2 = flip.margins(b.X);
    for (std::size_t i = 0; i < b.X.rows(); ++i) {
      const bool first = m1(i, 1) > m1(i, 0);
      const bool second = m2(i, 1) > m2(i, 0);
      CHECK(first != second);
    }

    LinearSvmClassifier single;
    try {
      single.fit(b.X, std::vector<int>(b.y.size(), 0), 2);
      FAIL("single class accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == "InvalidLabels");
    }
  }

  TEST_CASE("mlp") {
    MlpOptions mo;
    mo.hidden = 4;
    MlpClassifier zero(mo);
    zero.initialize(2, 3);
    zero.set_parameters(std::vector<double>(zero.parameters().size(), 0.0));
    const ProbMatrix u = zero.predict_proba(Matrix{{0.3, -2}});
    for (std::size_t c = 0; c < 3; ++c) CHECK(u(0, c) == doctest::Approx(1.0 / 3.0));

    Rng rng(50);
    for (int point = 0; point < 10; ++point) {
      MlpOptions go;
      go.hidden = 6;
      go.gradient.l2 = 1e-3;
      MlpClassifier m(go);
      m.initialize(4, 3);
      std::vector<double> params(m.parameters().size());
      for (double& p : params) p = rng.uniform(-1, 1);
      m.set_parameters(params);
      const Matrix X = oracle::random_matrix(10, 4, rng);
      std::vector<int> y(10);
      for (int& v : y) v = static_cast<int>(rng.below(3));
      std::vector<double> g(params.size());
      m.objective(X, y, {}, g);
      auto f = [&](std::span<const double> p) {
        MlpClassifier t(go);
        t.initialize(4, 3);
        t.set_parameters({p.begin(), p.end()});
        return t.objective(X, y, {}, {});
      };
      for (std::size_t i = 0; i < params.size(); ++i)
        CHECK(oracle::rel_error(g[i], oracle::central_diff(f, params, i)) < 1e-5);
    }
  }

  TEST_CASE("mlp learns xor") {
    Matrix X(200, 2);
    std::vector<int> y(200);
    Rng rng(60);
    for (std::size_t i = 0; i < 200; ++i) {
      const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
      X(i, 0) = (a ? 1.0 : -1.0) + 0.1 * rng.normal();
      X(i, 1) = (b ? 1.0 : -1.0) + 0.1 * rng.normal();
      y[i] = a ^ b;
    }
    MlpOptions mo;
    mo.hidden = 8;
    mo.gradient.epochs = 200;
    mo.gradient.learning_rate = 0.2;
    mo.gradient.seed = 3;
    MlpClassifier m(mo);
    m.fit(X, y, 2);
    CHECK(accuracy(m.predict_proba(X), y) == 1.0);
  }

  TEST_CASE("outputs are row-stochastic and round trip through model files") {
    Rng rng(70);
    const Blobs b = blobs(12, 3, 5, 1.0, rng);
    const Matrix Q = oracle::random_matrix(15, 5, rng, -4, 4);
    GradientOptions go;
    go.epochs = 5;
    std::vector<std::unique_ptr<Classifier>> models;
    {
      auto k = std::make_unique<KnnClassifier>(4);
      k->fit(b.X, b.y, 3);
      models.push_back(std::move(k));
      auto g = std::make_unique<GaussianNbClassifier>();
      g->fit(b.X, b.y, 3);
      models.push_back(std::move(g));
      auto l = std::make_unique<LdaClassifier>();
      l->fit(b.X, b.y, 3);
      models.push_back(std::move(l));
      auto s = std::make_unique<SoftmaxClassifier>(go);
      s->fit(b.X, b.y, 3);
      models.push_back(std::move(s));
      auto v = std::make_unique<LinearSvmClassifier>(SvmOptions{1e-3, 5, 1});
      v->fit(b.X, b.y, 3);
      models.push_back(std::move(v));
      auto m = std::make_unique<MlpClassifier>(MlpOptions{16, go});
      m->fit(b.X, b.y, 3);
      models.push_back(std::move(m));
    }
    for (const auto& m : models) {
      CAPTURE(kind_name(m->kind()));
      const ProbMatrix p = m->predict_proba(Q);
      check_stochastic(p);
      CHECK(round_trip(*m)->predict_proba(Q) == p);
      CHECK_THROWS_AS(m->predict_proba(Matrix(2, 4)), Error);
    }
    CHECK_THROWS_AS(kind_from_name("forest"), Error);
    CHECK(kind_from_name("linear_svm") == ClassifierKind::kLinearSvm);
  }

  TEST_CASE("model file with pca") {
    Rng rng(71);
    const Blobs b = blobs(10, 2, 8, 1.0, rng);
    Model m;
    m.pca = pca_fit(b.X, 3);
    auto k = std::make_unique<KnnClassifier>(3);
    k->fit(pca_transform(*m.pca, b.X), b.y, 2);
    m.classifier = std::move(k);
    m.label_names = {"a", "b"};
    m.input_side = 0;
    m.input = InputKind::kEmbeddings;
    const auto bytes = encode_model(m);
    const Model back = decode_model(bytes);
    CHECK(back.raw_dim() == 8);
    CHECK(back.predict_proba(b.X) == m.predict_proba(b.X));
    CHECK(back.label_names == m.label_names);
    auto cut = bytes;
    cut.pop_back();
    CHECK_THROWS_AS(decode_model(cut), Error);
    auto extra = bytes;
    extra.push_back(0);
    CHECK_THROWS_AS(decode_model(extra), Error);
  }

  TEST_CASE("permuting class indices permutes the output columns") {
    Rng rng(80);
    const Blobs b = blobs(15, 3, 4, 1.2, rng);
    const int perm[] = {2, 0, 1};
    std::vector<int> yp(b.y.size());
    for (std::size_t i = 0; i < b.y.size(); ++i) yp[i] = perm[b.y[i]];
    const Matrix Q = oracle::random_matrix(10, 4, rng, -3, 3);
    GradientOptions go;
    go.epochs = 8;
    auto compare = [&](const Classifier& a, const Classifier& c, double tol) {
      const ProbMatrix pa = a.predict_proba(Q), pc = c.predict_proba(Q);
      for (std::size_t i = 0; i < Q.rows(); ++i)
        for (std::size_t k = 0; k < 3; ++k)
          CHECK(std::abs(pa(i, k) - pc(i, static_cast<std::size_t>(perm[k]))) <= tol);
    };
    {
      KnnClassifier a(5), c(5);
      a.fit(b.X, b.y, 3);
      c.fit(b.X, yp, 3);
      compare(a, c, 0.0);
    }
    {
      GaussianNbClassifier a, c;
      a.fit(b.X, b.y, 3);
      c.fit(b.X, yp, 3);
      compare(a, c, 1e-12);
    }
    {
      LdaClassifier a, c;
      a.fit(b.X, b.y, 3);
      c.fit(b.X, yp, 3);
      compare(a, c, 1e-9);
    }
    {
      SoftmaxClassifier a(go), c(go);
      a.fit(b.X, b.y, 3);
      c.fit(b.X, yp, 3);
      compare(a, c, 1e-9);
    }
    {
      LinearSvmClassifier a(SvmOptions{1e-3, 8, 2}), c(SvmOptions{1e-3, 8, 2});
      a.fit(b.X, b.y, 3);
      c.fit(b.X, yp, 3);
      compare(a, c, 1e-9);
    }
    {
      MlpClassifier a(MlpOptions{8, go}), c(MlpOptions{8, go});
      a.fit(b.X, b.y, 3);
      c.fit(b.X, yp, 3);
      compare(a, c, 1e-9);
    }
  }
}
