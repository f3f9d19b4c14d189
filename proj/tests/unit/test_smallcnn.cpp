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
#include <vector>

#include "doctest.h"
#include "malvis/error.hpp"
#include "malvis/model_io.hpp"
#include "malvis/smallcnn.hpp"
#include "oracles.hpp"

using namespace malvis;

namespace {

CnnArchitecture tiny(std::size_t side, std::size_t classes) {
  CnnArchitecture a;
  a.input_side = side;
  a.stem_filters = 3;
  a.branch_1x1 = 2;
  a.branch_3x3 = 2;
  a.branch_5x5 = 1;
  a.branch_pool = 1;
  a.n_classes = classes;
  return a;
}

}  // namespace

TEST_SUITE("smallcnn") {
  TEST_CASE("zero parameters give the uniform distribution") {
    SmallCnn net(tiny(9, 4));
    Rng rng(1);
    const ProbMatrix p = net.forward(oracle::random_matrix(3, 81, rng, 0, 1));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t c = 0; c < 4; ++c) CHECK(p(i, c) == 0.25);
  }

  TEST_CASE("forward matches the reference implementation") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      CnnArchitecture a = tiny(seed % 2 ? 9 : 12, 3);
      a.stem_pool = seed < 2;
      SmallCnn net(a, seed);
      Rng rng(seed + 100);
      const Matrix X = oracle::random_matrix(4, a.input_side * a.input_side, rng, 0, 1);
      const ProbMatrix p = net.forward(X);
      for (std::size_t i = 0; i < 4; ++i) {
        const auto ref = oracle::reference_cnn(a, net.parameters(), X.row(i));
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(p(i, c) - ref[c]) < 1e-10);
      }
    }
  }

  TEST_CASE("each row is processed independently") {
    SmallCnn net(tiny(9, 3), 5);
    Rng rng(6);
    const Matrix X = oracle::random_matrix(8, 81, rng, 0, 1);
    const ProbMatrix all = net.forward(X);
    for (std::size_t i = 0; i < 8; ++i) {
      Matrix one(1, 81);
      std::ranges::copy(X.row(i), one.row(0).begin());
      const ProbMatrix p = net.forward(one);
      CHECK(std::ranges::equal(p.row(0), all.row(i)));
    }
  }

  TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
    SmallCnn net(tiny(9, 3), 7);
    Rng rng(8);
    const Matrix X = oracle::random_matrix(3, 81, rng, 0, 1);
    const std::vector<int> y{0, 2, 1};
    Matrix XX(6, 81);
    for (std::size_t i = 0; i < 6; ++i) std::ranges::copy(X.row(i % 3), XX.row(i).begin());
    const std::vector<int> yy{0, 2, 1, 0, 2, 1};
    std::vector<double> g1(net.parameter_count()), g2(net.parameter_count());
    const double l1 = net.backward(X, y, g1);
    const double l2 = net.backward(XX, yy, g2);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(std::abs(g1[i] - g2[i]) <= 1e-12);
  }

  TEST_CASE("gradient is independent of the thread count") {
    SmallCnn net(tiny(9, 3), 9);
    Rng rng(10);
    const Matrix X = oracle::random_matrix(7, 81, rng, 0, 1);
    const std::vector<int> y{0, 1, 2, 0, 1, 2, 0};
    std::vector<double> g1(net.parameter_count()), g3(net.parameter_count());
    CHECK(net.backward(X, y, g1, 1) == net.backward(X, y, g3, 3));
    CHECK(g1 == g3);
  }

  TEST_CASE("saturated and extreme logits") {
    SmallCnn net(tiny(9, 2));
    Rng rng(11);
    const Matrix X = oracle::random_matrix(4, 81, rng, 0, 1);
    auto params = std::vector<double>(net.parameter_count(), 0.0);
    params[params.size() - 2] = 40.0;
    net.set_parameters(params);
    std::vector<double> g(net.parameter_count());
    const double loss = net.backward(X, std::vector<int>(4, 0), g);
    CHECK(loss < 1e-15);
    for (double v : g) CHECK(std::abs(v) < 1e-6);

    params[params.size() - 2] = 1e3;
    params[params.size() - 1] = -1e3;
    net.set_parameters(params);
    const ProbMatrix p = net.forward(X);
    CHECK(p(0, 0) == 1.0);
    CHECK(p(0, 1) >= 0.0);
    const double wrong = net.backward(X, std::vector<int>(4, 1), g);
    CHECK(std::isfinite(wrong));
    CHECK(wrong == doctest::Approx(2e3));
    for (double v : g) CHECK(std::isfinite(v));
  }

  TEST_CASE("shape checks") {
    SmallCnn net(tiny(9, 2), 1);
    CHECK_THROWS_AS(net.forward(Matrix(1, 80)), Error);
    CHECK_THROWS_AS(net.set_parameters(std::vector<double>(3)), Error);
    CHECK_THROWS_AS(SmallCnn(tiny(9, 1)), Error);
  }

  TEST_CASE("memorises a small training set") {
    Rng rng(12);
    const Matrix X = oracle::random_matrix(16, 64, rng, 0, 1);
    std::vector<int> y(16);
    for (std::size_t i = 0; i < 16; ++i) y[i] = static_cast<int>(i % 2);
    CnnArchitecture a = tiny(8, 2);
    a.stem_filters = 4;
    a.branch_1x1 = 4;
    CnnTrainOptions o;
    o.epochs = 500;
    o.learning_rate = 1e-2;
    o.batch_size = 16;
    o.seed = 3;
    const Matrix empty(0, 64);
    const CnnTrainResult r = cnn_train(X, y, empty, {}, a, o);
    const auto& h = r.fit.history;
    const auto hit = std::ranges::find_if(h, [](const TrainRecord& t) { return t.loss < 0.01; });
    CHECK(hit != h.end());
  }

  TEST_CASE("training is deterministic and keeps the selected checkpoint") {
    Rng rng(13);
    const Matrix X = oracle::random_matrix(24, 81, rng, 0, 1);
    std::vector<int> y(24);
    for (std::size_t i = 0; i < 24; ++i) y[i] = static_cast<int>(i % 3);
    const Matrix V = oracle::random_matrix(6, 81, rng, 0, 1);
    const std::vector<int> vy{0, 1, 2, 0, 1, 2};
    CnnTrainOptions o;
    o.epochs = 4;
    o.batch_size = 8;
    o.seed = 21;
    o.keep_checkpoints = true;
    const CnnTrainResult a = cnn_train(X, y, V, vy, tiny(9, 3), o);
    o.threads = 2;
    const CnnTrainResult b = cnn_train(X, y, V, vy, tiny(9, 3), o);
    CHECK(a.fit.history == b.fit.history);
    CHECK(std::ranges::equal(a.model->parameters(), b.model->parameters()));
    REQUIRE(a.checkpoints.size() == 4);
    CHECK(a.fit.selected_epoch == select_epoch(a.fit.history));
    CHECK(std::ranges::equal(a.checkpoints[a.fit.selected_epoch - 1], a.model->parameters()));

    Model m;
    m.label_names = {"a", "b", "c"};
    m.input_side = 9;
    m.classifier = restore_classifier(a.model->kind(), a.model->hyperparameters(),
                                      a.model->parameter_blobs());
    const Model back = decode_model(encode_model(m));
    CHECK(back.classifier->predict_proba(V) == a.model->forward(V));
  }

  TEST_CASE("single-class training data is rejected") {
    Rng rng(14);
    const Matrix X = oracle::random_matrix(4, 81, rng, 0, 1);
    CnnTrainOptions o;
    o.epochs = 1;
    CHECK_THROWS_AS(cnn_train(X, std::vector<int>(4, 1), Matrix(0, 81), {}, tiny(9, 2), o), Error);
  }
}
