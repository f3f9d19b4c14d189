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


#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "malvis/baselines.hpp"
#include "malvis/imaging.hpp"
#include "malvis/interpret.hpp"
#include "malvis/rng.hpp"
#include "malvis/smallcnn.hpp"

namespace {

using namespace malvis;

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng.below(256));
  return b;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform();
  return m;
}

void BM_BytesToImage(benchmark::State& state) {
  const auto bytes = random_bytes(static_cast<std::size_t>(state.range(0)) * 1024, 1);
  for (auto _ : state) {
    const SquareImage img = resize_bilinear(bytes_to_gray(bytes), 224);
    benchmark::DoNotOptimize(img.pixels().data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_BytesToImage)->Arg(64)->Arg(1024);

void BM_CnnForward(benchmark::State& state) {
  CnnArchitecture arch;
  arch.input_side = 28;
  SmallCnn net(arch, 1);
  const Matrix batch = random_matrix(static_cast<std::size_t>(state.range(0)), 28 * 28, 2);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CnnForward)->Arg(1)->Arg(32);

void BM_CnnBackward(benchmark::State& state) {
  CnnArchitecture arch;
  arch.input_side = 28;
  SmallCnn net(arch, 1);
  const Matrix batch = random_matrix(32, 28 * 28, 3);
  std::vector<int> y(32);
  for (std::size_t i = 0; i < 32; ++i) y[i] = static_cast<int>(i % 2);
  std::vector<double> grad(net.parameter_count());
  for (auto _ : state) benchmark::DoNotOptimize(net.backward(batch, y, grad));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_CnnBackward);

void BM_KnnPredict(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Matrix X = random_matrix(n, 20, 4);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 4);
  KnnClassifier knn(5);
  knn.fit(X, y, 4);
  const Matrix Q = random_matrix(100, 20, 5);
  for (auto _ : state) benchmark::DoNotOptimize(knn.predict_proba(Q));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_KnnPredict)->Arg(1000)->Arg(10000);

void BM_Slic(benchmark::State& state) {
  const auto bytes = random_bytes(200 * 1024, 6);
  const SquareImage img = resize_bilinear(bytes_to_gray(bytes), static_cast<std::size_t>(state.range(0)));
  SlicOptions o;
  o.n_segments = 50;
  for (auto _ : state) benchmark::DoNotOptimize(slic_segment(img, o));
}
BENCHMARK(BM_Slic)->Arg(28)->Arg(224);

}  // namespace
BENCHMARK_MAIN();
