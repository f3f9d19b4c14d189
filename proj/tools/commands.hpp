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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace malvis::cli {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string config;  // resolved run configuration, written next to outputs
};

struct ConvertArgs {
  std::string manifest;
  std::string out_store;
  std::size_t size = 224;
  double min_kb = 0.0;
  std::string small_out;
  std::size_t small_size = 28;
  int channels = 1;
};

struct SplitArgs {
  std::string store;
  std::string labels;
  std::vector<double> ratios{0.8, 0.1, 0.1};
  std::string out;
};

struct TrainArgs {
  std::string model;
  std::string store;
  std::string embeddings;
  std::string labels;
  std::string split;
  std::string out;
  std::size_t pca = 0;
  int epochs = 25;
  std::optional<double> lr;
  double l2 = 1e-4;
  std::size_t batch = 32;
  std::size_t k = 5;
  std::size_t hidden = 128;
  double lambda = 1e-4;
};

struct EvalArgs {
  std::string model;
  std::string store;
  std::string embeddings;
  std::string labels;
  std::string split;
  std::string subset = "test";
  std::string report;
  std::string probs;
  std::string csv;
  int positive = 1;
};

struct ExplainArgs {
  std::string model;
  std::string store;
  std::string image_id;
  std::string out;
  std::size_t superpixels = 200;
  std::size_t samples = 1000;
  std::size_t top = 5;
  std::size_t sparsity = 10;
  double kernel_width = 0.25;
  std::string fill = "mean";
};

struct EnsembleArgs {
  std::vector<std::string> probs;
  std::vector<std::string> test_probs;
  std::string labels;
  std::string split;
  std::string subset = "val";
  std::string metric = "accuracy";
  double grid = 0.01;
  std::string out;
};

struct SynthArgs {
  std::string out_dir;
  std::size_t families = 4;
  std::size_t per_family = 200;
  double min_kb = 3.0;
  double max_kb = 60.0;
  double noise = 0.1;
  std::size_t embedding_dim = 16;
  double embedding_sigma = 0.2;
};

int cmd_convert(const ConvertArgs& a, const Globals& g);
int cmd_split(const SplitArgs& a, const Globals& g);
int cmd_train(const TrainArgs& a, const Globals& g);
int cmd_eval(const EvalArgs& a, const Globals& g);
int cmd_explain(const ExplainArgs& a, const Globals& g);
int cmd_ensemble(const EnsembleArgs& a, const Globals& g);
int cmd_synth(const SynthArgs& a, const Globals& g);

}  // namespace malvis::cli
