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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "malvis/prob_matrix.hpp"

namespace malvis {

struct TrainRecord {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

// Per-epoch history and the epoch whose checkpoint was kept.
struct FitResult {
  std::vector<TrainRecord> history;
  int selected_epoch = 0;
};

// Epoch with the highest validation accuracy, earliest on ties. 0 when the
// history is empty.
int select_epoch(std::span<const TrainRecord> history);

double accuracy(const ProbMatrix& probs, std::span<const int> y);

// CSV with header "epoch,loss,train_acc,val_acc".
std::string history_to_csv(std::span<const TrainRecord> history);
void write_history_csv(const std::filesystem::path& path, std::span<const TrainRecord> history);

// Throws InvalidLabels when n_classes < 2 or a label falls outside
// [0, n_classes). With require_two_present, at least two distinct labels must
// occur in y.
void check_labels(std::span<const int> y, std::size_t n_classes, std::size_t rows,
                  bool require_two_present);

}  // namespace malvis
