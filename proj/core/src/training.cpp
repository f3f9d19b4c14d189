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

#include "malvis/training.hpp"

#include <cstdio>
#include <set>

#include "malvis/binio.hpp"
#include "malvis/error.hpp"

namespace malvis {

int select_epoch(std::span<const TrainRecord> history) {
  int best = 0;
  double best_acc = -1.0;
  for (const auto& r : history) {
    if (r.val_accuracy > best_acc) {
      best_acc = r.val_accuracy;
      best = r.epoch;
    }
  }
  return best;
}

double accuracy(const ProbMatrix& probs, std::span<const int> y) {
  if (probs.n() != y.size()) fail("DimMismatch", "accuracy: label count mismatch");
  if (y.empty()) return 0.0;
  const auto pred = probs.predictions();
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

std::string history_to_csv(std::span<const TrainRecord> history) {
  std::string out = "epoch,loss,train_acc,val_acc\n";
  char line[128];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.loss,
                  r.train_accuracy, r.val_accuracy);
    out += line;
  }
  return out;
}

void write_history_csv(const std::filesystem::path& path, std::span<const TrainRecord> history) {
  write_text_file(path, history_to_csv(history));
}

void check_labels(std::span<const int> y, std::size_t n_classes, std::size_t rows,
                  bool require_two_present) {
  if (n_classes < 2) fail("InvalidLabels", "need at least two classes");
  if (y.size() != rows) fail("DimMismatch", "label count does not match sample count");
  if (rows == 0) fail("InvalidLabels", "no training samples");
  std::set<int> present;
  for (int v : y) {
    if (v < 0 || static_cast<std::size_t>(v) >= n_classes)
      fail("InvalidLabels", "label " + std::to_string(v) + " out of range");
    present.insert(v);
  }
  if (require_two_present && present.size() < 2)
    fail("InvalidLabels", "training labels contain a single class");
}

}  // namespace malvis
