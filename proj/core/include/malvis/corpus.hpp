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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "malvis/image_store.hpp"

namespace malvis {

struct ManifestEntry {
  std::string path;   // as written in the manifest; doubles as the sample id
  std::string label;
};

// CSV with header "path,label". Relative paths resolve against base_dir.
struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& e) const;
};

// Throws DuplicatePath when a path appears twice.
Manifest read_manifest(const std::filesystem::path& csv_path);
void write_manifest(const std::filesystem::path& csv_path, const Manifest& manifest);
void check_unique_paths(const Manifest& manifest);

// Drops entries whose file is smaller than min_kb * 1024 bytes; order is
// kept. Unreadable files are left in place for ingest to report.
Manifest filter_min_size(const Manifest& manifest, double min_kb);

struct Sample {
  std::string id;
  int label = 0;
};

// Labels are indexed in lexicographic order of their names.
struct Corpus {
  std::vector<std::string> label_names;
  std::vector<Sample> samples;

  std::size_t n_classes() const { return label_names.size(); }
  // Position of id in samples; throws MissingSample.
  std::size_t index_of(const std::string& id) const;
};

Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& id_labels);

struct IngestOptions {
  std::size_t image_side = kDefaultImageSide;
  std::size_t small_side = 0;  // 0 disables the second store
  std::uint8_t channels = 1;   // 1 or 3 (replicated)
  std::size_t threads = 1;
};

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct IngestResult {
  Corpus corpus;
  ImageStore store;
  std::optional<ImageStore> small_store;
  std::vector<SkippedFile> skipped;
};

// Runs every manifest file through the imaging pipeline. Records keep
// manifest order regardless of thread count. Throws EmptyCorpus when
// nothing could be read.
IngestResult ingest(const Manifest& manifest, const IngestOptions& options);

// Sidecar "id,label" table stored next to an image store.
std::filesystem::path labels_path_for(const std::filesystem::path& store_path);
void write_labels(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_labels(const std::filesystem::path& path);

struct SplitAssignment {
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

// Stratified split. Within each class the ids are shuffled with a seeded
// generator; val and test get round-half-down(ratio * class size) samples and
// train takes the rest. Buckets list ids in corpus order.
SplitAssignment split(const Corpus& corpus, const std::array<double, 3>& ratios,
                      std::uint64_t seed);

std::string split_to_json(const SplitAssignment& s);
SplitAssignment split_from_json(const std::string& text);
void write_split(const std::filesystem::path& path, const SplitAssignment& s);
SplitAssignment read_split(const std::filesystem::path& path);

}  // namespace malvis
