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

#include "malvis/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "malvis/binio.hpp"
#include "malvis/csv.hpp"
#include "malvis/error.hpp"
#include "malvis/parallel.hpp"
#include "malvis/rng.hpp"

namespace malvis {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path Manifest::resolve(const ManifestEntry& e) const {
  fs::path p(e.path);
  return p.is_absolute() ? p : base_dir / p;
}

void check_unique_paths(const Manifest& manifest) {
  std::unordered_set<std::string> seen;
  for (const auto& e : manifest.entries)
    if (!seen.insert(e.path).second) fail("DuplicatePath", "manifest lists " + e.path + " twice");
}

Manifest read_manifest(const fs::path& csv_path) {
  const auto rows = csv::parse(read_text_file(csv_path));
  if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "path" || rows[0][1] != "label")
    fail("BadFormat", csv_path.string() + ": manifest header must be \"path,label\"");
  Manifest m;
  m.base_dir = csv_path.parent_path();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2)
      fail("BadFormat", csv_path.string() + ": row " + std::to_string(i + 1) +
                            " must have 2 fields");
    m.entries.push_back({rows[i][0], rows[i][1]});
  }
  check_unique_paths(m);
  return m;
}

void write_manifest(const fs::path& csv_path, const Manifest& manifest) {
  std::string text = "path,label\n";
  for (const auto& e : manifest.entries) text += csv::join({e.path, e.label}) + "\n";
  write_text_file(csv_path, text);
}

Manifest filter_min_size(const Manifest& manifest, double min_kb) {
  if (min_kb < 0) fail("InvalidArgument", "min_kb must be nonnegative");
  const double min_bytes = min_kb * 1024.0;
  Manifest out;
  out.base_dir = manifest.base_dir;
  for (const auto& e : manifest.entries) {
    std::error_code ec;
    const auto size = fs::file_size(manifest.resolve(e), ec);
    if (!ec && static_cast<double>(size) < min_bytes) continue;
    out.entries.push_back(e);
  }
  return out;
}

std::size_t Corpus::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].id == id) return i;
  fail("MissingSample", "sample id not in corpus: " + id);
}

Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& id_labels) {
  std::set<std::string> names;
  for (const auto& [id, label] : id_labels) names.insert(label);
  Corpus c;
  c.label_names.assign(names.begin(), names.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < c.label_names.size(); ++i)
    index[c.label_names[i]] = static_cast<int>(i);
  std::unordered_set<std::string> seen;
  for (const auto& [id, label] : id_labels) {
    if (!seen.insert(id).second) fail("DuplicateId", "duplicate sample id " + id);
    c.samples.push_back({id, index.at(label)});
  }
  return c;
}

IngestResult ingest(const Manifest& manifest, const IngestOptions& options) {
  if (options.image_side == 0) fail("InvalidArgument", "image side must be positive");
  if (options.channels != 1 && options.channels != 3)
    fail("InvalidArgument", "channels must be 1 or 3");
  check_unique_paths(manifest);

  struct Converted {
    std::optional<ImageRecord> image;
    std::optional<ImageRecord> small;
    std::string error;
  };
  std::vector<Converted> results(manifest.entries.size());
  parallel_for(manifest.entries.size(), options.threads, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    try {
      const auto bytes = read_file_bytes(manifest.resolve(entry));
      const GrayImage gray = bytes_to_gray(bytes);
      const SquareImage square = resize_bilinear(gray, options.image_side);
      results[i].image = options.channels == 3
                             ? make_record(entry.path, replicate_channels(square))
                             : make_record(entry.path, square);
      if (options.small_side > 0)
        results[i].small = make_record(entry.path, resize_bilinear(gray, options.small_side));
    } catch (const Error& e) {
      results[i].error = e.what();
    }
  });

  IngestResult out;
  std::vector<std::pair<std::string, std::string>> id_labels;
  if (options.small_side > 0) out.small_store.emplace();
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    if (!r.image) {
      out.skipped.push_back({manifest.entries[i].path, r.error});
      continue;
    }
    id_labels.emplace_back(manifest.entries[i].path, manifest.entries[i].label);
    out.store.add(std::move(*r.image));
    if (r.small) out.small_store->add(std::move(*r.small));
  }
  if (id_labels.empty()) fail("EmptyCorpus", "no file in the manifest could be ingested");
  out.corpus = make_corpus(id_labels);
  return out;
}

fs::path labels_path_for(const fs::path& store_path) {
  fs::path p = store_path;
  p.replace_extension(".labels.csv");
  return p;
}

void write_labels(const fs::path& path, const Corpus& corpus) {
  std::string text = "id,label\n";
  for (const auto& s : corpus.samples)
    text += csv::join({s.id, corpus.label_names[static_cast<std::size_t>(s.label)]}) + "\n";
  write_text_file(path, text);
}

Corpus read_labels(const fs::path& path) {
  const auto rows = csv::parse(read_text_file(path));
  if (rows.empty() || rows[0] != std::vector<std::string>{"id", "label"})
    fail("BadFormat", path.string() + ": label table header must be \"id,label\"");
  std::vector<std::pair<std::string, std::string>> id_labels;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2)
      fail("BadFormat", path.string() + ": row " + std::to_string(i + 1) + " must have 2 fields");
    id_labels.emplace_back(rows[i][0], rows[i][1]);
  }
  return make_corpus(id_labels);
}

namespace {

// Round half down; the epsilon absorbs products like 0.1 * 25 landing a hair
// above an exact half.
std::size_t bucket_count(double ratio, std::size_t n) {
  const double x = ratio * static_cast<double>(n);
  return static_cast<std::size_t>(std::max(0.0, std::ceil(x - 0.5 - 1e-9)));
}

}  // namespace

SplitAssignment split(const Corpus& corpus, const std::array<double, 3>& ratios,
                      std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (r < 0 || !std::isfinite(r)) fail("InvalidArgument", "split ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("InvalidArgument", "split ratios must sum to 1");

  std::vector<std::vector<std::size_t>> by_class(corpus.n_classes());
  for (std::size_t i = 0; i < corpus.samples.size(); ++i)
    by_class[static_cast<std::size_t>(corpus.samples[i].label)].push_back(i);

  // 0 = train, 1 = val, 2 = test
  std::vector<int> bucket(corpus.samples.size(), 0);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty())
      fail("DegenerateClass", "class " + corpus.label_names[c] + " has no samples");
    Rng rng = Rng::derive(seed, c);
    rng.shuffle(members);
    const std::size_t n_val = bucket_count(ratios[1], members.size());
    const std::size_t n_test =
        std::min(bucket_count(ratios[2], members.size()), members.size() - n_val);
    for (std::size_t k = 0; k < n_val; ++k) bucket[members[k]] = 1;
    for (std::size_t k = n_val; k < n_val + n_test; ++k) bucket[members[k]] = 2;
  }

  SplitAssignment s;
  s.seed = seed;
  s.ratios = ratios;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    auto& dst = bucket[i] == 0 ? s.train : bucket[i] == 1 ? s.val : s.test;
    dst.push_back(corpus.samples[i].id);
  }
  return s;
}

std::string split_to_json(const SplitAssignment& s) {
  json j;
  j["seed"] = s.seed;
  j["ratios"] = s.ratios;
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  return j.dump(2) + "\n";
}

SplitAssignment split_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SplitAssignment s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ratios = j.at("ratios").get<std::array<double, 3>>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
  } catch (const json::exception& e) {
    fail("BadFormat", std::string("split file: ") + e.what());
  }
}

void write_split(const fs::path& path, const SplitAssignment& s) {
  write_text_file(path, split_to_json(s));
}

SplitAssignment read_split(const fs::path& path) {
  return split_from_json(read_text_file(path));
}

}  // namespace malvis
