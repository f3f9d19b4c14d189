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


#include "malvis/synthetic.hpp"

#include <algorithm>
#include <cstdio>

#include "malvis/binio.hpp"
#include "malvis/error.hpp"

namespace malvis {

namespace fs = std::filesystem;

namespace {

std::uint8_t byte_of(Rng& rng) { return static_cast<std::uint8_t>(rng.next() >> 56); }

void fill_texture(std::size_t family, std::span<std::uint8_t> out, Rng& rng) {
  switch (family % 4) {
    case 0:
      for (auto& b : out) b = rng.uniform() < 0.06 ? static_cast<std::uint8_t>(160 + rng.below(96)) : 0;
      break;
    case 1:
      for (auto& b : out) b = byte_of(rng);
      break;
    case 2: {
      // Address table: little-endian u32 values counting up from an
      // image-base-like origin.
      std::uint32_t v = 0x00400000u + static_cast<std::uint32_t>(rng.below(0x100000));
      const std::uint32_t stride = rng.uniform() < 0.5 ? 4 : 8;
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(v >> (8 * (i % 4)));
        if (i % 4 == 3) v += stride;
      }
      break;
    }
    default: {
      std::size_t col = 0;
      const std::size_t line = 40 + rng.below(60);
      for (auto& b : out) {
        if (++col >= line) {
          b = '\n';
          col = 0;
        } else {
          b = rng.uniform() < 0.18 ? ' ' : static_cast<std::uint8_t>('a' + rng.below(26));
        }
      }
    }
  }
}

}  // namespace

std::vector<std::uint8_t> synthesize_binary(std::size_t family, std::size_t size, double noise,
                                            Rng& rng) {
  std::vector<std::uint8_t> bytes(size);
  // Header: a few hundred bytes built from random textures.
  const std::size_t header = std::min(size, static_cast<std::size_t>(256 + rng.below(768)));
  for (std::size_t at = 0; at < header;) {
    const std::size_t len = std::min(header - at, static_cast<std::size_t>(32 + rng.below(96)));
    fill_texture(rng.below(4), std::span(bytes).subspan(at, len), rng);
    at += len;
  }
  fill_texture(family, std::span(bytes).subspan(header), rng);
  for (auto& b : bytes)
    if (rng.uniform() < noise) b = byte_of(rng);
  return bytes;
}

EmbeddingSet synthetic_embeddings(const Corpus& corpus, const SyntheticOptions& options) {
  const std::size_t d = options.embedding_dim;
  Rng mean_rng = Rng::derive(options.seed, 0xe1be);
  Matrix means(corpus.n_classes(), d);
  for (double& v : means.storage()) v = mean_rng.normal();
  Rng noise_rng = Rng::derive(options.seed, 0xe1bf);
  std::vector<std::string> ids;
  Matrix vectors(corpus.samples.size(), d);
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    ids.push_back(corpus.samples[i].id);
    const auto label = static_cast<std::size_t>(corpus.samples[i].label);
    for (std::size_t j = 0; j < d; ++j)
      vectors(i, j) = static_cast<float>(means(label, j) + options.embedding_sigma * noise_rng.normal());
  }
  return EmbeddingSet(std::move(ids), std::move(vectors), "synthetic-class-means");
}

SyntheticCorpus write_synthetic_corpus(const fs::path& dir, const SyntheticOptions& options) {
  if (options.families < 2) fail("InvalidArgument", "need at least two families");
  if (options.per_family < 1) fail("InvalidArgument", "need at least one file per family");
  if (options.min_bytes < 1 || options.max_bytes < options.min_bytes)
    fail("InvalidArgument", "invalid file size range");
  SyntheticCorpus out;
  out.manifest.base_dir = dir;
  std::vector<std::pair<std::string, std::string>> id_labels;
  for (std::size_t f = 0; f < options.families; ++f) {
    char family[32];
    std::snprintf(family, sizeof family, "family_%zu", f);
    for (std::size_t k = 0; k < options.per_family; ++k) {
      char rel[64];
      std::snprintf(rel, sizeof rel, "bin/%s/%03zu.bin", family, k);
      Rng rng = Rng::derive(options.seed, f * 1000003 + k);
      const std::size_t size =
          options.min_bytes + rng.below(options.max_bytes - options.min_bytes + 1);
      const fs::path path = dir / rel;
      fs::create_directories(path.parent_path());
      write_file_bytes(path, synthesize_binary(f, size, options.noise, rng));
      out.manifest.entries.push_back({rel, family});
      id_labels.emplace_back(rel, family);
    }
  }
  write_manifest(dir / "manifest.csv", out.manifest);
  out.corpus = make_corpus(id_labels);
  out.embeddings = synthetic_embeddings(out.corpus, options);
  save_embeddings(dir / "embeddings.memb", out.embeddings);
  return out;
}

}  // namespace malvis
