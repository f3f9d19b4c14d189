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

// Generator for the desk-scale benchmark corpus: a few "families" of fake
// binaries whose byte statistics differ by family, plus matching embedding
// vectors that stand in for a frozen backbone's features.
//
// Family textures (family index modulo 4):
//   0  sparse: mostly zero bytes with scattered high values
//   1  packed: uniformly random bytes
//   2  table:  little-endian u32 address tables counting up from 0x004xxxxx
//   3  text:   printable ASCII with line structure
// Every file also carries a random-length header of mixed content and a
// fraction of bytes overwritten with uniform noise.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "malvis/corpus.hpp"
#include "malvis/rng.hpp"
#include "malvis/transfer.hpp"

namespace malvis {

struct SyntheticOptions {
  std::size_t families = 4;
  std::size_t per_family = 200;
  std::size_t min_bytes = 3 * 1024;
  std::size_t max_bytes = 60 * 1024;
  double noise = 0.1;  // fraction of bytes replaced by uniform noise
  std::size_t embedding_dim = 16;
  double embedding_sigma = 0.2;
  std::uint64_t seed = 7;
};

std::vector<std::uint8_t> synthesize_binary(std::size_t family, std::size_t size, double noise,
                                            Rng& rng);

// Class means drawn from N(0, I) plus per-sample N(0, sigma^2) noise, rounded
// to f32 so the in-memory set equals its ".memb" file.
EmbeddingSet synthetic_embeddings(const Corpus& corpus, const SyntheticOptions& options);

struct SyntheticCorpus {
  Manifest manifest;
  Corpus corpus;
  EmbeddingSet embeddings;
};

// Writes <dir>/bin/family_<k>/<nnn>.bin, <dir>/manifest.csv and
// <dir>/embeddings.memb. Sample ids are the manifest paths.
SyntheticCorpus write_synthetic_corpus(const std::filesystem::path& dir,
                                       const SyntheticOptions& options);

}  // namespace malvis
