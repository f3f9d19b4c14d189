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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "malvis/binio.hpp"
#include "malvis/corpus.hpp"
#include "malvis/error.hpp"
#include "malvis/rng.hpp"
#include "scratch.hpp"

using namespace malvis;
namespace fs = std::filesystem;

namespace {

void write_blob(const fs::path& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng.below(256));
  write_file_bytes(p, b);
}

Corpus corpus_of(const std::vector<std::size_t>& class_sizes) {
  std::vector<std::pair<std::string, std::string>> id_labels;
  for (std::size_t c = 0; c < class_sizes.size(); ++c)
    for (std::size_t i = 0; i < class_sizes[c]; ++i)
      id_labels.emplace_back("c" + std::to_string(c) + "_" + std::to_string(i),
                             "class" + std::to_string(100 + c));
  return make_corpus(id_labels);
}

std::map<int, std::array<std::size_t, 3>> bucket_counts(const Corpus& c, const SplitAssignment& s) {
  std::map<int, std::array<std::size_t, 3>> out;
  const std::vector<std::string>* parts[] = {&s.train, &s.val, &s.test};
  for (int b = 0; b < 3; ++b)
    for (const auto& id : *parts[b]) ++out[c.samples[c.index_of(id)].label][b];
  return out;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("manifest round trip and duplicate paths") {
    const auto dir = testing::scratch_dir("manifest");
    Manifest m;
    m.entries = {{"a.bin", "x"}, {"sub/b,c.bin", "y \"quoted\""}};
    write_manifest(dir / "m.csv", m);
    const Manifest back = read_manifest(dir / "m.csv");
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[1].path == "sub/b,c.bin");
    CHECK(back.entries[1].label == "y \"quoted\"");
    CHECK(back.resolve(back.entries[0]) == dir / "a.bin");

    write_text_file(dir / "dup.csv", "path,label\na.bin,x\na.bin,y\n");
    try {
      read_manifest(dir / "dup.csv");
      FAIL("duplicate accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == "DuplicatePath");
    }
    write_text_file(dir / "bad.csv", "file,label\na.bin,x\n");
    CHECK_THROWS_AS(read_manifest(dir / "bad.csv"), Error);
  }

  TEST_CASE("ingest three files with two labels") {
    const auto dir = testing::scratch_dir("ingest3");
    Manifest m;
    m.base_dir = dir;
    for (int i = 0; i < 3; ++i) {
      write_blob(dir / ("f" + std::to_string(i)), 5000 + 100 * i, i);
      m.entries.push_back({"f" + std::to_string(i), i == 1 ? "beta" : "alpha"});
    }
    const IngestResult r = ingest(m, {});
    CHECK(r.corpus.samples.size() == 3);
    CHECK(r.corpus.n_classes() == 2);
    CHECK(r.corpus.label_names == std::vector<std::string>{"alpha", "beta"});
    CHECK(r.corpus.samples[1].label == 1);
    CHECK(r.store.size() == 3);
    CHECK(r.store.at(0).width == 224);
    CHECK(!r.small_store);
  }

  TEST_CASE("unreadable files are skipped and reported") {
    const auto dir = testing::scratch_dir("skip");
    write_blob(dir / "ok.bin", 4000, 1);
    write_file_bytes(dir / "empty.bin", {});
    Manifest m;
    m.base_dir = dir;
    m.entries = {{"ok.bin", "a"}, {"missing.bin", "b"}, {"empty.bin", "b"}};
    const IngestResult r = ingest(m, {});
    CHECK(r.store.size() == 1);
    REQUIRE(r.skipped.size() == 2);
    CHECK(r.skipped[0].path == "missing.bin");
    CHECK(r.skipped[1].path == "empty.bin");

    m.entries = {{"missing.bin", "b"}};
    try {
      ingest(m, {});
      FAIL("empty corpus accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == "EmptyCorpus");
    }
  }

  TEST_CASE("ten binaries round trip through the store file") {
    const auto dir = testing::scratch_dir("roundtrip10");
    Manifest m;
    m.base_dir = dir;
    for (int i = 0; i < 10; ++i) {
      const std::string name = "bin" + std::to_string(i) + ".bin";
      write_blob(dir / name, 1000 + 7919 * static_cast<std::size_t>(i) * i, 40 + i);
      m.entries.push_back({name, i % 2 ? "odd" : "even"});
    }
    IngestOptions opt;
    opt.small_side = 28;
    const IngestResult r = ingest(m, opt);
    write_image_store(dir / "s.mimg", r.store);
    write_image_store(dir / "small.mimg", *r.small_store);
    const ImageStore back = read_image_store(dir / "s.mimg");
    CHECK(back.size() == 10);
    CHECK(back == r.store);
    CHECK(read_image_store(dir / "small.mimg") == *r.small_store);
    // Pixels are the f32 rounding of the in-memory image.
    const SquareImage img = resize_bilinear(
        bytes_to_gray(read_file_bytes(dir / "bin3.bin")), 224);
    for (std::size_t i = 0; i < img.pixels().size(); ++i)
      REQUIRE(back.at(3).pixels[i] == static_cast<float>(img.pixels()[i]));

    write_labels(labels_path_for(dir / "s.mimg"), r.corpus);
    const Corpus labels = read_labels(dir / "s.labels.csv");
    CHECK(labels.label_names == r.corpus.label_names);
    CHECK(labels.samples.size() == 10);
  }

  TEST_CASE("ingest does not depend on the thread count") {
    const auto dir = testing::scratch_dir("threads");
    Manifest m;
    m.base_dir = dir;
    for (int i = 0; i < 12; ++i) {
      write_blob(dir / std::to_string(i), 3000 + 1500 * static_cast<std::size_t>(i), i);
      m.entries.push_back({std::to_string(i), std::to_string(i % 3)});
    }
    IngestOptions one, four;
    four.threads = 4;
    CHECK(encode_image_store(ingest(m, one).store) == encode_image_store(ingest(m, four).store));
  }

  TEST_CASE("minimum size filter") {
    const auto dir = testing::scratch_dir("minkb");
    write_blob(dir / "four", 4 * 1024, 1);
    write_blob(dir / "five", 5 * 1024, 2);
    write_blob(dir / "six", 6 * 1024, 3);
    Manifest m;
    m.base_dir = dir;
    m.entries = {{"four", "a"}, {"six", "a"}, {"five", "b"}};
    CHECK(filter_min_size(m, 0).entries.size() == 3);
    const Manifest f = filter_min_size(m, 5);
    REQUIRE(f.entries.size() == 2);
    CHECK(f.entries[0].path == "six");
    CHECK(f.entries[1].path == "five");
    CHECK_THROWS_AS(filter_min_size(m, -1), Error);
  }

  TEST_CASE("split examples") {
    const SplitAssignment s = split(corpus_of({10}), {0.8, 0.1, 0.1}, 1);
    CHECK(s.train.size() == 8);
    CHECK(s.val.size() == 1);
    CHECK(s.test.size() == 1);

    const SplitAssignment lone = split(corpus_of({1, 10}), {0.8, 0.1, 0.1}, 1);
    CHECK(std::ranges::count(lone.train, std::string("c0_0")) == 1);

    const Corpus big = corpus_of(std::vector<std::size_t>(25, 20));
    CHECK(split_to_json(split(big, {0.8, 0.1, 0.1}, 7)) ==
          split_to_json(split(big, {0.8, 0.1, 0.1}, 7)));
    CHECK(split(big, {0.8, 0.1, 0.1}, 7) != split(big, {0.8, 0.1, 0.1}, 8));

    CHECK_THROWS_AS(split(big, {0.8, 0.1, 0.2}, 7), Error);
    CHECK_THROWS_AS(split(big, {1.1, -0.1, 0.0}, 7), Error);
  }

  TEST_CASE("split partitions and stratifies for random seeds and ratios") {
    Rng rng(17);
    for (int t = 0; t < 60; ++t) {
      std::vector<std::size_t> sizes(1 + rng.below(6));
      for (auto& n : sizes) n = 1 + rng.below(40);
      const Corpus c = corpus_of(sizes);
      const double a = rng.uniform(), b = rng.uniform() * (1 - a);
      const std::array<double, 3> ratios{a, b, 1.0 - a - b};
      const SplitAssignment s = split(c, ratios, rng.next());
      std::multiset<std::string> all(s.train.begin(), s.train.end());
      all.insert(s.val.begin(), s.val.end());
      all.insert(s.test.begin(), s.test.end());
      CHECK(all.size() == c.samples.size());
      std::set<std::string> unique(all.begin(), all.end());
      CHECK(unique.size() == all.size());
      for (const auto& [label, counts] : bucket_counts(c, s)) {
        const double n = static_cast<double>(sizes[static_cast<std::size_t>(label)]);
        for (int k = 0; k < 3; ++k)
          CHECK(std::abs(static_cast<double>(counts[k]) - ratios[k] * n) <= 1.0 + 1e-9);
      }
    }
  }

  TEST_CASE("split file round trip") {
    const auto dir = testing::scratch_dir("splitfile");
    const SplitAssignment s = split(corpus_of({7, 9, 3}), {0.8, 0.1, 0.1}, 99);
    write_split(dir / "s.json", s);
    CHECK(read_split(dir / "s.json") == s);
    CHECK_THROWS_AS(split_from_json("{\"seed\": 1}"), Error);
  }
}
