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

#include "malvis/model_io.hpp"

#include <limits>

#include "json.hpp"
#include "malvis/baselines.hpp"
#include "malvis/binio.hpp"
#include "malvis/error.hpp"
#include "malvis/smallcnn.hpp"

namespace malvis {

using nlohmann::json;

std::unique_ptr<Classifier> restore_classifier(ClassifierKind kind, const Hyperparameters& hyper,
                                               const ParameterBlobs& blobs) {
  switch (kind) {
    case ClassifierKind::kKnn: return KnnClassifier::restore(hyper, blobs);
    case ClassifierKind::kGnb: return GaussianNbClassifier::restore(hyper, blobs);
    case ClassifierKind::kLda: return LdaClassifier::restore(hyper, blobs);
    case ClassifierKind::kSoftmax: return SoftmaxClassifier::restore(hyper, blobs);
    case ClassifierKind::kLinearSvm: return LinearSvmClassifier::restore(hyper, blobs);
    case ClassifierKind::kMlp: return MlpClassifier::restore(hyper, blobs);
    case ClassifierKind::kSmallCnn: return SmallCnn::restore(hyper, blobs);
  }
  fail("BadFormat", "unknown classifier kind tag " + std::to_string(static_cast<int>(kind)));
}

std::size_t Model::raw_dim() const {
  return pca ? pca->dim() : classifier->input_dim();
}

ProbMatrix Model::predict_proba(const Matrix& X) const {
  if (!classifier) fail("InvalidArgument", "model has no classifier");
  if (X.cols() != raw_dim())
    fail("DimMismatch", "model expects " + std::to_string(raw_dim()) + " features, got " +
                            std::to_string(X.cols()));
  if (pca) return classifier->predict_proba(pca_transform(*pca, X));
  return classifier->predict_proba(X);
}

namespace {

constexpr std::size_t kPcaBlobs = 4;

void put_blob(ByteWriter& w, std::span<const double> v) {
  w.u64(v.size());
  for (double x : v) w.f64(x);
}

}  // namespace

std::vector<std::uint8_t> encode_model(const Model& model) {
  if (!model.classifier) fail("InvalidArgument", "model has no classifier");
  const Classifier& clf = *model.classifier;
  json meta;
  meta["hyper"] = clf.hyperparameters();
  meta["n_classes"] = clf.n_classes();
  meta["input"] = {{"kind", model.input == InputKind::kPixels ? "pixels" : "embeddings"},
                   {"side", model.input_side},
                   {"dim", model.raw_dim()}};
  meta["label_names"] = model.label_names;
  meta["selected_epoch"] = model.selected_epoch;
  if (model.pca) {
    meta["pca"] = {{"k", model.pca->k()},
                   {"d", model.pca->dim()},
                   {"rank_deficient", model.pca->rank_deficient}};
  } else {
    meta["pca"] = nullptr;
  }
  const std::string text = meta.dump();

  ByteWriter w;
  w.raw(std::string_view("MMOD"));
  w.u8(kModelVersion);
  w.u8(static_cast<std::uint8_t>(clf.kind()));
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text);
  const ParameterBlobs blobs = clf.parameter_blobs();
  w.u32(static_cast<std::uint32_t>(blobs.size() + (model.pca ? kPcaBlobs : 0)));
  for (const auto& b : blobs) put_blob(w, b);
  if (model.pca) {
    const PcaModel& p = *model.pca;
    put_blob(w, p.mean);
    put_blob(w, p.components.data());
    put_blob(w, p.explained_variance);
    const double total[] = {p.total_variance};
    put_blob(w, total);
  }
  return w.take();
}

Model decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ".mmod");
  r.expect_magic("MMOD");
  const std::uint8_t version = r.u8();
  if (version != kModelVersion)
    r.fail_at("BadFormat", "unsupported model version " + std::to_string(version));
  const std::uint8_t tag = r.u8();
  if (tag > static_cast<std::uint8_t>(ClassifierKind::kSmallCnn))
    r.fail_at("BadFormat", "unknown classifier kind tag " + std::to_string(tag));
  const std::uint32_t json_len = r.u32();
  const std::size_t json_at = r.offset();
  const std::string text = r.raw_string(json_len);

  json meta;
  try {
    meta = json::parse(text);
  } catch (const json::exception& e) {
    fail("BadFormat", ".mmod: metadata block at byte " + std::to_string(json_at) +
                          " is not valid JSON: " + e.what());
  }

  const std::uint32_t n_blobs = r.u32();
  ParameterBlobs blobs;
  for (std::uint32_t i = 0; i < n_blobs; ++i) {
    const std::uint64_t count = r.u64();
    if (count > r.remaining() / 8) r.fail_at("TruncatedFile", "blob length exceeds file size");
    std::vector<double> blob(count);
    for (auto& v : blob) v = r.f64();
    blobs.push_back(std::move(blob));
  }
  if (!r.at_end()) r.fail_at("BadFormat", "trailing bytes after last blob");

  Model model;
  try {
    const auto& input = meta.at("input");
    const std::string input_kind = input.at("kind").get<std::string>();
    if (input_kind == "pixels") {
      model.input = InputKind::kPixels;
    } else if (input_kind == "embeddings") {
      model.input = InputKind::kEmbeddings;
    } else {
      fail("BadFormat", ".mmod: unknown input kind \"" + input_kind + "\"");
    }
    model.input_side = input.at("side").get<std::size_t>();
    model.label_names = meta.at("label_names").get<std::vector<std::string>>();
    model.selected_epoch = meta.at("selected_epoch").get<int>();

    if (!meta.at("pca").is_null()) {
      if (blobs.size() < kPcaBlobs) fail("BadFormat", ".mmod: PCA blobs missing");
      const std::size_t k = meta["pca"].at("k").get<std::size_t>();
      const std::size_t d = meta["pca"].at("d").get<std::size_t>();
      const std::size_t base = blobs.size() - kPcaBlobs;
      PcaModel p;
      p.mean = std::move(blobs[base]);
      if (p.mean.size() != d || blobs[base + 1].size() != k * d ||
          blobs[base + 2].size() != k || blobs[base + 3].size() != 1)
        fail("DimMismatch", ".mmod: PCA blob sizes disagree with k=" + std::to_string(k) +
                                ", d=" + std::to_string(d));
      p.components = Matrix(k, d, std::move(blobs[base + 1]));
      p.explained_variance = std::move(blobs[base + 2]);
      p.total_variance = blobs[base + 3][0];
      p.rank_deficient = meta["pca"].at("rank_deficient").get<bool>();
      blobs.resize(base);
      model.pca = std::move(p);
    }
    const auto hyper = meta.at("hyper").get<Hyperparameters>();
    model.classifier = restore_classifier(static_cast<ClassifierKind>(tag), hyper, blobs);
  } catch (const json::exception& e) {
    fail("BadFormat", std::string(".mmod: malformed metadata: ") + e.what());
  }
  if (model.pca && model.pca->k() != model.classifier->input_dim())
    fail("DimMismatch", ".mmod: PCA output width differs from classifier input");
  if (model.label_names.size() != model.classifier->n_classes())
    fail("DimMismatch", ".mmod: label count differs from classifier class count");
  return model;
}

void write_model(const std::filesystem::path& path, const Model& model) {
  write_file_bytes(path, encode_model(model));
}

Model read_model(const std::filesystem::path& path) {
  return decode_model(read_file_bytes(path));
}

}  // namespace malvis
