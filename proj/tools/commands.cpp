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


#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "malvis/baselines.hpp"
#include "malvis/binio.hpp"
#include "malvis/corpus.hpp"
#include "malvis/dataset.hpp"
#include "malvis/ensemble.hpp"
#include "malvis/error.hpp"
#include "malvis/evaluate.hpp"
#include "malvis/image_store.hpp"
#include "malvis/interpret.hpp"
#include "malvis/model_io.hpp"
#include "malvis/smallcnn.hpp"
#include "malvis/synthetic.hpp"
#include "malvis/transfer.hpp"
#include "run_config.hpp"

namespace malvis::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorCode::kUsage, "Usage", msg); }

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

// Output path with its extension swapped, e.g. report.json -> report.mprob.
fs::path sibling(const fs::path& p, const std::string& ext) {
  fs::path out = p;
  out.replace_extension(ext);
  return out;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

Corpus load_corpus(const std::string& labels, const std::string& store) {
  if (!labels.empty()) return read_labels(labels);
  if (store.empty()) usage("--labels is required without --store");
  return read_labels(labels_path_for(store));
}

const std::vector<std::string>& subset_ids(const SplitAssignment& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  if (name == "test") return split.test;
  usage("unknown subset \"" + name + "\"");
}

std::size_t store_side(const ImageStore& store) {
  if (store.size() == 0) fail("EmptyCorpus", "image store has no records");
  const ImageRecord& r = store.at(0);
  if (r.width != r.height) fail("ShapeMismatch", "store images are not square");
  return r.width;
}

void set_threads(Classifier& clf, std::size_t threads) {
  if (auto* knn = dynamic_cast<KnnClassifier*>(&clf)) knn->threads = threads;
  if (auto* cnn = dynamic_cast<SmallCnn*>(&clf)) cnn->threads = threads;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f%%", 100.0 * v);
  return buf;
}

void check_label_names(const Model& model, const Corpus& corpus) {
  if (model.label_names != corpus.label_names)
    fail("DimMismatch", "model labels differ from the corpus labels");
}

}  // namespace

int cmd_convert(const ConvertArgs& a, const Globals& g) {
  const Manifest full = read_manifest(a.manifest);
  const Manifest manifest = a.min_kb > 0 ? filter_min_size(full, a.min_kb) : full;
  IngestOptions opt;
  opt.image_side = a.size;
  opt.small_side = a.small_out.empty() ? 0 : a.small_size;
  opt.channels = static_cast<std::uint8_t>(a.channels);
  opt.threads = g.threads;
  const IngestResult res = ingest(manifest, opt);

  ensure_parent(a.out_store);
  write_image_store(a.out_store, res.store);
  write_labels(labels_path_for(a.out_store), res.corpus);
  write_run_config(a.out_store, g.config);
  if (res.small_store) {
    ensure_parent(a.small_out);
    write_image_store(a.small_out, *res.small_store);
    write_labels(labels_path_for(a.small_out), res.corpus);
    write_run_config(a.small_out, g.config);
  }

  const std::size_t filtered = full.entries.size() - manifest.entries.size();
  std::printf("converted %zu of %zu files into %s\n", res.store.size(), full.entries.size(),
              a.out_store.c_str());
  if (filtered > 0) std::printf("skipped %zu files under %g kb\n", filtered, a.min_kb);
  for (const auto& s : res.skipped) std::printf("skipped %s: %s\n", s.path.c_str(), s.reason.c_str());
  return 0;
}

int cmd_split(const SplitArgs& a, const Globals& g) {
  if (a.ratios.size() != 3) usage("--ratios needs three values");
  const Corpus corpus = load_corpus(a.labels, a.store);
  const SplitAssignment s = split(corpus, {a.ratios[0], a.ratios[1], a.ratios[2]}, g.seed);
  ensure_parent(a.out);
  write_split(a.out, s);
  write_run_config(a.out, g.config);
  std::printf("train %zu, val %zu, test %zu -> %s\n", s.train.size(), s.val.size(), s.test.size(),
              a.out.c_str());
  return 0;
}

int cmd_train(const TrainArgs& a, const Globals& g) {
  const ClassifierKind kind = kind_from_name(a.model);
  if (a.store.empty() == a.embeddings.empty()) usage("give exactly one of --store or --embeddings");
  if (kind == ClassifierKind::kSmallCnn && !a.embeddings.empty())
    usage("smallcnn trains on images, not embeddings");
  if (kind == ClassifierKind::kSmallCnn && a.pca > 0) usage("--pca does not apply to smallcnn");

  const Corpus corpus = load_corpus(a.labels, a.store);
  const SplitAssignment split = read_split(a.split);
  const std::vector<int> y_train = labels_of(corpus, split.train);
  const std::vector<int> y_val = labels_of(corpus, split.val);
  const std::size_t C = corpus.n_classes();

  Model model;
  model.label_names = corpus.label_names;
  Matrix X_train, X_val;
  std::optional<EmbeddingSet> embeddings;
  if (!a.store.empty()) {
    const ImageStore store = read_image_store(a.store);
    model.input = InputKind::kPixels;
    model.input_side = kind == ClassifierKind::kSmallCnn ? kSmallImageSide : store_side(store);
    X_train = image_matrix(store, split.train, model.input_side);
    X_val = image_matrix(store, split.val, model.input_side);
  } else {
    embeddings = load_embeddings(a.embeddings);
    model.input = InputKind::kEmbeddings;
    X_train = embeddings->gather(split.train);
    X_val = embeddings->gather(split.val);
  }
  if (a.pca > 0) {
    model.pca = pca_fit(X_train, a.pca);
    if (model.pca->rank_deficient)
      std::printf("warning: data rank allows only %zu components\n", model.pca->k());
    X_train = pca_transform(*model.pca, X_train);
    if (X_val.rows() > 0) X_val = pca_transform(*model.pca, X_val);
  }
  const Matrix* val = X_val.rows() > 0 ? &X_val : nullptr;

  GradientOptions grad;
  grad.epochs = a.epochs;
  grad.learning_rate = a.lr.value_or(0.1);
  grad.l2 = a.l2;
  grad.batch_size = a.batch;
  grad.seed = g.seed;

  FitResult fit;
  switch (kind) {
    case ClassifierKind::kKnn: {
      auto c = std::make_unique<KnnClassifier>(a.k);
      c->fit(X_train, y_train, C);
      model.classifier = std::move(c);
      break;
    }
    case ClassifierKind::kGnb: {
      auto c = std::make_unique<GaussianNbClassifier>();
      c->fit(X_train, y_train, C);
      model.classifier = std::move(c);
      break;
    }
    case ClassifierKind::kLda: {
      auto c = std::make_unique<LdaClassifier>();
      c->fit(X_train, y_train, C);
      model.classifier = std::move(c);
      break;
    }
    case ClassifierKind::kSoftmax: {
      if (embeddings && !model.pca) {
        HeadResult head = train_head(*embeddings, corpus, split, grad);
        fit = std::move(head.fit);
        model.classifier = std::move(head.model);
      } else {
        auto c = std::make_unique<SoftmaxClassifier>(grad);
        fit = c->fit(X_train, y_train, C, val, y_val);
        model.classifier = std::move(c);
      }
      break;
    }
    case ClassifierKind::kLinearSvm: {
      auto c = std::make_unique<LinearSvmClassifier>(SvmOptions{a.lambda, a.epochs, g.seed});
      fit = c->fit(X_train, y_train, C, val, y_val);
      model.classifier = std::move(c);
      break;
    }
    case ClassifierKind::kMlp: {
      auto c = std::make_unique<MlpClassifier>(MlpOptions{a.hidden, grad});
      fit = c->fit(X_train, y_train, C, val, y_val);
      model.classifier = std::move(c);
      break;
    }
    case ClassifierKind::kSmallCnn: {
      CnnArchitecture arch;
      arch.n_classes = C;
      CnnTrainOptions opt;
      opt.epochs = a.epochs;
      opt.learning_rate = a.lr.value_or(1e-3);
      opt.batch_size = a.batch;
      opt.seed = g.seed;
      opt.threads = g.threads;
      CnnTrainResult res = cnn_train(X_train, y_train, X_val, y_val, arch, opt);
      fit = std::move(res.fit);
      model.classifier = std::move(res.model);
      break;
    }
  }
  model.selected_epoch = fit.selected_epoch;

  ensure_parent(a.out);
  write_model(a.out, model);
  write_run_config(a.out, g.config);
  std::printf("trained %s on %zu samples -> %s\n", a.model.c_str(), X_train.rows(), a.out.c_str());
  if (!fit.history.empty()) {
    write_history_csv(with_suffix(a.out, ".history.csv"), fit.history);
    const TrainRecord& sel = fit.history[static_cast<std::size_t>(fit.selected_epoch - 1)];
    std::printf("selected epoch %d of %zu: train acc %s, val acc %s\n", fit.selected_epoch,
                fit.history.size(), pct(sel.train_accuracy).c_str(), pct(sel.val_accuracy).c_str());
  }
  return 0;
}

int cmd_eval(const EvalArgs& a, const Globals& g) {
  Model model = read_model(a.model);
  set_threads(*model.classifier, g.threads);
  const Corpus corpus = load_corpus(a.labels, a.store);
  check_label_names(model, corpus);
  const SplitAssignment split = read_split(a.split);
  const auto& ids = subset_ids(split, a.subset);
  if (ids.empty()) fail("EmptyInput", "subset \"" + a.subset + "\" has no samples");

  Matrix X;
  if (model.input == InputKind::kPixels) {
    if (a.store.empty()) usage("this model reads images; pass --store");
    X = image_matrix(read_image_store(a.store), ids, model.input_side);
  } else {
    if (a.embeddings.empty()) usage("this model reads embeddings; pass --embeddings");
    X = load_embeddings(a.embeddings).gather(ids);
  }
  const ProbMatrix probs = model.predict_proba(X);
  const MetricsReport report =
      evaluate_probs(probs, labels_of(corpus, ids), model.label_names, a.positive);

  ensure_parent(a.report);
  write_report(report, a.report, ReportFormat::kJson);
  write_probs(a.probs.empty() ? sibling(a.report, ".mprob") : fs::path(a.probs), probs);
  if (!a.csv.empty()) write_report(report, a.csv, ReportFormat::kCsv);
  if (!report.roc_points.empty())
    write_text_file(sibling(a.report, ".roc.csv"), roc_to_csv(report.roc_points));
  write_run_config(a.report, g.config);

  std::printf("%s on %zu %s samples: accuracy %s, avg FPR %s, avg TPR %s", model.classifier
                  ? std::string(kind_name(model.classifier->kind())).c_str() : "", ids.size(),
              a.subset.c_str(), pct(report.accuracy).c_str(), pct(report.avg_fpr).c_str(),
              pct(report.avg_tpr).c_str());
  if (report.f1) std::printf(", F1 %.4f", *report.f1);
  if (report.auc) std::printf(", AUC %.4f", *report.auc);
  std::printf("\n");
  if (!report.excluded_classes.empty())
    std::printf("note: %zu classes have no samples in this subset\n", report.excluded_classes.size());
  return 0;
}

int cmd_explain(const ExplainArgs& a, const Globals& g) {
  Model model = read_model(a.model);
  if (model.input != InputKind::kPixels) usage("explanations need an image model");
  set_threads(*model.classifier, g.threads);
  const ImageStore store = read_image_store(a.store);
  const ImageRecord* rec = store.find(a.image_id);
  if (!rec) fail("MissingSample", "id \"" + a.image_id + "\" is not in the image store");
  const SquareImage img = record_to_square(*rec);

  const std::size_t side = model.input_side;
  if (img.side() != side)
    std::fprintf(stderr,
                 "warning: %zu-pixel image is resized to the model's %zu pixels for every query; "
                 "this differs from the direct conversion the model was trained on\n",
                 img.side(), side);
  ProbaFn fn = [&](const Matrix& batch) {
    if (img.side() == side) return model.predict_proba(batch);
    Matrix resized(batch.rows(), side * side);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      const GrayImage gray(img.side(), img.side(),
                           std::vector<double>(batch.row(r).begin(), batch.row(r).end()));
      const SquareImage small = resize_bilinear(gray, side);
      std::copy(small.pixels().begin(), small.pixels().end(), resized.row(r).begin());
    }
    return model.predict_proba(resized);
  };

  ExplainOptions opt;
  opt.top = a.top;
  opt.slic.n_segments = std::min(a.superpixels, img.side() * img.side());
  opt.n_samples = a.samples;
  opt.kernel_width = a.kernel_width;
  opt.surrogate.sparsity = a.sparsity;
  opt.fill = a.fill == "zero" ? FillMode::kZero : FillMode::kSegmentMean;
  opt.seed = g.seed;
  const ExplainResult res = explain(fn, img, opt);

  ensure_parent(a.out);
  write_text_file(a.out, explanations_to_json(res, opt, model.label_names));
  write_run_config(a.out, g.config);
  std::printf("%zu segments; top class %s (p = %.6f)\n", res.segmentation.n_segments,
              model.label_names[static_cast<std::size_t>(res.explanations[0].target_class)].c_str(),
              res.probabilities[static_cast<std::size_t>(res.explanations[0].target_class)]);
  for (std::size_t r = 0; r < res.explanations.size(); ++r) {
    const Explanation& e = res.explanations[r];
    fs::path overlay = a.out;
    overlay.replace_extension("");
    overlay += ".top" + std::to_string(r + 1) + ".ppm";
    render_overlay(img, res.segmentation, e, overlay);
    std::printf("  #%zu %s: r2 %.4f, strongest segment %zu%s -> %s\n", r + 1,
                model.label_names[static_cast<std::size_t>(e.target_class)].c_str(), e.local_fit_r2,
                e.top_segment(), e.degenerate ? " (degenerate)" : "", overlay.c_str());
  }
  return 0;
}

int cmd_ensemble(const EnsembleArgs& a, const Globals& g) {
  const EnsembleMetric metric = metric_from_name(a.metric);
  const Corpus corpus = read_labels(a.labels);
  const SplitAssignment split = read_split(a.split);
  const std::vector<int> y = labels_of(corpus, subset_ids(split, a.subset));
  const ProbMatrix p1 = read_probs(a.probs.at(0));
  const ProbMatrix p2 = read_probs(a.probs.at(1));
  if (p1.n() != y.size())
    fail("DimMismatch", "probability rows (" + std::to_string(p1.n()) + ") differ from the " +
                            a.subset + " subset size (" + std::to_string(y.size()) + ")");
  const CombinationResult res = optimize_alpha(p1, p2, y, metric, a.grid, g.threads);

  nlohmann::json j = nlohmann::json::parse(combination_to_json(res));
  j["tuning_subset"] = a.subset;
  if (!a.test_probs.empty()) {
    const std::vector<int> y_test = labels_of(corpus, split.test);
    const ProbMatrix t1 = read_probs(a.test_probs.at(0));
    const ProbMatrix t2 = read_probs(a.test_probs.at(1));
    if (t1.n() != y_test.size()) fail("DimMismatch", "test probability rows differ from the test subset size");
    j["test"] = {{"value", metric_value(metric, combine(t1, t2, res.alpha), y_test)},
                 {"value_model1", metric_value(metric, t1, y_test)},
                 {"value_model2", metric_value(metric, t2, y_test)}};
  }
  ensure_parent(a.out);
  write_text_file(a.out, j.dump(2) + "\n");
  write_text_file(sibling(a.out, ".curve.csv"), alpha_curve_csv(res));
  write_run_config(a.out, g.config);
  std::printf("alpha %.4f: %s %.6f (alpha=0: %.6f, alpha=1: %.6f)\n", res.alpha,
              res.metric_name.c_str(), res.objective_value, res.curve.front().value,
              res.curve.back().value);
  if (j.contains("test"))
    std::printf("test %s at alpha: %.6f\n", res.metric_name.c_str(), j["test"]["value"].get<double>());
  return 0;
}

int cmd_synth(const SynthArgs& a, const Globals& g) {
  if (a.max_kb < a.min_kb) usage("--max-kb must not be below --min-kb");
  SyntheticOptions opt;
  opt.families = a.families;
  opt.per_family = a.per_family;
  opt.min_bytes = static_cast<std::size_t>(a.min_kb * 1024);
  opt.max_bytes = static_cast<std::size_t>(a.max_kb * 1024);
  opt.noise = a.noise;
  opt.embedding_dim = a.embedding_dim;
  opt.embedding_sigma = a.embedding_sigma;
  opt.seed = g.seed;
  const SyntheticCorpus sc = write_synthetic_corpus(a.out_dir, opt);
  write_run_config(fs::path(a.out_dir) / "synth", g.config);
  std::printf("wrote %zu files in %zu families, manifest %s\n", sc.manifest.entries.size(),
              sc.corpus.n_classes(), (fs::path(a.out_dir) / "manifest.csv").c_str());
  return 0;
}

}  // namespace malvis::cli
