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


#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "malvis/error.hpp"
#include "run_config.hpp"

using namespace malvis::cli;

int main(int argc, char** argv) {
  CLI::App app{"malvis: image-based malware classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::function<int()> run;

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Turn binaries listed in a manifest into an image store");
  c->add_option("--manifest", conv.manifest, "CSV with header path,label")->required();
  c->add_option("--out-store", conv.out_store, "Output .mimg store")->required();
  c->add_option("--size", conv.size, "Side of the square images")->check(CLI::Range(1, 65535));
  c->add_option("--min-kb", conv.min_kb, "Skip files smaller than this many kilobytes");
  c->add_option("--small-out", conv.small_out, "Optional second store of small images");
  c->add_option("--small-size", conv.small_size, "Side of the small images")->check(CLI::Range(1, 65535));
  c->add_option("--channels", conv.channels, "1 (gray) or 3 (replicated)")->check(CLI::IsMember({1, 3}));
  c->callback([&] { run = [&] { return cmd_convert(conv, g); }; });

  SplitArgs spl;
  auto* s = app.add_subcommand("split", "Stratified train/val/test split");
  s->add_option("--store", spl.store, "Image store (its label sidecar is used)");
  s->add_option("--labels", spl.labels, "id,label CSV (default: the store's sidecar)");
  s->add_option("--ratios", spl.ratios, "Train,val,test fractions")->delimiter(',')->expected(3);
  s->add_option("--out", spl.out, "Output split JSON")->required();
  s->callback([&] { run = [&] { return cmd_split(spl, g); }; });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit a classifier");
  t->add_option("--model", tr.model, "knn, gnb, lda, softmax, linear_svm, mlp or smallcnn")->required();
  auto* t_store = t->add_option("--store", tr.store, "Image store");
  auto* t_emb = t->add_option("--embeddings", tr.embeddings, "Embedding file (.memb)");
  t_store->excludes(t_emb);
  t->add_option("--labels", tr.labels, "id,label CSV (default: the store's sidecar)");
  t->add_option("--split", tr.split, "Split JSON")->required();
  t->add_option("--out", tr.out, "Output .mmod model")->required();
  t->add_option("--pca", tr.pca, "Project onto this many principal components first (0 = off)");
  t->add_option("--epochs", tr.epochs, "Training epochs")->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.lr, "Learning rate (default 0.1, or 1e-3 for smallcnn)");
  t->add_option("--l2", tr.l2, "L2 penalty for softmax and mlp");
  t->add_option("--batch", tr.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  t->add_option("--k", tr.k, "Neighbours for knn")->check(CLI::PositiveNumber);
  t->add_option("--hidden", tr.hidden, "Hidden units for mlp")->check(CLI::PositiveNumber);
  t->add_option("--lambda", tr.lambda, "Regularisation for linear_svm")->check(CLI::PositiveNumber);
  t->callback([&] { run = [&] { return cmd_train(tr, g); }; });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model on one split subset");
  e->add_option("--model", ev.model, "Model file (.mmod)")->required();
  auto* e_store = e->add_option("--store", ev.store, "Image store");
  auto* e_emb = e->add_option("--embeddings", ev.embeddings, "Embedding file (.memb)");
  e_store->excludes(e_emb);
  e->add_option("--labels", ev.labels, "id,label CSV (default: the store's sidecar)");
  e->add_option("--split", ev.split, "Split JSON")->required();
  e->add_option("--subset", ev.subset, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  e->add_option("--report", ev.report, "Output metrics JSON")->required();
  e->add_option("--probs", ev.probs, "Output .mprob (default: report path with .mprob)");
  e->add_option("--csv", ev.csv, "Also write the metrics as CSV here");
  e->add_option("--positive", ev.positive, "Positive class for binary metrics")->check(CLI::Range(0, 1));
  e->callback([&] { run = [&] { return cmd_eval(ev, g); }; });

  ExplainArgs ex;
  auto* x = app.add_subcommand("explain", "Super-pixel explanation of one prediction");
  x->add_option("--model", ex.model, "Model file (.mmod), pixel input")->required();
  x->add_option("--store", ex.store, "Image store holding the image")->required();
  x->add_option("--image-id", ex.image_id, "Sample id")->required();
  x->add_option("--out", ex.out, "Output explanation JSON; overlays go next to it")->required();
  x->add_option("--superpixels", ex.superpixels, "Requested SLIC segments")->check(CLI::PositiveNumber);
  x->add_option("--samples", ex.samples, "Perturbation samples")->check(CLI::PositiveNumber);
  x->add_option("--top", ex.top, "Explain this many most probable classes")->check(CLI::PositiveNumber);
  x->add_option("--sparsity", ex.sparsity, "Nonzero surrogate weights")->check(CLI::PositiveNumber);
  x->add_option("--kernel-width", ex.kernel_width, "Proximity kernel width")->check(CLI::PositiveNumber);
  x->add_option("--fill", ex.fill, "Fill for removed segments")->check(CLI::IsMember({"mean", "zero"}));
  x->callback([&] { run = [&] { return cmd_explain(ex, g); }; });

  EnsembleArgs en;
  auto* n = app.add_subcommand("ensemble", "Convex combination of two models' probabilities");
  n->add_option("--probs", en.probs, "Two .mprob files scored on the tuning subset")->required()->expected(2);
  n->add_option("--test-probs", en.test_probs, "Two .mprob files scored on the test subset")->expected(2);
  n->add_option("--labels", en.labels, "Corpus id,label CSV")->required();
  n->add_option("--split", en.split, "Split JSON giving the row order")->required();
  n->add_option("--subset", en.subset, "Tuning subset")->check(CLI::IsMember({"train", "val", "test"}));
  n->add_option("--metric", en.metric, "accuracy, avg_tpr, f1, auc or neg_avg_fpr");
  n->add_option("--grid", en.grid, "Alpha grid step")->check(CLI::Range(1e-6, 1.0));
  n->add_option("--out", en.out, "Output combination JSON")->required();
  n->callback([&] { run = [&] { return cmd_ensemble(en, g); }; });

  SynthArgs sy;
  auto* y = app.add_subcommand("synth", "Generate the synthetic benchmark corpus");
  y->add_option("--out-dir", sy.out_dir, "Output directory")->required();
  y->add_option("--families", sy.families, "Number of families")->check(CLI::Range(2, 1000));
  y->add_option("--per-family", sy.per_family, "Files per family")->check(CLI::PositiveNumber);
  y->add_option("--min-kb", sy.min_kb, "Smallest file size in kilobytes")->check(CLI::PositiveNumber);
  y->add_option("--max-kb", sy.max_kb, "Largest file size in kilobytes")->check(CLI::PositiveNumber);
  y->add_option("--noise", sy.noise, "Fraction of bytes replaced by noise")->check(CLI::Range(0.0, 1.0));
  y->add_option("--embedding-dim", sy.embedding_dim, "Embedding width")->check(CLI::PositiveNumber);
  y->add_option("--embedding-sigma", sy.embedding_sigma, "Embedding noise level");
  y->callback([&] { run = [&] { return cmd_synth(sy, g); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return static_cast<int>(malvis::ErrorCode::kUsage);
  }

  for (const CLI::App* sub : app.get_subcommands()) g.config = resolved_config(app, *sub);
  try {
    return run();
  } catch (const malvis::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return static_cast<int>(err.code());
  } catch (const std::filesystem::filesystem_error& err) {
    std::fprintf(stderr, "error: IoError: %s\n", err.what());
    return static_cast<int>(malvis::ErrorCode::kData);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return static_cast<int>(malvis::ErrorCode::kData);
  }
}
