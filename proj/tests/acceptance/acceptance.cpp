// Copyright 2026 The docmt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Release acceptance harness. Prints one line per criterion:
//   [PASS] N name: detail
// and exits nonzero when any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "docmt/docmt.h"
#include "docmt/error.hpp"
#include "docmt/masking.hpp"
#include "docmt/model.hpp"
#include "docmt/pipeline.hpp"
#include "support/gradcheck.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace docmt;

namespace {

// Tolerances and budgets.
constexpr double kCausalTol = 1e-10;
constexpr double kDegenerateTol = 1e-12;
constexpr double kGradTol = 1e-4;
constexpr double kBleuExample = 77.88;
constexpr double kBleuExampleTol = 0.01;
constexpr double kAgreementLst = 0.90;
constexpr double kAgreementBaseline = 0.55;
constexpr double kPositionTol = 0.2;
constexpr double kTrainBudgetSeconds = 15 * 60;
constexpr double kMaskBudgetSeconds = 5;
constexpr double kLocalityBudgetSeconds = 30;
constexpr double kGradBudgetSeconds = 5 * 60;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

constexpr TokenId kSep = 3;

std::vector<TokenId> random_chunk(Rng& rng, std::size_t len, std::size_t vocab, double sep_rate) {
  std::vector<TokenId> t(len);
  for (auto& v : t) v = rng.uniform() < sep_rate ? kSep : static_cast<TokenId>(5 + rng.below(vocab - 5));
  return t;
}

ModelConfig tiny_config(Variant variant, std::size_t dim, std::size_t heads) {
  ModelConfig cfg;
  cfg.dim = dim;
  cfg.heads = heads;
  cfg.encoder_layers = 2;
  cfg.decoder_layers = 2;
  cfg.ffn_dim = 2 * dim;
  cfg.vocab_src = 16;
  cfg.vocab_tgt = 16;
  cfg.k = 2;
  cfg.max_positions = 64;
  cfg.dropout = 0.0;
  cfg.variant = variant;
  return cfg;
}

// Pairwise oracle: i and j share a sentence unless a separator sits in
// (min(i, j), max(i, j)].
bool separated(std::span<const TokenId> t, std::size_t i, std::size_t j) {
  for (std::size_t p = std::min(i, j) + 1; p <= std::max(i, j); ++p)
    if (t[p] == kSep) return true;
  return false;
}

Outcome masking_equivalence() {
  const auto start = Clock::now();
  Rng rng(101);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + rng.below(64);
    const auto tokens = random_chunk(rng, len, 16, rng.uniform(0.0, 0.5));
    const MaskMatrix enc = local_block_mask(tokens, kSep);
    const MaskMatrix dec = decoder_local_mask(tokens, kSep);
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t j = 0; j < len; ++j) {
        const double want_enc = separated(tokens, i, j) ? kNegInf : 0.0;
        const double want_dec = (j > i || separated(tokens, i, j)) ? kNegInf : 0.0;
        mismatches += enc(i, j) != want_enc;
        mismatches += dec(i, j) != want_dec;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < kMaskBudgetSeconds,
          "1000 sequences, " + std::to_string(mismatches) + " mismatched entries, " + fmt(elapsed, 3) + " s"};
}

Outcome locality() {
  const auto start = Clock::now();
  const ModelConfig cfg = tiny_config(Variant::kLongShort, 16, 4);
  const Model model(cfg, 202);
  Rng rng(203);
  double worst = 0.0;
  std::size_t trials = 0;
  while (trials < 100) {
    const std::size_t len = 4 + rng.below(29);
    auto tokens = random_chunk(rng, len, 16, 0.2);
    const auto seg = segment_index(tokens, kSep);
    const int segments = seg.back() + 1;
    if (segments < 2) continue;
    const int g = static_cast<int>(rng.below(static_cast<std::size_t>(segments)));
    std::vector<std::size_t> outside;
    for (std::size_t p = 0; p < len; ++p)
      if (seg[p] != g && tokens[p] != kSep) outside.push_back(p);
    if (outside.empty()) continue;
    Tape t1(false), t2(false);
    const auto before = model.encode(t1, tokens);
    // Perturb a random nonempty subset of the non-separator tokens outside g.
    rng.shuffle(outside);
    const std::size_t count = 1 + rng.below(outside.size());
    for (std::size_t n = 0; n < count; ++n) {
      TokenId& tok = tokens[outside[n]];
      tok = static_cast<TokenId>(5 + (tok - 5 + 1 + rng.below(10)) % 11);
    }
    const auto after = model.encode(t2, tokens);
    for (std::size_t l = 0; l < before.layers.size(); ++l) {
      const Tensor& a = before.layers[l].local.value();
      const Tensor& b = after.layers[l].local.value();
      for (std::size_t p = 0; p < len; ++p)
        if (seg[p] == g)
          for (std::size_t c = 0; c < cfg.dim; ++c) worst = std::max(worst, std::abs(a.at(p, c) - b.at(p, c)));
    }
    ++trials;
  }
  const double elapsed = seconds_since(start);
  return {worst == 0.0 && elapsed < kLocalityBudgetSeconds,
          "100 trials, max local-stream change " + fmt(worst) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome causality() {
  double worst = 0.0;
  for (Variant v : {Variant::kBaseline, Variant::kLongShort}) {
    const ModelConfig cfg = tiny_config(v, 16, 4);
    const Model model(cfg, 303);
    Rng rng(304);
    for (int trial = 0; trial < 100; ++trial) {
      const auto src = random_chunk(rng, 2 + rng.below(20), 16, 0.15);
      std::vector<TokenId> tgt = random_chunk(rng, 2 + rng.below(20), 16, 0.15);
      tgt[0] = cfg.bos_id;
      const std::size_t t = rng.below(tgt.size() - 1);
      const Tensor memory = model.encode(src);
      const Tensor a = model.decode_logits(memory, src, tgt);
      for (std::size_t p = t + 1; p < tgt.size(); ++p)
        tgt[p] = rng.uniform() < 0.2 ? kSep : static_cast<TokenId>(5 + rng.below(11));
      const Tensor b = model.decode_logits(memory, src, tgt);
      for (std::size_t r = 0; r <= t; ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) worst = std::max(worst, std::abs(a.at(r, c) - b.at(r, c)));
    }
  }
  return {worst <= kCausalTol, "2 variants x 100 trials, max change " + fmt(worst) + " (tol 1e-10)"};
}

Outcome degeneration() {
  const ModelConfig cfg = tiny_config(Variant::kLongShort, 16, 4);
  const Model model(cfg, 404);
  Rng rng(405);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto src = random_chunk(rng, 1 + rng.below(20), 16, 0.0);
    auto tgt = random_chunk(rng, 1 + rng.below(20), 16, 0.0);
    tgt[0] = cfg.bos_id;
    Tape tape(false);
    const auto enc = model.encode(tape, src);
    const auto dec = model.decode(tape, enc.memory, src, tgt);
    for (const auto& s : enc.layers) worst = std::max(worst, max_abs_diff(s.global.value(), s.local.value()));
    for (const auto& s : dec.layers) worst = std::max(worst, max_abs_diff(s.global.value(), s.local.value()));
  }
  bool counts_ok = true;
  for (std::size_t d : {8, 16, 64, 512}) {
    ModelConfig lst = tiny_config(Variant::kLongShort, d, 4);
    lst.vocab_src = 10296;
    lst.vocab_tgt = 16018;
    ModelConfig base = lst;
    base.variant = Variant::kBaseline;
    counts_ok = counts_ok && param_count(lst) - param_count(base) == 2 * (2 * d * d + d);
  }
  ModelConfig lst512 = tiny_config(Variant::kLongShort, 512, 8);
  ModelConfig base512 = lst512;
  base512.variant = Variant::kBaseline;
  const std::size_t delta512 = param_count(lst512) - param_count(base512);
  return {worst <= kDegenerateTol && counts_ok,
          "max stream gap " + fmt(worst) + " (tol 1e-12), param delta at d=512 " + std::to_string(delta512) +
              (counts_ok ? " matches" : " does not match") + " 2(2d^2+d)"};
}

Outcome gradient_check() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0;
  for (Variant v : {Variant::kBaseline, Variant::kLongShort}) {
    const ModelConfig cfg = tiny_config(v, 8, 2);
    Model model(cfg, 506);
    const std::vector<TokenId> src{5, 6, 7, 8, kSep, 9, 10, 11, kSep, 12, 13, 14};
    const std::vector<TokenId> tgt{6, 7, 8, kSep, 9, 10, 11, kSep, 12, 13, 14};
    const TeacherForcing tf = teacher_forcing(tgt, cfg);
    auto loss = [&](Tape& tape) { return model.loss(tape, src, tf, 0.1, Reduction::kMean); };
    const auto r = testing::param_grad_check(loss, model.params().list(), 1e-4);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
  }
  const double elapsed = seconds_since(start);
  return {worst <= kGradTol && elapsed < kGradBudgetSeconds,
          std::to_string(checked) + " scalars over both variants, max relative error " + fmt(worst) + " (tol 1e-4), " +
              fmt(elapsed, 3) + " s"};
}

// Shared synthetic-task setup for the training criteria.
struct SyntheticRun {
  RunConfig cfg;
  double train_seconds = 0.0;
};

void write_synthetic_data(const fs::path& dir) {
  synthetic::Options o;
  o.documents = 5000;
  o.seed = 1;
  synthetic::write_corpus(synthetic::make_corpus(o), dir / "train.src", dir / "train.tgt");
  o.documents = 200;
  o.seed = 2;
  synthetic::write_corpus(synthetic::make_corpus(o), dir / "dev.src", dir / "dev.tgt");
}

SyntheticRun train_synthetic(const fs::path& data, const fs::path& run, Variant variant, std::size_t k,
                             std::size_t stride, std::size_t epochs) {
  SyntheticRun r;
  RunConfig& cfg = r.cfg;
  cfg.train_src = data / "train.src";
  cfg.train_tgt = data / "train.tgt";
  cfg.dev_src = data / "dev.src";
  cfg.dev_tgt = data / "dev.tgt";
  cfg.run_dir = run;
  cfg.model.variant = variant;
  cfg.model.k = k;
  cfg.train_stride = stride;
  cfg.model.dim = 32;
  cfg.model.heads = 4;
  cfg.model.ffn_dim = 64;
  cfg.model.encoder_layers = 2;
  cfg.model.decoder_layers = 2;
  cfg.model.dropout = 0.1;
  cfg.train.epochs = epochs;
  cfg.train.max_tokens = 128;
  cfg.train.optimizer.warmup = 400;
  cfg.train.optimizer.scale = 0.5;
  fs::remove_all(run);
  const auto start = Clock::now();
  run_preprocess(cfg);
  run_train(cfg, false);
  r.train_seconds = seconds_since(start);
  return r;
}

std::vector<TextDocument> balanced_test_set(std::size_t documents, std::uint64_t seed) {
  synthetic::Options o;
  o.documents = documents;
  o.seed = seed;
  o.balanced = true;
  return synthetic::make_corpus(o);
}

std::vector<std::vector<Tokens>> sources(const std::vector<TextDocument>& docs) {
  std::vector<std::vector<Tokens>> out;
  for (const auto& d : docs) out.push_back(d.src);
  return out;
}

// Accuracy over every sentence whose agreement token is determined (s >= 2),
// reading each sentence's translation at the last window position.
double agreement_accuracy(const SyntheticRun& run, const std::vector<TextDocument>& test) {
  const LoadedModel m = load_run_model(run.cfg);
  const auto out = translate_documents(m, sources(test), 0, 0, run.cfg.decode);
  std::size_t correct = 0, total = 0;
  for (std::size_t d = 0; d < test.size(); ++d) {
    const auto& grid = out.grids[d];
    const auto sentences = assemble_position(grid, grid.k);
    for (std::size_t s = 1; s < test[d].src.size(); ++s) {
      const std::string hyp = join(m.tgt_vocab.decode(sentences[s]), " ");
      correct += synthetic::agreement_correct(hyp, synthetic::expected_agreement(test[d], s));
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

Outcome synthetic_consistency(const fs::path& work) {
  const fs::path data = work / "synthetic";
  fs::create_directories(data);
  write_synthetic_data(data);
  const auto test = balanced_test_set(500, 3);
  const SyntheticRun lst = train_synthetic(data, work / "lst_k2", Variant::kLongShort, 2, 2, 6);
  const double lst_acc = agreement_accuracy(lst, test);
  const SyntheticRun base = train_synthetic(data, work / "baseline_k1", Variant::kBaseline, 1, 1, 6);
  const double base_acc = agreement_accuracy(base, test);
  const bool pass = lst_acc >= kAgreementLst && base_acc <= kAgreementBaseline &&
                    lst.train_seconds <= kTrainBudgetSeconds && base.train_seconds <= kTrainBudgetSeconds;
  return {pass, "lst k=2 accuracy " + fmt(lst_acc) + " (need >= 0.90, trained in " + fmt(lst.train_seconds, 3) +
                    " s), baseline k=1 accuracy " + fmt(base_acc) + " (need <= 0.55, trained in " +
                    fmt(base.train_seconds, 3) + " s)"};
}

Outcome position_shape(const fs::path& work) {
  const fs::path data = work / "synthetic";
  if (!fs::exists(data / "train.src")) {
    fs::create_directories(data);
    write_synthetic_data(data);
  }
  // Stride 1 so training also sees the clipped 2- and 1-sentence windows that
  // end every document at inference. With disjoint chunks the k=3 model stays
  // at chance on the agreement token.
  const SyntheticRun run = train_synthetic(data, work / "lst_k3", Variant::kLongShort, 3, 1, 4);
  const auto test = balanced_test_set(200, 4);
  const LoadedModel m = load_run_model(run.cfg);
  const auto out = translate_documents(m, sources(test), 0, 0, run.cfg.decode);
  std::vector<std::vector<std::string>> refs;
  for (const auto& d : test) {
    refs.emplace_back();
    for (const auto& s : d.tgt) refs.back().push_back(join(s, " "));
  }
  const auto rows = per_position_report(out.grids, refs, m.tgt_vocab);
  std::cout << render_position_table(rows);
  const double j1 = rows.front().report.bleu;
  const double j3 = rows.back().report.bleu;
  return {rows.size() == 3 && j3 >= j1 - kPositionTol,
          "BLEU(j=1) " + format_bleu(j1) + ", BLEU(j=3) " + format_bleu(j3) + " (need j=3 >= j=1 - 0.2)"};
}

Outcome bleu_oracle() {
  const std::vector<std::string> hyp{"a b c d"}, ref{"a b c d e"};
  const double example = bleu(hyp, ref).bleu;
  const std::vector<std::string> same{"the cat sat on the mat .", "a dog barked at the mailman !"};
  const double identity = bleu(same, same).bleu;
  return {std::abs(example - kBleuExample) <= kBleuExampleTol && identity == 100.0,
          "short-hypothesis example " + fmt(example, 6) + " (want 77.88 +- 0.01), identity " + fmt(identity, 6)};
}

// C API pipeline run; returns translation, grid, metrics log and final
// checkpoint bytes concatenated, or an error description.
std::string capi_pipeline(const fs::path& data, const fs::path& run, bool& ok) {
  ok = false;
  fs::remove_all(run);
  docmt_config* cfg = nullptr;
  if (docmt_config_create(&cfg) != DOCMT_OK) return docmt_last_error();
  const std::vector<std::pair<std::string, std::string>> settings{
      {"data.train_src", (data / "train.src").string()},
      {"data.train_tgt", (data / "train.tgt").string()},
      {"data.dev_src", (data / "dev.src").string()},
      {"data.dev_tgt", (data / "dev.tgt").string()},
      {"model.dim", "16"},
      {"model.heads", "2"},
      {"model.ffn_dim", "32"},
      {"model.k", "2"},
      {"train.epochs", "100"},
      {"train.max_steps", "100"},
      {"train.max_tokens", "128"},
      {"run.dir", run.string()},
      {"run.seed", "7"},
  };
  std::string result;
  docmt_model* model = nullptr;
  char* translation = nullptr;
  char* grid = nullptr;
  auto fail = [&] { result = std::string(docmt_last_error()); };
  do {
    bool set_ok = true;
    for (const auto& [k, v] : settings) set_ok = set_ok && docmt_config_set(cfg, k.c_str(), v.c_str()) == DOCMT_OK;
    if (!set_ok || docmt_preprocess(cfg, nullptr) != DOCMT_OK || docmt_train(cfg, 0, nullptr) != DOCMT_OK ||
        docmt_model_load(cfg, nullptr, &model) != DOCMT_OK ||
        docmt_translate(model, (data / "test.src").c_str(), 0, 0, 0, &translation, &grid, nullptr) != DOCMT_OK) {
      fail();
      break;
    }
    result = std::string(translation) + "\x1e" + grid + "\x1e" + read_file(run / "metrics.log") + "\x1e" +
             read_file(run / "checkpoints" / "last.ckpt");
    ok = true;
  } while (false);
  docmt_string_free(translation);
  docmt_string_free(grid);
  docmt_model_destroy(model);
  docmt_config_destroy(cfg);
  return result;
}

Outcome determinism(const fs::path& work) {
  const fs::path data = work / "determinism";
  fs::create_directories(data);
  synthetic::Options o;
  o.documents = 300;
  o.seed = 11;
  synthetic::write_corpus(synthetic::make_corpus(o), data / "train.src", data / "train.tgt");
  o.documents = 20;
  o.seed = 12;
  synthetic::write_corpus(synthetic::make_corpus(o), data / "dev.src", data / "dev.tgt");
  o.seed = 13;
  synthetic::write_corpus(synthetic::make_corpus(o), data / "test.src", data / "test.tgt");
  bool ok_a = false, ok_b = false;
  const std::string a = capi_pipeline(data, work / "determinism_a", ok_a);
  if (!ok_a) return {false, "first run failed: " + a};
  const std::string b = capi_pipeline(data, work / "determinism_b", ok_b);
  if (!ok_b) return {false, "second run failed: " + b};
  return {a == b, "preprocess, 100 training steps and translation twice: " +
                      std::string(a == b ? "byte-identical" : "outputs differ") + " (" + std::to_string(a.size()) +
                      " bytes compared)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"docmt acceptance checks"};
  std::vector<int> only;
  std::string work = "acceptance_work";
  std::string report_path;
  bool keep = false;
  app.add_option("--only", only, "Run only these criteria (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--work", work, "Scratch directory for training runs");
  app.add_flag("--keep", keep, "Keep the scratch directory");
  app.add_option("--report", report_path, "Also write the result lines to this file");
  CLI11_PARSE(app, argc, argv);

  const fs::path work_dir = fs::absolute(work);
  fs::create_directories(work_dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"masking equivalence", masking_equivalence},
      {"locality invariant", locality},
      {"causality invariant", causality},
      {"degeneration", degeneration},
      {"gradient check", gradient_check},
      {"synthetic consistency", [&] { return synthetic_consistency(work_dir); }},
      {"per-position shape", [&] { return position_shape(work_dir); }},
      {"bleu oracle", bleu_oracle},
      {"determinism", [&] { return determinism(work_dir); }},
  };

  std::string report;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), n) == only.end()) continue;
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    failures += !r.pass;
    const std::string line =
        std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(n) + " " + criteria[i].first + ": " + r.detail;
    std::cout << line << std::endl;
    report += line + "\n";
  }
  if (!report_path.empty()) write_file(report_path, report);
  if (!keep) fs::remove_all(work_dir);
  return failures == 0 ? 0 : 1;
}
