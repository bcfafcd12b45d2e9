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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docmt/data.hpp"
#include "docmt/decoding.hpp"
#include "docmt/evaluation.hpp"
#include "docmt/model.hpp"
#include "docmt/training.hpp"

namespace docmt {

// Everything a run needs. Keys are addressed as "section.key", for example
// "model.dim" or "train.epochs"; the file form is INI with the same sections.
struct RunConfig {
  ModelConfig model;

  std::filesystem::path train_src;
  std::filesystem::path train_tgt;
  std::filesystem::path dev_src;
  std::filesystem::path dev_tgt;
  // Includes the reserved entries; 0 means unlimited.
  std::size_t vocab_size = 0;
  std::size_t min_freq = 1;
  // 0 means k (disjoint chunks).
  std::size_t train_stride = 0;

  TrainConfig train;
  DecodeOptions decode;
  // 0 means the last window position (k).
  std::size_t position = 0;

  std::filesystem::path run_dir = "run";

  RunConfig();

  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  // Applies every key of an INI file on top of the current values.
  void load(const std::filesystem::path& path);
  // INI text of every key, in keys() order.
  std::string echo() const;
};

// Exclusive writer lock on a run directory; released on destruction.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct RunPaths {
  std::filesystem::path dir;
  std::filesystem::path config_echo() const { return dir / "config.echo"; }
  std::filesystem::path metrics() const { return dir / "metrics.log"; }
  std::filesystem::path checkpoints() const { return dir / "checkpoints"; }
  std::filesystem::path outputs() const { return dir / "outputs"; }
  std::filesystem::path src_vocab() const { return dir / "vocab.src"; }
  std::filesystem::path tgt_vocab() const { return dir / "vocab.tgt"; }
  std::filesystem::path train_data() const { return dir / "data" / "train.bin"; }
  std::filesystem::path dev_data() const { return dir / "data" / "dev.bin"; }
  std::filesystem::path stats() const { return dir / "data" / "stats.txt"; }
};

// Builds vocabularies from the training corpus and writes chunked train/dev
// datasets. Returns the stats text.
std::string run_preprocess(const RunConfig& cfg);

// Trains from the preprocessed data. With resume, continues from
// checkpoints/last.ckpt. Returns a one-line-per-epoch summary.
std::string run_train(const RunConfig& cfg, bool resume);

// Model plus the vocabularies it was trained with.
struct LoadedModel {
  Model model;
  Vocab src_vocab;
  Vocab tgt_vocab;
};

// Empty checkpoint picks best.ckpt, then last.ckpt, then init.ckpt.
LoadedModel load_run_model(const RunConfig& cfg, const std::filesystem::path& checkpoint = {});

struct TranslationOutput {
  // One sentence per line, blank line between documents.
  std::string text;
  // doc \t i \t j \t text lines, 1-based.
  std::string grid;
  std::vector<TranslationGrid> grids;
  // Window, separator and truncation counts.
  std::string summary;
};

// k = 0 uses the model's k; position = 0 uses the last position.
TranslationOutput translate_documents(const LoadedModel& m, const std::vector<std::vector<Tokens>>& docs,
                                      std::size_t k, std::size_t position, const DecodeOptions& opts);

std::string render_documents(const std::vector<std::vector<std::string>>& docs);

// Human-readable single report: "BLEU = 77.88, p1/p2/p3/p4 (BP = ..., ...)".
std::string render_bleu(const BleuReport& r);
// Files are compared line by line; blank reference lines are skipped.
BleuReport bleu_files(const std::filesystem::path& hyp, const std::filesystem::path& ref);

// Grid dump text plus a reference document file.
std::vector<PositionRow> per_position_from_dump(std::string_view grid_dump, std::string_view refs);

ContrastiveReport score_contrastive_file(const LoadedModel& m, const std::filesystem::path& groups,
                                         CandidateScore mode);

enum class MaskKind { kEncoderLocal, kDecoderLocal, kCausal };
MaskKind parse_mask_kind(std::string_view name);
std::string render_mask_for(std::string_view tokens, std::string_view sep_token, MaskKind kind);

}  // namespace docmt
