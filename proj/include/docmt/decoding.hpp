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

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "docmt/model.hpp"

namespace docmt {

// Log-probabilities of the next token given a prefix that starts with bos.
// Non-finite entries are never expanded.
using StepScorer = std::function<std::vector<double>(std::span<const TokenId> prefix)>;

struct BeamOptions {
  std::size_t beam_size = 4;
  std::size_t max_len = 64;
  double alpha = 0.6;
  TokenId bos_id = 1;
  TokenId eos_id = 2;
};

struct Hypothesis {
  // Generated tokens after bos; ends with eos when finished.
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  bool finished = false;
};

struct BeamResult {
  // Best hypothesis without the trailing eos.
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  // log_prob / len^alpha, len counting eos.
  double score = 0.0;
  // Nothing finished within max_len; tokens is the best unfinished prefix.
  bool truncated = false;
};

double length_normalized(double log_prob, std::size_t length, double alpha);

// Candidates are ranked by log-probability; ties go to the lower token id,
// then to the earlier parent. Finished candidates occupy beam slots, and the
// search stops once beam_size hypotheses have finished or none is alive.
BeamResult beam_search(const StepScorer& scorer, const BeamOptions& opts);

// Scorer over a trained model for one source chunk. pad and bos are never
// proposed.
StepScorer model_scorer(const Model& model, std::span<const TokenId> src);

struct DecodeOptions {
  std::size_t beam_size = 4;
  double alpha = 0.6;
  // Generation budget: max_len_a * |src| + max_len_b, capped by the model.
  double max_len_a = 2.0;
  std::size_t max_len_b = 10;
};

BeamResult translate_chunk(const Model& model, std::span<const TokenId> src, const DecodeOptions& opts);

enum class SplitDiagnostic { kNone, kUnderflow, kOverflow };

struct SplitResult {
  std::vector<std::vector<TokenId>> sentences;
  SplitDiagnostic diagnostic = SplitDiagnostic::kNone;
  std::size_t separators = 0;
};

// Always returns exactly expected_k sentences: missing ones are empty,
// surplus splits are merged into the last sentence.
SplitResult split_sentences(std::span<const TokenId> tokens, TokenId sep_id, std::size_t expected_k);

// Translations of one document keyed by (sentence i, window position j), both
// 1-based, with j <= min(i, k).
struct TranslationGrid {
  std::size_t sentences = 0;
  std::size_t k = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<TokenId>> entries;
  std::size_t windows = 0;
  std::size_t underflow = 0;
  std::size_t overflow = 0;
  std::size_t truncated = 0;

  const std::vector<TokenId>& at(std::size_t i, std::size_t j) const;
};

// Called with (window start, window size, chunk result) for every window;
// lets tests and the CLI observe raw outputs.
using WindowObserver = std::function<void(std::size_t, std::size_t, const BeamResult&)>;

// Translates every stride-1 window of k source sentences.
TranslationGrid sliding_translate(const Model& model, std::span<const std::vector<TokenId>> document, std::size_t k,
                                  const DecodeOptions& opts, const WindowObserver& observer = {});

// Same windowing over an arbitrary chunk translator.
using ChunkTranslator = std::function<BeamResult(std::span<const TokenId> src)>;
TranslationGrid sliding_translate(const ChunkTranslator& translate, std::span<const std::vector<TokenId>> document,
                                  std::size_t k, TokenId sep_id, const WindowObserver& observer = {});

// Sentence i taken from entry (i, min(i, j)).
std::vector<std::vector<TokenId>> assemble_position(const TranslationGrid& grid, std::size_t j);

}  // namespace docmt
