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

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docmt/data.hpp"
#include "docmt/decoding.hpp"
#include "docmt/model.hpp"

namespace docmt {

// Whitespace split, then trailing punctuation (.,!?;:) split off each token.
Tokens bleu_tokenize(std::string_view text);

struct BleuReport {
  double bleu = 0.0;
  std::array<double, 4> precisions{};
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  double brevity_penalty = 1.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
};

// Corpus BLEU with clipped n-gram counts, n = 1..4, and no smoothing: any zero
// precision gives 0.
BleuReport bleu(std::span<const std::string> hyps, std::span<const std::string> refs);
BleuReport bleu_tokens(std::span<const Tokens> hyps, std::span<const Tokens> refs);
// Two decimals, as printed by every report.
std::string format_bleu(double value);

struct PositionRow {
  std::size_t j = 0;
  BleuReport report;
};

// refs[d][i] is the reference text of sentence i of document d.
std::vector<PositionRow> per_position_report(std::span<const TranslationGrid> grids,
                                             std::span<const std::vector<std::string>> refs, const Vocab& tgt_vocab);
// "j\tbleu" lines.
std::string render_position_rows(std::span<const PositionRow> rows);
// Aligned table with n-gram precisions and brevity penalty.
std::string render_position_table(std::span<const PositionRow> rows);

struct ContrastiveGroup {
  // Source context followed by the sentence under test.
  std::vector<std::string> src;
  // Full target chunks; sentences separated by the literal <sep> token.
  std::vector<std::string> candidates;
  // 0-based.
  std::size_t true_index = 0;
  std::string phenomenon;
  // 1-based line where the block starts.
  std::size_t line = 0;
};

// Blocks of SRC\t, CAND\t, TRUE\t and PHEN\t lines separated by blank lines.
std::vector<ContrastiveGroup> parse_contrastive(std::string_view text);

// Returns a score where higher means more likely.
using CandidateScorer = std::function<double(const std::vector<std::string>& src, const std::string& candidate)>;

enum class CandidateScore { kSum, kMeanPerToken };

CandidateScorer model_candidate_scorer(const Model& model, const Vocab& src_vocab, const Vocab& tgt_vocab,
                                       CandidateScore mode = CandidateScore::kSum);

struct PhenomenonScore {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct ContrastiveReport {
  std::map<std::string, PhenomenonScore> by_phenomenon;
  PhenomenonScore overall;
  std::vector<std::string> diagnostics;
};

// The prediction is correct only when the true candidate strictly outscores
// every other candidate. Groups with an empty candidate are skipped.
ContrastiveReport contrastive_accuracy(std::span<const ContrastiveGroup> groups, const CandidateScorer& scorer);
std::string render_contrastive(const ContrastiveReport& report);

}  // namespace docmt
