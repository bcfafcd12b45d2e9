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

#include "docmt/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "docmt/data.hpp"
#include "docmt/error.hpp"

namespace docmt {

double length_normalized(double log_prob, std::size_t length, double alpha) {
  if (length == 0) return log_prob;
  return log_prob / std::pow(static_cast<double>(length), alpha);
}

namespace {

struct Candidate {
  std::size_t parent;
  TokenId token;
  double log_prob;
};

}  // namespace

BeamResult beam_search(const StepScorer& scorer, const BeamOptions& opts) {
  if (opts.beam_size == 0) fail(ErrorCode::kInvalidArgument, "beam size must be at least 1");
  if (opts.max_len == 0) fail(ErrorCode::kInvalidArgument, "max_len must be at least 1");

  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Hypothesis> finished;
  std::vector<TokenId> prefix;
  for (std::size_t t = 0; t < opts.max_len && !live.empty(); ++t) {
    std::vector<Candidate> candidates;
    for (std::size_t h = 0; h < live.size(); ++h) {
      prefix.assign(1, opts.bos_id);
      prefix.insert(prefix.end(), live[h].tokens.begin(), live[h].tokens.end());
      const std::vector<double> lp = scorer(prefix);
      for (std::size_t tok = 0; tok < lp.size(); ++tok)
        if (std::isfinite(lp[tok])) candidates.push_back({h, static_cast<TokenId>(tok), live[h].log_prob + lp[tok]});
    }
    // Candidates were generated by parent then token, so a stable sort keeps
    // insertion order as the last tie-break.
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      return a.token < b.token;
    });
    if (candidates.size() > opts.beam_size) candidates.resize(opts.beam_size);

    std::vector<Hypothesis> next;
    for (const Candidate& c : candidates) {
      Hypothesis h = live[c.parent];
      h.tokens.push_back(c.token);
      h.log_prob = c.log_prob;
      h.finished = c.token == opts.eos_id;
      (h.finished ? finished : next).push_back(std::move(h));
    }
    live = std::move(next);
    if (finished.size() >= opts.beam_size) break;
  }

  const std::vector<Hypothesis>& pool = finished.empty() ? live : finished;
  if (pool.empty()) fail(ErrorCode::kNumeric, "beam search found no finite continuation");
  const Hypothesis* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const Hypothesis& h : pool) {
    const double score = length_normalized(h.log_prob, h.tokens.size(), opts.alpha);
    if (!best || score > best_score) {
      best = &h;
      best_score = score;
    }
  }
  BeamResult result;
  result.tokens = best->tokens;
  if (best->finished) result.tokens.pop_back();
  result.log_prob = best->log_prob;
  result.score = best_score;
  result.truncated = finished.empty();
  return result;
}

StepScorer model_scorer(const Model& model, std::span<const TokenId> src) {
  auto source = std::make_shared<const std::vector<TokenId>>(src.begin(), src.end());
  auto memory = std::make_shared<const Tensor>(model.encode(*source));
  return [&model, source, memory](std::span<const TokenId> prefix) {
    const Tensor logits = model.decode_logits(*memory, *source, prefix);
    Tensor last({1, logits.cols()});
    std::copy_n(logits.row(logits.rows() - 1).begin(), logits.cols(), last.row(0).begin());
    const Tensor lp = dense::log_softmax_rows(last);
    std::vector<double> out(lp.row(0).begin(), lp.row(0).end());
    const auto& cfg = model.config();
    out[static_cast<std::size_t>(cfg.pad_id)] = -std::numeric_limits<double>::infinity();
    out[static_cast<std::size_t>(cfg.bos_id)] = -std::numeric_limits<double>::infinity();
    return out;
  };
}

BeamResult translate_chunk(const Model& model, std::span<const TokenId> src, const DecodeOptions& opts) {
  const auto& cfg = model.config();
  BeamOptions beam;
  beam.beam_size = opts.beam_size;
  beam.alpha = opts.alpha;
  beam.bos_id = cfg.bos_id;
  beam.eos_id = cfg.eos_id;
  const auto budget =
      static_cast<std::size_t>(opts.max_len_a * static_cast<double>(src.size())) + opts.max_len_b;
  beam.max_len = std::max<std::size_t>(1, std::min(budget, cfg.max_positions));
  return beam_search(model_scorer(model, src), beam);
}

SplitResult split_sentences(std::span<const TokenId> tokens, TokenId sep_id, std::size_t expected_k) {
  if (expected_k == 0) fail(ErrorCode::kInvalidArgument, "expected sentence count must be at least 1");
  SplitResult r;
  r.sentences = split_at_separator(tokens, sep_id);
  r.separators = r.sentences.size() - 1;
  if (r.sentences.size() < expected_k) {
    r.diagnostic = SplitDiagnostic::kUnderflow;
    r.sentences.resize(expected_k);
  } else if (r.sentences.size() > expected_k) {
    r.diagnostic = SplitDiagnostic::kOverflow;
    auto& last = r.sentences[expected_k - 1];
    for (std::size_t s = expected_k; s < r.sentences.size(); ++s)
      last.insert(last.end(), r.sentences[s].begin(), r.sentences[s].end());
    r.sentences.resize(expected_k);
  }
  return r;
}

const std::vector<TokenId>& TranslationGrid::at(std::size_t i, std::size_t j) const {
  auto it = entries.find({i, j});
  if (it == entries.end())
    fail(ErrorCode::kInternal, "translation grid has no entry for sentence " + std::to_string(i) + " at position " +
                                   std::to_string(j));
  return it->second;
}

TranslationGrid sliding_translate(const ChunkTranslator& translate, std::span<const std::vector<TokenId>> document,
                                  std::size_t k, TokenId sep_id, const WindowObserver& observer) {
  if (document.empty()) fail(ErrorCode::kInvalidArgument, "cannot translate an empty document");
  if (k == 0) fail(ErrorCode::kInvalidArgument, "window size k must be at least 1");
  TranslationGrid grid;
  grid.sentences = document.size();
  grid.k = k;
  for (std::size_t start = 0; start < document.size(); ++start) {
    const std::size_t size = std::min(k, document.size() - start);
    const auto src = join_sentences(document.subspan(start, size), sep_id);
    const BeamResult out = translate(src);
    if (observer) observer(start, size, out);
    SplitResult split = split_sentences(out.tokens, sep_id, size);
    grid.underflow += split.diagnostic == SplitDiagnostic::kUnderflow;
    grid.overflow += split.diagnostic == SplitDiagnostic::kOverflow;
    grid.truncated += out.truncated;
    ++grid.windows;
    for (std::size_t o = 0; o < size; ++o) grid.entries[{start + o + 1, o + 1}] = std::move(split.sentences[o]);
  }
  return grid;
}

TranslationGrid sliding_translate(const Model& model, std::span<const std::vector<TokenId>> document, std::size_t k,
                                  const DecodeOptions& opts, const WindowObserver& observer) {
  return sliding_translate([&](std::span<const TokenId> src) { return translate_chunk(model, src, opts); }, document,
                           k, model.config().sep_id, observer);
}

std::vector<std::vector<TokenId>> assemble_position(const TranslationGrid& grid, std::size_t j) {
  if (j == 0 || j > grid.k)
    fail(ErrorCode::kInvalidArgument,
         "position " + std::to_string(j) + " outside 1.." + std::to_string(grid.k));
  std::vector<std::vector<TokenId>> doc;
  for (std::size_t i = 1; i <= grid.sentences; ++i) doc.push_back(grid.at(i, std::min(i, j)));
  return doc;
}

}  // namespace docmt
