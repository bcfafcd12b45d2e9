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

#include "docmt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

namespace {

constexpr std::string_view kTerminalPunct = ".,!?;:";

}  // namespace

Tokens bleu_tokenize(std::string_view text) {
  Tokens out;
  for (std::string word : split_whitespace(text)) {
    std::size_t cut = word.size();
    while (cut > 1 && kTerminalPunct.find(word[cut - 1]) != std::string_view::npos) --cut;
    out.push_back(word.substr(0, cut));
    for (std::size_t i = cut; i < word.size(); ++i) out.emplace_back(1, word[i]);
  }
  return out;
}

BleuReport bleu_tokens(std::span<const Tokens> hyps, std::span<const Tokens> refs) {
  if (hyps.size() != refs.size())
    fail(ErrorCode::kInvalidArgument, "BLEU needs equal counts; got " + std::to_string(hyps.size()) +
                                          " hypotheses and " + std::to_string(refs.size()) + " references");
  if (hyps.empty()) fail(ErrorCode::kInvalidArgument, "BLEU of an empty corpus");
  BleuReport r;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const Tokens& h = hyps[s];
    const Tokens& ref = refs[s];
    r.hyp_length += h.size();
    r.ref_length += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, std::size_t> ref_counts;
      for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[{ref.begin() + i, ref.begin() + i + n}];
      std::map<std::vector<std::string>, std::size_t> hyp_counts;
      for (std::size_t i = 0; i + n <= h.size(); ++i) ++hyp_counts[{h.begin() + i, h.begin() + i + n}];
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        r.matches[n - 1] += std::min(count, it == ref_counts.end() ? 0 : it->second);
        r.totals[n - 1] += count;
      }
    }
  }
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    r.precisions[n] = r.totals[n] ? static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]) : 0.0;
    if (r.precisions[n] == 0.0)
      zero = true;
    else
      log_sum += std::log(r.precisions[n]);
  }
  if (r.hyp_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hyp_length < r.ref_length) {
    r.brevity_penalty =
        std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
  }
  r.bleu = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

BleuReport bleu(std::span<const std::string> hyps, std::span<const std::string> refs) {
  std::vector<Tokens> h, r;
  for (const auto& s : hyps) h.push_back(bleu_tokenize(s));
  for (const auto& s : refs) r.push_back(bleu_tokenize(s));
  return bleu_tokens(h, r);
}

std::string format_bleu(double value) { return format_fixed(value, 2); }

std::vector<PositionRow> per_position_report(std::span<const TranslationGrid> grids,
                                             std::span<const std::vector<std::string>> refs, const Vocab& tgt_vocab) {
  if (grids.size() != refs.size())
    fail(ErrorCode::kInvalidArgument, std::to_string(grids.size()) + " translated documents for " +
                                          std::to_string(refs.size()) + " reference documents");
  if (grids.empty()) fail(ErrorCode::kInvalidArgument, "per-position report of an empty test set");
  const std::size_t k = grids.front().k;
  std::vector<std::string> flat_refs;
  for (std::size_t d = 0; d < grids.size(); ++d) {
    if (grids[d].k != k) fail(ErrorCode::kInvalidArgument, "documents were translated with different k");
    if (grids[d].sentences != refs[d].size())
      fail(ErrorCode::kInvalidArgument, "document " + std::to_string(d + 1) + " has " +
                                            std::to_string(grids[d].sentences) + " translated sentences but " +
                                            std::to_string(refs[d].size()) + " references");
    flat_refs.insert(flat_refs.end(), refs[d].begin(), refs[d].end());
  }
  std::vector<PositionRow> rows;
  for (std::size_t j = 1; j <= k; ++j) {
    std::vector<std::string> hyps;
    for (const auto& grid : grids)
      for (const auto& sentence : assemble_position(grid, j)) hyps.push_back(join(tgt_vocab.decode(sentence), " "));
    rows.push_back({j, bleu(hyps, flat_refs)});
  }
  return rows;
}

std::string render_position_rows(std::span<const PositionRow> rows) {
  std::string out;
  for (const auto& row : rows) out += std::to_string(row.j) + "\t" + format_bleu(row.report.bleu) + "\n";
  return out;
}

std::string render_position_table(std::span<const PositionRow> rows) {
  std::string out = "  j    BLEU     p1     p2     p3     p4     BP\n";
  char line[128];
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::snprintf(line, sizeof line, "%3zu  %6.2f  %5.1f  %5.1f  %5.1f  %5.1f  %5.3f\n", row.j, r.bleu,
                  100 * r.precisions[0], 100 * r.precisions[1], 100 * r.precisions[2], 100 * r.precisions[3],
                  r.brevity_penalty);
    out += line;
  }
  return out;
}

std::vector<ContrastiveGroup> parse_contrastive(std::string_view text) {
  std::vector<ContrastiveGroup> groups;
  ContrastiveGroup current;
  bool has_true = false, has_phen = false, open = false;
  auto where = [&](std::size_t line) { return "contrastive line " + std::to_string(line) + ": "; };
  auto close = [&](std::size_t line) {
    if (!open) return;
    if (current.src.empty()) fail(ErrorCode::kFormat, where(current.line) + "block has no SRC line");
    if (current.candidates.size() < 2) fail(ErrorCode::kFormat, where(current.line) + "block needs at least 2 CAND lines");
    if (!has_true || !has_phen) fail(ErrorCode::kFormat, where(current.line) + "block needs TRUE and PHEN lines");
    if (current.true_index >= current.candidates.size())
      fail(ErrorCode::kFormat, where(line) + "TRUE index " + std::to_string(current.true_index) + " out of range");
    groups.push_back(std::move(current));
    current = ContrastiveGroup{};
    has_true = has_phen = open = false;
  };
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    if (trim(line).empty()) {
      close(n + 1);
      continue;
    }
    if (!open) {
      open = true;
      current.line = n + 1;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail(ErrorCode::kFormat, where(n + 1) + "expected TAG<TAB>text");
    const std::string tag = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (tag == "SRC") {
      current.src.push_back(value);
    } else if (tag == "CAND") {
      current.candidates.push_back(value);
    } else if (tag == "TRUE") {
      current.true_index = parse_size(trim(value));
      has_true = true;
    } else if (tag == "PHEN") {
      current.phenomenon = trim(value);
      has_phen = true;
    } else {
      fail(ErrorCode::kFormat, where(n + 1) + "unknown tag '" + tag + "'");
    }
  }
  close(lines.size());
  return groups;
}

CandidateScorer model_candidate_scorer(const Model& model, const Vocab& src_vocab, const Vocab& tgt_vocab,
                                       CandidateScore mode) {
  return [&model, &src_vocab, &tgt_vocab, mode](const std::vector<std::string>& src, const std::string& candidate) {
    std::vector<std::vector<TokenId>> sentences;
    for (const auto& s : src) sentences.push_back(src_vocab.encode(split_whitespace(s)));
    const auto src_ids = join_sentences(sentences, model.config().sep_id);
    const auto tgt_ids = tgt_vocab.encode(split_whitespace(candidate));
    const double total = model.sequence_log_prob(src_ids, tgt_ids);
    return mode == CandidateScore::kSum ? total : total / static_cast<double>(tgt_ids.size() + 1);
  };
}

ContrastiveReport contrastive_accuracy(std::span<const ContrastiveGroup> groups, const CandidateScorer& scorer) {
  if (groups.empty()) fail(ErrorCode::kInvalidArgument, "no contrastive groups to score");
  ContrastiveReport report;
  for (const ContrastiveGroup& g : groups) {
    const bool empty = std::any_of(g.candidates.begin(), g.candidates.end(),
                                   [](const std::string& c) { return split_whitespace(c).empty(); });
    if (empty) {
      report.diagnostics.push_back("group at line " + std::to_string(g.line) + " skipped: empty candidate");
      continue;
    }
    std::vector<double> scores;
    for (const auto& c : g.candidates) scores.push_back(scorer(g.src, c));
    bool correct = true;
    for (std::size_t c = 0; c < scores.size(); ++c)
      if (c != g.true_index && !(scores[g.true_index] > scores[c])) correct = false;
    for (PhenomenonScore* s : {&report.by_phenomenon[g.phenomenon], &report.overall}) {
      s->correct += correct;
      ++s->total;
    }
  }
  return report;
}

std::string render_contrastive(const ContrastiveReport& report) {
  std::ostringstream out;
  for (const auto& [label, s] : report.by_phenomenon)
    out << label << '\t' << format_fixed(s.accuracy(), 4) << '\t' << s.correct << '/' << s.total << '\n';
  out << "overall\t" << format_fixed(report.overall.accuracy(), 4) << '\t' << report.overall.correct << '/'
      << report.overall.total << '\n';
  for (const auto& d : report.diagnostics) out << "# " << d << '\n';
  return out.str();
}

}  // namespace docmt
