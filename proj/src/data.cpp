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

#include "docmt/data.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "binary_io.hpp"
#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

Vocab::Vocab() {
  for (const char* special : {"<pad>", "<s>", "</s>", "<sep>", "<unk>"}) add(special);
}

void Vocab::add(std::string token) {
  if (index_.contains(token)) fail(ErrorCode::kFormat, "duplicate vocabulary entry '" + token + "'");
  index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(std::span<const Tokens> sentences, std::size_t max_size, std::size_t min_freq) {
  if (sentences.empty()) fail(ErrorCode::kInvalidArgument, "cannot build a vocabulary from an empty corpus");
  Vocab vocab;
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& t : s)
      if (!vocab.index_.contains(t)) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is ordered lexicographically, so a stable sort by frequency keeps
  // that order among ties.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (auto& [token, count] : ranked) {
    if (count < std::max<std::size_t>(min_freq, 1)) break;
    if (max_size != 0 && vocab.size() >= max_size) break;
    vocab.add(token);
  }
  return vocab;
}

Vocab Vocab::parse(std::string_view text) {
  Vocab vocab;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i < kReserved) {
      if (lines[i] != vocab.tokens_[i])
        fail(ErrorCode::kFormat, "vocabulary line " + std::to_string(i + 1) + " must be " + vocab.tokens_[i]);
      continue;
    }
    if (lines[i].empty()) continue;
    vocab.add(lines[i]);
  }
  return vocab;
}

std::string Vocab::serialize() const { return join(tokens_, "\n") + "\n"; }

TokenId Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    fail(ErrorCode::kInvalidArgument, "token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

Tokens Vocab::decode(std::span<const TokenId> ids) const {
  Tokens out;
  for (TokenId id : ids)
    if (id != kPad && id != kBos && id != kEos) out.push_back(token(id));
  return out;
}

std::vector<std::vector<Tokens>> parse_documents(std::string_view text) {
  std::vector<std::vector<Tokens>> docs(1);
  for (const auto& line : split_lines(text)) {
    if (trim(line).empty()) {
      if (!docs.back().empty()) docs.emplace_back();
      continue;
    }
    docs.back().push_back(split_whitespace(line));
  }
  if (docs.back().empty()) docs.pop_back();
  return docs;
}

std::vector<std::vector<Tokens>> read_documents(const std::filesystem::path& path) {
  return parse_documents(read_file(path));
}

std::vector<TextDocument> read_parallel_corpus(const std::filesystem::path& src, const std::filesystem::path& tgt) {
  const auto src_lines = split_lines(read_file(src));
  const auto tgt_lines = split_lines(read_file(tgt));
  if (src_lines.size() != tgt_lines.size())
    fail(ErrorCode::kFormat, src.string() + " has " + std::to_string(src_lines.size()) + " lines but " +
                                 tgt.string() + " has " + std::to_string(tgt_lines.size()));
  std::vector<TextDocument> docs(1);
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    const bool src_blank = trim(src_lines[i]).empty();
    if (src_blank != trim(tgt_lines[i]).empty())
      fail(ErrorCode::kFormat, "document boundary mismatch at line " + std::to_string(i + 1));
    if (src_blank) {
      if (!docs.back().src.empty()) docs.emplace_back();
      continue;
    }
    docs.back().src.push_back(split_whitespace(src_lines[i]));
    docs.back().tgt.push_back(split_whitespace(tgt_lines[i]));
  }
  if (docs.back().src.empty()) docs.pop_back();
  return docs;
}

std::vector<Document> encode_corpus(std::span<const TextDocument> docs, const Vocab& src_vocab,
                                    const Vocab& tgt_vocab) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].src.size() != docs[d].tgt.size())
      fail(ErrorCode::kFormat, "document " + std::to_string(d) + " has unequal sentence counts");
    Document doc;
    doc.id = d;
    for (std::size_t s = 0; s < docs[d].src.size(); ++s)
      doc.sentences.push_back({src_vocab.encode(docs[d].src[s]), tgt_vocab.encode(docs[d].tgt[s])});
    out.push_back(std::move(doc));
  }
  return out;
}

std::vector<TokenId> join_sentences(std::span<const std::vector<TokenId>> sentences, TokenId sep_id,
                                    std::vector<std::size_t>* boundaries) {
  std::vector<TokenId> ids;
  if (boundaries) boundaries->clear();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) ids.push_back(sep_id);
    if (boundaries) boundaries->push_back(ids.size());
    ids.insert(ids.end(), sentences[i].begin(), sentences[i].end());
  }
  return ids;
}

std::vector<std::vector<TokenId>> split_at_separator(std::span<const TokenId> ids, TokenId sep_id) {
  std::vector<std::vector<TokenId>> out(1);
  for (TokenId id : ids) {
    if (id == sep_id)
      out.emplace_back();
    else
      out.back().push_back(id);
  }
  return out;
}

std::vector<Chunk> chunk_documents(const Document& doc, std::size_t k, std::size_t stride, TokenId sep_id) {
  if (k == 0 || stride == 0) fail(ErrorCode::kInvalidArgument, "chunking needs k >= 1 and stride >= 1");
  std::vector<Chunk> chunks;
  const std::size_t n = doc.sentences.size();
  for (std::size_t start = 0; start < n; start += stride) {
    const std::size_t end = std::min(start + k, n);
    std::vector<std::vector<TokenId>> src, tgt;
    for (std::size_t s = start; s < end; ++s) {
      src.push_back(doc.sentences[s].src);
      tgt.push_back(doc.sentences[s].tgt);
    }
    Chunk c;
    c.src = join_sentences(src, sep_id, &c.src_boundaries);
    c.tgt = join_sentences(tgt, sep_id, &c.tgt_boundaries);
    c.k_actual = end - start;
    c.doc = doc.id;
    c.start = start;
    chunks.push_back(std::move(c));
  }
  return chunks;
}

std::size_t chunk_tokens(const Chunk& chunk) { return std::max(chunk.src.size(), chunk.tgt.size() + 1); }

std::vector<Batch> make_batches(std::span<const Chunk> chunks, std::size_t max_tokens, TokenId pad_id) {
  std::vector<std::size_t> order(chunks.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i : order)
    if (chunk_tokens(chunks[i]) > max_tokens)
      fail(ErrorCode::kInvalidArgument, "chunk " + std::to_string(i) + " (document " + std::to_string(chunks[i].doc) +
                                            ", sentence " + std::to_string(chunks[i].start + 1) + ") needs " +
                                            std::to_string(chunk_tokens(chunks[i])) + " tokens, over max_tokens " +
                                            std::to_string(max_tokens));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return chunk_tokens(chunks[a]) < chunk_tokens(chunks[b]); });
  std::vector<Batch> batches;
  Batch current;
  std::size_t longest = 0;
  auto flush = [&] {
    if (current.members.empty()) return;
    for (std::size_t m : current.members) {
      current.src_len = std::max(current.src_len, chunks[m].src.size());
      current.tgt_len = std::max(current.tgt_len, chunks[m].tgt.size());
    }
    for (std::size_t m : current.members) {
      auto padded = chunks[m].src;
      padded.resize(current.src_len, pad_id);
      current.src.push_back(std::move(padded));
    }
    batches.push_back(std::move(current));
    current = Batch{};
    longest = 0;
  };
  for (std::size_t i : order) {
    const std::size_t len = std::max(longest, chunk_tokens(chunks[i]));
    if (!current.members.empty() && (current.members.size() + 1) * len > max_tokens) flush();
    current.members.push_back(i);
    longest = std::max(longest, chunk_tokens(chunks[i]));
  }
  flush();
  return batches;
}

namespace {
constexpr std::string_view kDatasetMagic = "DOCMTDS1";
}

std::string encode_dataset(std::span<const Chunk> chunks) {
  using detail::put;
  std::string out(kDatasetMagic);
  put<std::uint64_t>(out, chunks.size());
  for (const Chunk& c : chunks) {
    put<std::uint64_t>(out, c.doc);
    put<std::uint64_t>(out, c.start);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.k_actual));
    for (const auto* side : {&c.src, &c.tgt}) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(side->size()));
      for (TokenId id : *side) put<std::int32_t>(out, id);
    }
  }
  return out;
}

std::vector<Chunk> decode_dataset(std::string_view bytes, TokenId sep_id) {
  detail::Reader in(bytes, "dataset");
  if (in.take(kDatasetMagic.size()) != kDatasetMagic) fail(ErrorCode::kFormat, "not a docmt dataset");
  std::vector<Chunk> chunks(in.get<std::uint64_t>());
  for (Chunk& c : chunks) {
    c.doc = in.get<std::uint64_t>();
    c.start = in.get<std::uint64_t>();
    c.k_actual = in.get<std::uint32_t>();
    for (auto* side : {&c.src, &c.tgt}) {
      side->resize(in.get<std::uint32_t>());
      for (TokenId& id : *side) id = in.get<std::int32_t>();
    }
    for (auto [ids, bounds] : {std::pair{&c.src, &c.src_boundaries}, std::pair{&c.tgt, &c.tgt_boundaries}}) {
      bounds->assign(1, 0);
      for (std::size_t i = 0; i < ids->size(); ++i)
        if ((*ids)[i] == sep_id) bounds->push_back(i + 1);
    }
  }
  if (!in.done()) fail(ErrorCode::kFormat, "trailing bytes after dataset");
  return chunks;
}

}  // namespace docmt
