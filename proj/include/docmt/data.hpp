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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "docmt/tensor.hpp"

namespace docmt {

using Tokens = std::vector<std::string>;

// Token <-> id map. Ids 0..4 are reserved for <pad>, <s>, </s>, <sep>, <unk>.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kSep = 3;
  static constexpr TokenId kUnk = 4;
  static constexpr std::size_t kReserved = 5;

  Vocab();

  // Frequency-ranked, ties broken lexicographically. max_size counts the
  // reserved entries; 0 means unlimited.
  static Vocab build(std::span<const Tokens> sentences, std::size_t max_size, std::size_t min_freq);
  // One token per line; the line number is the id.
  static Vocab parse(std::string_view text);
  std::string serialize() const;

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  // Drops pad/bos/eos; separators are kept as "<sep>".
  Tokens decode(std::span<const TokenId> ids) const;

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct TextDocument {
  std::vector<Tokens> src;
  std::vector<Tokens> tgt;
};

// Two parallel files, one sentence per line, documents separated by blank
// lines at identical positions in both files.
std::vector<TextDocument> read_parallel_corpus(const std::filesystem::path& src, const std::filesystem::path& tgt);
// Source-only variant for translation input.
std::vector<std::vector<Tokens>> read_documents(const std::filesystem::path& path);
std::vector<std::vector<Tokens>> parse_documents(std::string_view text);

struct SentencePair {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
};

struct Document {
  std::size_t id = 0;
  std::vector<SentencePair> sentences;
};

std::vector<Document> encode_corpus(std::span<const TextDocument> docs, const Vocab& src_vocab,
                                    const Vocab& tgt_vocab);

// k consecutive sentences of one document joined by separators.
struct Chunk {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
  std::vector<std::size_t> src_boundaries;
  std::vector<std::size_t> tgt_boundaries;
  std::size_t k_actual = 0;
  std::size_t doc = 0;
  // 0-based index of the first sentence.
  std::size_t start = 0;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Joins sentences with sep_id; boundaries receive each sentence's start offset.
std::vector<TokenId> join_sentences(std::span<const std::vector<TokenId>> sentences, TokenId sep_id,
                                    std::vector<std::size_t>* boundaries = nullptr);
// Inverse of join_sentences.
std::vector<std::vector<TokenId>> split_at_separator(std::span<const TokenId> ids, TokenId sep_id);

// Windows start at sentences 0, stride, 2*stride, ... and cover k sentences,
// clipped at the end of the document.
std::vector<Chunk> chunk_documents(const Document& doc, std::size_t k, std::size_t stride, TokenId sep_id);

// Padded length budget of one chunk: max(|src|, |tgt| + 1).
std::size_t chunk_tokens(const Chunk& chunk);

struct Batch {
  std::vector<std::size_t> members;
  // Padded lengths of the source and of the (pre-bos/eos) target.
  std::size_t src_len = 0;
  std::size_t tgt_len = 0;
  std::vector<std::vector<TokenId>> src;
};

// Sorts by length and packs greedily so that members * longest <= max_tokens.
std::vector<Batch> make_batches(std::span<const Chunk> chunks, std::size_t max_tokens, TokenId pad_id);

// Binary container "DOCMTDS1" | u64 count | per chunk: u64 doc, u64 start,
// u32 k_actual, u32 n, n x i32 src, u32 n, n x i32 tgt (little-endian).
std::string encode_dataset(std::span<const Chunk> chunks);
std::vector<Chunk> decode_dataset(std::string_view bytes, TokenId sep_id);

}  // namespace docmt
