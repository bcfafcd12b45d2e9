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

#include "docmt/masking.hpp"

#include <algorithm>

#include "docmt/error.hpp"

namespace docmt {

MaskMatrix::MaskMatrix(Tensor bias) : bias_(std::move(bias)) {
  if (bias_.rank() != 2 || bias_.shape()[0] != bias_.shape()[1])
    fail(ErrorCode::kShape, "mask must be square, got " + shape_string(bias_.shape()));
  for (double v : bias_.data())
    if (v != 0.0 && v != kNegInf) fail(ErrorCode::kInvalidArgument, "mask entry outside {0, -1e9}");
}

std::vector<int> segment_index(std::span<const TokenId> tokens, TokenId sep_id) {
  std::vector<int> seg(tokens.size());
  int count = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] == sep_id) ++count;
    seg[t] = count;
  }
  return seg;
}

namespace {

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, std::string(what) + ": empty sequence");
}

}  // namespace

MaskMatrix zero_mask(std::size_t n) {
  require_nonempty(n, "zero_mask");
  return MaskMatrix(Tensor({n, n}));
}

MaskMatrix causal_mask(std::size_t n) {
  require_nonempty(n, "causal_mask");
  Tensor m({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = kNegInf;
  return MaskMatrix(std::move(m));
}

MaskMatrix local_block_mask(std::span<const TokenId> tokens, TokenId sep_id) {
  require_nonempty(tokens.size(), "local_block_mask");
  const auto seg = segment_index(tokens, sep_id);
  const std::size_t n = tokens.size();
  Tensor m({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (seg[i] != seg[j]) m.at(i, j) = kNegInf;
  return MaskMatrix(std::move(m));
}

MaskMatrix decoder_local_mask(std::span<const TokenId> tokens, TokenId sep_id) {
  require_nonempty(tokens.size(), "decoder_local_mask");
  return saturating_combine(causal_mask(tokens.size()), local_block_mask(tokens, sep_id));
}

MaskMatrix saturating_combine(const MaskMatrix& a, const MaskMatrix& b) {
  if (a.size() != b.size())
    fail(ErrorCode::kShape, "mask combine: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  Tensor m = a.bias();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::max(kNegInf, m[i] + b.bias()[i]);
  return MaskMatrix(std::move(m));
}

MaskMatrix with_key_padding(const MaskMatrix& mask, std::span<const TokenId> keys, TokenId pad_id) {
  if (keys.size() != mask.size())
    fail(ErrorCode::kShape, "key padding: " + std::to_string(keys.size()) + " keys for mask of size " +
                                std::to_string(mask.size()));
  return saturating_combine(mask, MaskMatrix(key_padding_bias(keys.size(), keys, pad_id)));
}

Tensor key_padding_bias(std::size_t rows, std::span<const TokenId> keys, TokenId pad_id) {
  Tensor m({rows, keys.size()});
  for (std::size_t j = 0; j < keys.size(); ++j)
    if (keys[j] == pad_id)
      for (std::size_t i = 0; i < rows; ++i) m.at(i, j) = kNegInf;
  return m;
}

std::string render_mask(const MaskMatrix& mask) {
  std::string out;
  const std::size_t n = mask.size();
  out.reserve(n * (n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.push_back(mask.blocked(i, j) ? '-' : '0');
    out.push_back('\n');
  }
  return out;
}

}  // namespace docmt
