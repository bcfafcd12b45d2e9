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
#include <span>
#include <string>
#include <vector>

#include "docmt/tensor.hpp"

namespace docmt {

// Square additive attention bias whose entries are exactly 0 (attend) or
// kNegInf (blocked).
class MaskMatrix {
 public:
  MaskMatrix() = default;
  // Takes a square matrix and rejects any entry outside {0, kNegInf}.
  explicit MaskMatrix(Tensor bias);

  std::size_t size() const noexcept { return bias_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return bias_.at(i, j); }
  bool blocked(std::size_t i, std::size_t j) const { return bias_.at(i, j) != 0.0; }
  const Tensor& bias() const noexcept { return bias_; }

  friend bool operator==(const MaskMatrix&, const MaskMatrix&) = default;

 private:
  Tensor bias_;
};

// Per-token sentence id: the number of separators at or before each position.
// A separator therefore opens the segment that follows it.
std::vector<int> segment_index(std::span<const TokenId> tokens, TokenId sep_id);

MaskMatrix zero_mask(std::size_t n);
// Blocks every key to the right of the query.
MaskMatrix causal_mask(std::size_t n);
// Blocks every key outside the query's segment.
MaskMatrix local_block_mask(std::span<const TokenId> tokens, TokenId sep_id);
// Causal and same-segment.
MaskMatrix decoder_local_mask(std::span<const TokenId> tokens, TokenId sep_id);

// Elementwise combination that clamps at kNegInf instead of summing to -2e9.
MaskMatrix saturating_combine(const MaskMatrix& a, const MaskMatrix& b);

// Additionally blocks every key column whose token is pad_id.
MaskMatrix with_key_padding(const MaskMatrix& mask, std::span<const TokenId> keys, TokenId pad_id);
// rows x keys bias that blocks only pad columns; used for cross attention.
Tensor key_padding_bias(std::size_t rows, std::span<const TokenId> keys, TokenId pad_id);

// One text line per row, '0' for open and '-' for blocked entries.
std::string render_mask(const MaskMatrix& mask);

}  // namespace docmt
