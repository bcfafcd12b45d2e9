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
#include <string>

#include "docmt/layers.hpp"
#include "docmt/masking.hpp"

namespace docmt {

// Projections of one attention block. A long-short layer owns exactly one of
// these and applies it to both of its streams.
struct AttentionParams {
  LinearParams query;
  LinearParams key;
  LinearParams value;
  LinearParams output;
  std::size_t heads = 1;
  std::size_t dim = 0;
};

AttentionParams make_attention(const std::string& name, std::size_t dim, std::size_t heads, Rng& rng);

// The two hidden-state sequences of a long-short layer. global sees the whole
// chunk, local only the current sentence.
struct StreamState {
  Var global;
  Var local;
};

// softmax(q k^T / sqrt(head_dim) + bias) v.
// bias is (len_q x len_k); a row with no entry above kNegInf / 2 is an error.
Var scaled_dot_attention(Var q, Var k, Var v, const Tensor& bias, const Regularizer& reg = {});

// Plain-tensor version of the attention weights, for inspection and tests.
Tensor attention_weights(const Tensor& q, const Tensor& k, const Tensor& bias);

Var multi_head(Var x_q, Var x_kv, const Tensor& bias, const AttentionParams& p, const Regularizer& reg = {});

// One self-attention sublayer applied to both streams with shared
// projections; each stream reads only its own previous states and is followed
// by the post-norm residual block.
StreamState lst_self_attention(const StreamState& s, const MaskMatrix& global_mask, const MaskMatrix& local_mask,
                               const AttentionParams& p, const LayerNormParams& norm, const Regularizer& reg = {});

}  // namespace docmt
