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

#include "docmt/attention.hpp"

#include <cmath>
#include <vector>

#include "docmt/error.hpp"

namespace docmt {

AttentionParams make_attention(const std::string& name, std::size_t dim, std::size_t heads, Rng& rng) {
  if (heads == 0 || dim % heads != 0)
    fail(ErrorCode::kInvalidArgument,
         "model dimension " + std::to_string(dim) + " not divisible by " + std::to_string(heads) + " heads");
  AttentionParams p;
  p.query = make_linear(name + ".query", dim, dim, rng);
  p.key = make_linear(name + ".key", dim, dim, rng);
  p.value = make_linear(name + ".value", dim, dim, rng);
  p.output = make_linear(name + ".output", dim, dim, rng);
  p.heads = heads;
  p.dim = dim;
  return p;
}

namespace {

void check_attention_shapes(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& bias) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.cols() != k.cols() || k.rows() != v.rows())
    fail(ErrorCode::kShape, "attention shapes q" + shape_string(q.shape()) + " k" + shape_string(k.shape()) +
                                " v" + shape_string(v.shape()));
  if (bias.shape() != Shape{q.rows(), k.rows()})
    fail(ErrorCode::kShape, "attention bias " + shape_string(bias.shape()) + " for " + std::to_string(q.rows()) +
                                " queries and " + std::to_string(k.rows()) + " keys");
  for (std::size_t r = 0; r < bias.rows(); ++r) {
    bool open = false;
    for (double b : bias.row(r)) open = open || b > kNegInf / 2;
    if (!open) fail(ErrorCode::kNumeric, "row with no attendable position (query " + std::to_string(r) + ")");
  }
}

}  // namespace

Var scaled_dot_attention(Var q, Var k, Var v, const Tensor& bias, const Regularizer& reg) {
  check_attention_shapes(q.value(), k.value(), v.value(), bias);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(q.value().cols()));
  Var scores = add_constant(scale(matmul_nt(q, k), inv_sqrt), bias);
  Var weights = dropout(softmax_rows(scores), reg.rate, reg.rng);
  return matmul(weights, v);
}

Tensor attention_weights(const Tensor& q, const Tensor& k, const Tensor& bias) {
  Tensor v = Tensor::identity(k.rows());
  check_attention_shapes(q, k, v, bias);
  Tensor scores;
  dense::gemm_nt(q, k, scores, false);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = scores[i] * inv_sqrt + bias[i];
  return dense::softmax_rows(scores);
}

Var multi_head(Var x_q, Var x_kv, const Tensor& bias, const AttentionParams& p, const Regularizer& reg) {
  if (x_q.value().cols() != p.dim || x_kv.value().cols() != p.dim)
    fail(ErrorCode::kShape, "multi_head inputs " + shape_string(x_q.value().shape()) + " / " +
                                shape_string(x_kv.value().shape()) + " for model dimension " + std::to_string(p.dim));
  Var q = linear(x_q, p.query);
  Var k = linear(x_kv, p.key);
  Var v = linear(x_kv, p.value);
  if (p.heads == 1) return linear(scaled_dot_attention(q, k, v, bias, reg), p.output);
  const std::size_t head_dim = p.dim / p.heads;
  std::vector<Var> heads;
  heads.reserve(p.heads);
  for (std::size_t h = 0; h < p.heads; ++h) {
    const std::size_t begin = h * head_dim;
    heads.push_back(scaled_dot_attention(slice_cols(q, begin, head_dim), slice_cols(k, begin, head_dim),
                                         slice_cols(v, begin, head_dim), bias, reg));
  }
  return linear(concat_cols(heads), p.output);
}

StreamState lst_self_attention(const StreamState& s, const MaskMatrix& global_mask, const MaskMatrix& local_mask,
                               const AttentionParams& p, const LayerNormParams& norm, const Regularizer& reg) {
  const std::size_t len = s.global.value().rows();
  if (s.local.value().shape() != s.global.value().shape())
    fail(ErrorCode::kShape, "stream shapes differ: " + shape_string(s.global.value().shape()) + " vs " +
                                shape_string(s.local.value().shape()));
  if (global_mask.size() != len || local_mask.size() != len)
    fail(ErrorCode::kShape, "stream masks sized " + std::to_string(global_mask.size()) + "/" +
                                std::to_string(local_mask.size()) + " for length " + std::to_string(len));
  StreamState next;
  next.global = residual_norm(s.global, multi_head(s.global, s.global, global_mask.bias(), p, reg), norm, reg);
  next.local = residual_norm(s.local, multi_head(s.local, s.local, local_mask.bias(), p, reg), norm, reg);
  return next;
}

}  // namespace docmt
