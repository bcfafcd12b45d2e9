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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "docmt/attention.hpp"

namespace docmt {

enum class Variant { kBaseline, kLongShort };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

// Architecture hyperparameters. Defaults are the base transformer sizes.
struct ModelConfig {
  std::size_t dim = 512;
  std::size_t heads = 8;
  std::size_t encoder_layers = 6;
  std::size_t decoder_layers = 6;
  std::size_t ffn_dim = 2048;
  std::size_t vocab_src = 0;
  std::size_t vocab_tgt = 0;
  // Sentences per chunk the model is trained on.
  std::size_t k = 1;
  std::size_t max_positions = 1024;
  TokenId pad_id = 0;
  TokenId bos_id = 1;
  TokenId eos_id = 2;
  TokenId sep_id = 3;
  Variant variant = Variant::kLongShort;
  double dropout = 0.1;
  bool tie_output = true;

  // Input width of the layer that merges the two streams.
  std::size_t combine_dim() const noexcept { return 2 * dim; }

  void validate() const;
  // key=value lines, one per field, fixed order.
  std::string serialize() const;
  static ModelConfig parse(std::string_view text);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct EncoderLayerParams {
  AttentionParams self_attn;
  LayerNormParams self_norm;
  FeedForwardParams ffn;
  LayerNormParams ffn_norm;
};

struct DecoderLayerParams {
  AttentionParams self_attn;
  LayerNormParams self_norm;
  AttentionParams cross_attn;
  LayerNormParams cross_norm;
  FeedForwardParams ffn;
  LayerNormParams ffn_norm;
};

struct Parameters {
  Parameter src_embedding;
  Parameter tgt_embedding;
  std::vector<EncoderLayerParams> encoder;
  std::vector<DecoderLayerParams> decoder;
  // (2d -> d) stream merge, present only for the long-short variant.
  std::optional<LinearParams> encoder_combine;
  std::optional<LinearParams> decoder_combine;
  // (d x V) projection; absent when tied to the target embedding.
  std::optional<Parameter> output_weight;
  Parameter output_bias;

  static Parameters initialize(const ModelConfig& cfg, std::uint64_t seed);

  // Stable order; the same for every instance built from one config.
  std::vector<Parameter*> list();
  std::vector<const Parameter*> list() const;
  std::size_t scalar_count() const;
};

// Closed-form learned-scalar count for a config.
std::size_t param_count(const ModelConfig& cfg);

// Sinusoidal encodings for positions [0, length), continuous across the chunk.
Tensor sinusoidal_positions(std::size_t length, std::size_t dim);

// Concatenates the streams to (len x 2d) and maps them back to (len x d).
Var combine_streams(Var global, Var local, const LinearParams& combine);

// Decoder input [bos, tgt...] and targets [tgt..., eos], both right-padded to
// padded_len + 1 when padded_len exceeds tgt.size().
struct TeacherForcing {
  std::vector<TokenId> input;
  std::vector<TokenId> targets;
};
TeacherForcing teacher_forcing(std::span<const TokenId> tgt, const ModelConfig& cfg, std::size_t padded_len = 0);

class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);
  Model(ModelConfig cfg, Parameters params);

  const ModelConfig& config() const noexcept { return cfg_; }
  Parameters& params() noexcept { return params_; }
  const Parameters& params() const noexcept { return params_; }

  // Stream states after the embedding (index 0) and after each layer. For the
  // baseline only .global is set.
  struct EncoderResult {
    Var memory;
    std::vector<StreamState> layers;
  };
  struct DecoderResult {
    Var logits;
    std::vector<StreamState> layers;
  };

  EncoderResult encode(Tape& tape, std::span<const TokenId> src, const Regularizer& reg = {}) const;
  // tgt_in starts with bos. src supplies the padding pattern of memory.
  DecoderResult decode(Tape& tape, Var memory, std::span<const TokenId> src, std::span<const TokenId> tgt_in,
                       const Regularizer& reg = {}) const;

  // Inference conveniences on a throwaway non-recording tape.
  Tensor encode(std::span<const TokenId> src) const;
  Tensor decode_logits(const Tensor& memory, std::span<const TokenId> src, std::span<const TokenId> tgt_in) const;

  // Teacher-forced loss; pad targets are excluded.
  Var loss(Tape& tape, std::span<const TokenId> src, const TeacherForcing& tf, double smoothing,
           Reduction reduction, const Regularizer& reg = {}) const;

  // Sum of log p(tgt..., eos | src) over every target position.
  double sequence_log_prob(std::span<const TokenId> src, std::span<const TokenId> tgt) const;

 private:
  Var embed(Tape& tape, const Parameter& table, std::span<const TokenId> ids, const Regularizer& reg) const;

  ModelConfig cfg_;
  Parameters params_;
  Tensor positions_;
};

}  // namespace docmt
