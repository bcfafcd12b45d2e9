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

#include "docmt/model.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

std::string_view variant_name(Variant v) { return v == Variant::kBaseline ? "baseline" : "lst"; }

Variant parse_variant(std::string_view name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "lst") return Variant::kLongShort;
  fail(ErrorCode::kInvalidArgument, "unknown model variant '" + std::string(name) + "' (expected baseline|lst)");
}

void ModelConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::kInvalidArgument, "model config: " + m); };
  if (dim == 0 || heads == 0 || dim % heads != 0)
    bad("dim " + std::to_string(dim) + " must be a positive multiple of heads " + std::to_string(heads));
  if (dim % 2 != 0) bad("dim must be even for sinusoidal positions");
  if (encoder_layers == 0 || decoder_layers == 0) bad("layer counts must be positive");
  if (ffn_dim == 0) bad("ffn_dim must be positive");
  if (k == 0) bad("k must be at least 1");
  if (max_positions == 0) bad("max_positions must be positive");
  if (dropout < 0.0 || dropout >= 1.0) bad("dropout must be in [0, 1)");
  const TokenId ids[] = {pad_id, bos_id, eos_id, sep_id};
  for (int a = 0; a < 4; ++a) {
    if (ids[a] < 0) bad("special ids must be non-negative");
    for (int b = a + 1; b < 4; ++b)
      if (ids[a] == ids[b]) bad("special ids must be distinct");
    if (static_cast<std::size_t>(ids[a]) >= vocab_src || static_cast<std::size_t>(ids[a]) >= vocab_tgt)
      bad("special ids must lie inside both vocabularies");
  }
}

std::string ModelConfig::serialize() const {
  std::ostringstream out;
  out << "dim=" << dim << '\n'
      << "heads=" << heads << '\n'
      << "encoder_layers=" << encoder_layers << '\n'
      << "decoder_layers=" << decoder_layers << '\n'
      << "ffn_dim=" << ffn_dim << '\n'
      << "vocab_src=" << vocab_src << '\n'
      << "vocab_tgt=" << vocab_tgt << '\n'
      << "k=" << k << '\n'
      << "max_positions=" << max_positions << '\n'
      << "pad_id=" << pad_id << '\n'
      << "bos_id=" << bos_id << '\n'
      << "eos_id=" << eos_id << '\n'
      << "sep_id=" << sep_id << '\n'
      << "variant=" << variant_name(variant) << '\n'
      << "dropout=" << format_double(dropout) << '\n'
      << "tie_output=" << (tie_output ? 1 : 0) << '\n';
  return out.str();
}

ModelConfig ModelConfig::parse(std::string_view text) {
  ModelConfig cfg;
  std::map<std::string, std::string> kv;
  for (const auto& line : split_lines(text)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kFormat, "model config line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto take = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorCode::kFormat, std::string("model config missing key ") + key);
    return it->second;
  };
  cfg.dim = parse_size(take("dim"));
  cfg.heads = parse_size(take("heads"));
  cfg.encoder_layers = parse_size(take("encoder_layers"));
  cfg.decoder_layers = parse_size(take("decoder_layers"));
  cfg.ffn_dim = parse_size(take("ffn_dim"));
  cfg.vocab_src = parse_size(take("vocab_src"));
  cfg.vocab_tgt = parse_size(take("vocab_tgt"));
  cfg.k = parse_size(take("k"));
  cfg.max_positions = parse_size(take("max_positions"));
  cfg.pad_id = static_cast<TokenId>(parse_size(take("pad_id")));
  cfg.bos_id = static_cast<TokenId>(parse_size(take("bos_id")));
  cfg.eos_id = static_cast<TokenId>(parse_size(take("eos_id")));
  cfg.sep_id = static_cast<TokenId>(parse_size(take("sep_id")));
  cfg.variant = parse_variant(take("variant"));
  cfg.dropout = parse_double(take("dropout"));
  cfg.tie_output = parse_size(take("tie_output")) != 0;
  return cfg;
}

Parameters Parameters::initialize(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const std::size_t d = cfg.dim;
  Parameters p;
  const double embed_std = 1.0 / std::sqrt(static_cast<double>(d));
  auto embedding_table = [&](const char* name, std::size_t vocab) {
    Parameter e{name, Tensor({vocab, d}), {}};
    for (double& v : e.value.data()) v = embed_std * rng.normal();
    return e;
  };
  p.src_embedding = embedding_table("src_embedding", cfg.vocab_src);
  p.tgt_embedding = embedding_table("tgt_embedding", cfg.vocab_tgt);
  for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
    const std::string n = "encoder." + std::to_string(l);
    p.encoder.push_back({make_attention(n + ".self_attn", d, cfg.heads, rng), make_layer_norm(n + ".self_norm", d),
                         make_feed_forward(n + ".ffn", d, cfg.ffn_dim, rng), make_layer_norm(n + ".ffn_norm", d)});
  }
  for (std::size_t l = 0; l < cfg.decoder_layers; ++l) {
    const std::string n = "decoder." + std::to_string(l);
    p.decoder.push_back({make_attention(n + ".self_attn", d, cfg.heads, rng), make_layer_norm(n + ".self_norm", d),
                         make_attention(n + ".cross_attn", d, cfg.heads, rng), make_layer_norm(n + ".cross_norm", d),
                         make_feed_forward(n + ".ffn", d, cfg.ffn_dim, rng), make_layer_norm(n + ".ffn_norm", d)});
  }
  if (cfg.variant == Variant::kLongShort) {
    p.encoder_combine = make_linear("encoder_combine", cfg.combine_dim(), d, rng);
    p.decoder_combine = make_linear("decoder_combine", cfg.combine_dim(), d, rng);
  }
  if (!cfg.tie_output) {
    Parameter w{"output_weight", Tensor({d, cfg.vocab_tgt}), {}};
    const double limit = std::sqrt(6.0 / static_cast<double>(d + cfg.vocab_tgt));
    for (double& v : w.value.data()) v = rng.uniform(-limit, limit);
    p.output_weight = std::move(w);
  }
  p.output_bias = Parameter{"output_bias", Tensor({cfg.vocab_tgt}), {}};
  return p;
}

namespace {

template <class P, class Out>
void collect(P& p, Out& out) {
  auto linear = [&](auto& l) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  };
  auto attention = [&](auto& a) {
    linear(a.query);
    linear(a.key);
    linear(a.value);
    linear(a.output);
  };
  auto norm = [&](auto& n) {
    out.push_back(&n.gain);
    out.push_back(&n.bias);
  };
  out.push_back(&p.src_embedding);
  out.push_back(&p.tgt_embedding);
  for (auto& layer : p.encoder) {
    attention(layer.self_attn);
    norm(layer.self_norm);
    linear(layer.ffn.inner);
    linear(layer.ffn.outer);
    norm(layer.ffn_norm);
  }
  for (auto& layer : p.decoder) {
    attention(layer.self_attn);
    norm(layer.self_norm);
    attention(layer.cross_attn);
    norm(layer.cross_norm);
    linear(layer.ffn.inner);
    linear(layer.ffn.outer);
    norm(layer.ffn_norm);
  }
  if (p.encoder_combine) linear(*p.encoder_combine);
  if (p.decoder_combine) linear(*p.decoder_combine);
  if (p.output_weight) out.push_back(&*p.output_weight);
  out.push_back(&p.output_bias);
}

}  // namespace

std::vector<Parameter*> Parameters::list() {
  std::vector<Parameter*> out;
  collect(*this, out);
  return out;
}

std::vector<const Parameter*> Parameters::list() const {
  std::vector<const Parameter*> out;
  collect(*this, out);
  return out;
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const Parameter* p : list()) n += p->value.size();
  return n;
}

std::size_t param_count(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.dim, f = cfg.ffn_dim;
  const std::size_t attention = 4 * (d * d + d);
  const std::size_t norm = 2 * d;
  const std::size_t ffn = d * f + f + f * d + d;
  std::size_t n = (cfg.vocab_src + cfg.vocab_tgt) * d;
  n += cfg.encoder_layers * (attention + ffn + 2 * norm);
  n += cfg.decoder_layers * (2 * attention + ffn + 3 * norm);
  if (cfg.variant == Variant::kLongShort) n += 2 * (cfg.combine_dim() * d + d);
  if (!cfg.tie_output) n += d * cfg.vocab_tgt;
  n += cfg.vocab_tgt;
  return n;
}

Tensor sinusoidal_positions(std::size_t length, std::size_t dim) {
  Tensor pe({length, dim});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < dim; i += 2) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(dim));
      pe.at(pos, i) = std::sin(angle);
      if (i + 1 < dim) pe.at(pos, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

Var combine_streams(Var global, Var local, const LinearParams& combine) {
  if (global.value().shape() != local.value().shape())
    fail(ErrorCode::kShape, "combine_streams: " + shape_string(global.value().shape()) + " vs " +
                                shape_string(local.value().shape()));
  if (combine.weight.value.shape() != Shape{2 * global.value().cols(), global.value().cols()})
    fail(ErrorCode::kShape, "combine_streams: weight " + shape_string(combine.weight.value.shape()) +
                                " for streams " + shape_string(global.value().shape()));
  const Var parts[] = {global, local};
  return linear(concat_cols(parts), combine);
}

Model::Model(ModelConfig cfg, std::uint64_t seed) : Model(cfg, Parameters::initialize(cfg, seed)) {}

Model::Model(ModelConfig cfg, Parameters params)
    : cfg_(std::move(cfg)), params_(std::move(params)), positions_(sinusoidal_positions(cfg_.max_positions, cfg_.dim)) {
  cfg_.validate();
  if (params_.scalar_count() != param_count(cfg_))
    fail(ErrorCode::kState, "parameter set does not match the model config");
}

Var Model::embed(Tape& tape, const Parameter& table, std::span<const TokenId> ids, const Regularizer& reg) const {
  if (ids.empty()) fail(ErrorCode::kInvalidArgument, "empty token sequence");
  if (ids.size() > cfg_.max_positions)
    fail(ErrorCode::kInvalidArgument, "sequence of length " + std::to_string(ids.size()) +
                                          " exceeds max_positions " + std::to_string(cfg_.max_positions));
  Tensor pos({ids.size(), cfg_.dim});
  std::copy_n(positions_.data().begin(), pos.size(), pos.data().begin());
  Var x = embedding(tape.param(table), ids, std::sqrt(static_cast<double>(cfg_.dim)));
  return dropout(add_constant(x, pos), reg.rate, reg.rng);
}

Model::EncoderResult Model::encode(Tape& tape, std::span<const TokenId> src, const Regularizer& reg) const {
  EncoderResult result;
  Var x = embed(tape, params_.src_embedding, src, reg);
  const MaskMatrix global_mask = with_key_padding(zero_mask(src.size()), src, cfg_.pad_id);
  const bool two_stream = cfg_.variant == Variant::kLongShort;
  StreamState s{x, two_stream ? x : Var{}};
  result.layers.push_back(s);
  if (two_stream) {
    const MaskMatrix local_mask = with_key_padding(local_block_mask(src, cfg_.sep_id), src, cfg_.pad_id);
    for (const auto& layer : params_.encoder) {
      s = lst_self_attention(s, global_mask, local_mask, layer.self_attn, layer.self_norm, reg);
      s.global = residual_norm(s.global, feed_forward(s.global, layer.ffn, reg), layer.ffn_norm, reg);
      s.local = residual_norm(s.local, feed_forward(s.local, layer.ffn, reg), layer.ffn_norm, reg);
      result.layers.push_back(s);
    }
    result.memory = combine_streams(s.global, s.local, *params_.encoder_combine);
  } else {
    for (const auto& layer : params_.encoder) {
      Var h = residual_norm(s.global, multi_head(s.global, s.global, global_mask.bias(), layer.self_attn, reg),
                            layer.self_norm, reg);
      s.global = residual_norm(h, feed_forward(h, layer.ffn, reg), layer.ffn_norm, reg);
      result.layers.push_back(s);
    }
    result.memory = s.global;
  }
  return result;
}

Model::DecoderResult Model::decode(Tape& tape, Var memory, std::span<const TokenId> src,
                                   std::span<const TokenId> tgt_in, const Regularizer& reg) const {
  if (tgt_in.empty()) fail(ErrorCode::kInvalidArgument, "decode: empty target prefix");
  if (tgt_in.front() != cfg_.bos_id) fail(ErrorCode::kInvalidArgument, "decode: target prefix must start with bos");
  if (memory.value().rows() != src.size())
    fail(ErrorCode::kShape, "decode: memory has " + std::to_string(memory.value().rows()) + " rows for " +
                                std::to_string(src.size()) + " source tokens");
  DecoderResult result;
  const std::size_t len = tgt_in.size();
  Var y = embed(tape, params_.tgt_embedding, tgt_in, reg);
  const MaskMatrix global_mask = with_key_padding(causal_mask(len), tgt_in, cfg_.pad_id);
  const Tensor cross_bias = key_padding_bias(len, src, cfg_.pad_id);
  const bool two_stream = cfg_.variant == Variant::kLongShort;
  StreamState s{y, two_stream ? y : Var{}};
  result.layers.push_back(s);
  auto cross_and_ffn = [&](Var h, const DecoderLayerParams& layer) {
    h = residual_norm(h, multi_head(h, memory, cross_bias, layer.cross_attn, reg), layer.cross_norm, reg);
    return residual_norm(h, feed_forward(h, layer.ffn, reg), layer.ffn_norm, reg);
  };
  Var top;
  if (two_stream) {
    const MaskMatrix local_mask = with_key_padding(decoder_local_mask(tgt_in, cfg_.sep_id), tgt_in, cfg_.pad_id);
    for (const auto& layer : params_.decoder) {
      s = lst_self_attention(s, global_mask, local_mask, layer.self_attn, layer.self_norm, reg);
      s.global = cross_and_ffn(s.global, layer);
      s.local = cross_and_ffn(s.local, layer);
      result.layers.push_back(s);
    }
    top = combine_streams(s.global, s.local, *params_.decoder_combine);
  } else {
    for (const auto& layer : params_.decoder) {
      Var h = residual_norm(s.global, multi_head(s.global, s.global, global_mask.bias(), layer.self_attn, reg),
                            layer.self_norm, reg);
      s.global = cross_and_ffn(h, layer);
      result.layers.push_back(s);
    }
    top = s.global;
  }
  Var logits = params_.output_weight ? matmul(top, tape.param(*params_.output_weight))
                                     : matmul_nt(top, tape.param(params_.tgt_embedding));
  result.logits = add_row_vector(logits, tape.param(params_.output_bias));
  return result;
}

Tensor Model::encode(std::span<const TokenId> src) const {
  Tape tape(false);
  return encode(tape, src).memory.value();
}

Tensor Model::decode_logits(const Tensor& memory, std::span<const TokenId> src, std::span<const TokenId> tgt_in) const {
  Tape tape(false);
  Var mem = tape.constant(memory);
  return decode(tape, mem, src, tgt_in).logits.value();
}

Var Model::loss(Tape& tape, std::span<const TokenId> src, const TeacherForcing& tf, double smoothing,
                Reduction reduction, const Regularizer& reg) const {
  Var memory = encode(tape, src, reg).memory;
  Var logits = decode(tape, memory, src, tf.input, reg).logits;
  return cross_entropy(logits, tf.targets, cfg_.pad_id, smoothing, reduction);
}

double Model::sequence_log_prob(std::span<const TokenId> src, std::span<const TokenId> tgt) const {
  const TeacherForcing tf = teacher_forcing(tgt, cfg_);
  const Tensor memory = encode(src);
  const Tensor logp = dense::log_softmax_rows(decode_logits(memory, src, tf.input));
  double total = 0.0;
  for (std::size_t i = 0; i < tf.targets.size(); ++i) total += logp.at(i, static_cast<std::size_t>(tf.targets[i]));
  return total;
}

TeacherForcing teacher_forcing(std::span<const TokenId> tgt, const ModelConfig& cfg, std::size_t padded_len) {
  const std::size_t len = std::max(padded_len, tgt.size()) + 1;
  TeacherForcing tf;
  tf.input.reserve(len);
  tf.targets.reserve(len);
  tf.input.push_back(cfg.bos_id);
  tf.input.insert(tf.input.end(), tgt.begin(), tgt.end());
  tf.targets.assign(tgt.begin(), tgt.end());
  tf.targets.push_back(cfg.eos_id);
  tf.input.resize(len, cfg.pad_id);
  tf.targets.resize(len, cfg.pad_id);
  return tf;
}

}  // namespace docmt
