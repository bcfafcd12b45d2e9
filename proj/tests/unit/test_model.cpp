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

#include <doctest.h>

#include <cmath>

#include "docmt/error.hpp"
#include "docmt/model.hpp"
#include "support/gradcheck.hpp"

using namespace docmt;

namespace {

ModelConfig tiny(Variant variant, std::size_t dim = 8) {
  ModelConfig cfg;
  cfg.dim = dim;
  cfg.heads = 2;
  cfg.encoder_layers = 2;
  cfg.decoder_layers = 2;
  cfg.ffn_dim = 16;
  cfg.vocab_src = 16;
  cfg.vocab_tgt = 16;
  cfg.k = 2;
  cfg.max_positions = 64;
  cfg.dropout = 0.0;
  cfg.variant = variant;
  return cfg;
}

std::vector<TokenId> random_sentence_ids(Rng& rng, std::size_t n) {
  std::vector<TokenId> t(n);
  for (auto& v : t) v = static_cast<TokenId>(5 + rng.below(11));
  return t;
}

}  // namespace

TEST_CASE("param_count closed form differences") {
  ModelConfig base;
  base.vocab_src = 10296;
  base.vocab_tgt = 16018;
  base.variant = Variant::kBaseline;
  ModelConfig lst = base;
  lst.variant = Variant::kLongShort;
  // 2 * (2 * 512 * 512 + 512)
  CHECK(param_count(lst) - param_count(base) == 1049600);

  ModelConfig small = tiny(Variant::kBaseline, 4);
  ModelConfig small_lst = tiny(Variant::kLongShort, 4);
  CHECK(param_count(small_lst) - param_count(small) == 72);
}

TEST_CASE("param_count matches a hand enumeration") {
  ModelConfig cfg = tiny(Variant::kBaseline, 4);
  cfg.encoder_layers = cfg.decoder_layers = 1;
  cfg.ffn_dim = 8;
  cfg.vocab_src = cfg.vocab_tgt = 10;
  // embeddings 10*4 + 10*4                                   = 80
  // encoder: attention 4*(16+4)=80, norms 2*8=16, ffn 32+8+32+4 = 172
  // decoder: attention 2*80=160, norms 3*8=24, ffn 76            = 260
  // output bias (projection tied)                               = 10
  CHECK(param_count(cfg) == 522);
  CHECK(Parameters::initialize(cfg, 1).scalar_count() == 522);
}

TEST_CASE("param_count agrees with the instantiated parameter set") {
  for (Variant v : {Variant::kBaseline, Variant::kLongShort}) {
    for (bool tie : {true, false}) {
      ModelConfig cfg = tiny(v);
      cfg.tie_output = tie;
      cfg.vocab_tgt = 13;
      CHECK(Parameters::initialize(cfg, 3).scalar_count() == param_count(cfg));
      const bool has_combine = Parameters::initialize(cfg, 3).encoder_combine.has_value();
      CHECK(has_combine == (v == Variant::kLongShort));
    }
  }
}

TEST_CASE("config serialization round-trips") {
  ModelConfig cfg = tiny(Variant::kLongShort);
  cfg.dropout = 0.1;
  CHECK(ModelConfig::parse(cfg.serialize()) == cfg);
}

TEST_CASE("config validation") {
  ModelConfig cfg = tiny(Variant::kLongShort);
  cfg.heads = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny(Variant::kLongShort);
  cfg.sep_id = cfg.pad_id;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = tiny(Variant::kLongShort);
  cfg.vocab_tgt = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("encode: shape and single-sentence stream degeneration") {
  Rng rng(1);
  const Model model(tiny(Variant::kLongShort), 11);
  const auto src = random_sentence_ids(rng, 7);
  Tape tape(false);
  const auto enc = model.encode(tape, src);
  CHECK(enc.memory.value().shape() == Shape{7, 8});
  CHECK(enc.layers.size() == 3);
  for (const auto& s : enc.layers) CHECK(s.global.value() == s.local.value());
}

TEST_CASE("encode: earlier sentence reaches later memory positions") {
  Rng rng(2);
  const ModelConfig cfg = tiny(Variant::kLongShort);
  const Model model(cfg, 12);
  std::vector<TokenId> src{5, 6, 7, cfg.sep_id, 8, 9};
  const Tensor a = model.encode(src);
  src[1] = 10;
  const Tensor b = model.encode(src);
  double diff = 0.0;
  for (std::size_t r = 3; r < 6; ++r)
    for (std::size_t c = 0; c < 8; ++c) diff = std::max(diff, std::abs(a.at(r, c) - b.at(r, c)));
  CHECK(diff > 1e-6);
}

TEST_CASE("encode: local stream of a sentence ignores the other sentences") {
  Rng rng(3);
  const ModelConfig cfg = tiny(Variant::kLongShort);
  const Model model(cfg, 13);
  std::vector<TokenId> src{5, 6, 7, cfg.sep_id, 8, 9, cfg.sep_id, 10};
  Tape t1(false), t2(false);
  const auto a = model.encode(t1, src);
  src[0] = 14;
  src[7] = 15;
  const auto b = model.encode(t2, src);
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    for (std::size_t r = 3; r < 6; ++r)
      for (std::size_t c = 0; c < 8; ++c) CHECK(a.layers[l].local.value().at(r, c) == b.layers[l].local.value().at(r, c));
}

TEST_CASE("decode: logits shape and causality for both variants") {
  Rng rng(4);
  for (Variant v : {Variant::kBaseline, Variant::kLongShort}) {
    const ModelConfig cfg = tiny(v);
    const Model model(cfg, 14);
    const auto src = random_sentence_ids(rng, 6);
    std::vector<TokenId> tgt{cfg.bos_id, 5, 6, cfg.sep_id, 7, 8};
    const Tensor memory = model.encode(src);
    const Tensor full = model.decode_logits(memory, src, tgt);
    CHECK(full.shape() == Shape{6, 16});
    // Incremental decoding: each prefix reproduces the matching row.
    for (std::size_t t = 1; t <= tgt.size(); ++t) {
      const Tensor part = model.decode_logits(memory, src, std::span(tgt).first(t));
      for (std::size_t c = 0; c < 16; ++c) CHECK(std::abs(part.at(t - 1, c) - full.at(t - 1, c)) <= 1e-10);
    }
  }
}

TEST_CASE("decode: prefix contract") {
  const ModelConfig cfg = tiny(Variant::kLongShort);
  const Model model(cfg, 15);
  const std::vector<TokenId> src{5, 6};
  const Tensor memory = model.encode(src);
  CHECK_THROWS_AS(model.decode_logits(memory, src, std::vector<TokenId>{}), Error);
  CHECK_THROWS_AS(model.decode_logits(memory, src, std::vector<TokenId>{5, 6}), Error);
  CHECK_THROWS_AS(model.encode(std::vector<TokenId>(65, 5)), Error);
}

TEST_CASE("right padding leaves real positions unchanged") {
  Rng rng(5);
  for (Variant v : {Variant::kBaseline, Variant::kLongShort}) {
    const ModelConfig cfg = tiny(v);
    const Model model(cfg, 16);
    std::vector<TokenId> src{5, 6, cfg.sep_id, 7};
    const std::vector<TokenId> tgt{8, cfg.sep_id, 9};
    const auto tf = teacher_forcing(tgt, cfg);
    const Tensor ref = model.decode_logits(model.encode(src), src, tf.input);
    for (std::size_t extra : {1, 3}) {
      std::vector<TokenId> psrc = src;
      psrc.resize(src.size() + extra, cfg.pad_id);
      const auto ptf = teacher_forcing(tgt, cfg, tgt.size() + extra);
      const Tensor padded = model.decode_logits(model.encode(psrc), psrc, ptf.input);
      for (std::size_t r = 0; r < ref.rows(); ++r)
        for (std::size_t c = 0; c < ref.cols(); ++c) CHECK(std::abs(padded.at(r, c) - ref.at(r, c)) <= 1e-10);
    }
  }
}

TEST_CASE("sequence log-probability is the sum of stepwise log-probabilities") {
  const ModelConfig cfg = tiny(Variant::kLongShort);
  const Model model(cfg, 17);
  const std::vector<TokenId> src{5, 6, cfg.sep_id, 7};
  const std::vector<TokenId> tgt{8, cfg.sep_id, 9};
  std::vector<TokenId> prefix{cfg.bos_id};
  std::vector<TokenId> full = tgt;
  full.push_back(cfg.eos_id);
  const Tensor memory = model.encode(src);
  double stepwise = 0.0;
  for (TokenId next : full) {
    const Tensor logp = dense::log_softmax_rows(model.decode_logits(memory, src, prefix));
    stepwise += logp.at(prefix.size() - 1, static_cast<std::size_t>(next));
    prefix.push_back(next);
  }
  CHECK(std::abs(model.sequence_log_prob(src, tgt) - stepwise) <= 1e-10);
}

TEST_CASE("combine_streams") {
  Rng rng(6);
  Tape tape(false);
  LinearParams zero = make_linear("c", 8, 4, rng);
  zero.weight.value.fill(0.0);
  zero.bias.value = Tensor({4}, {1, -2, 3, 0.5});
  Var g = tape.constant(docmt::testing::random_tensor({3, 4}, rng));
  Var l = tape.constant(docmt::testing::random_tensor({3, 4}, rng));
  const Tensor constant = combine_streams(g, l, zero).value();
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) CHECK(constant.at(r, c) == zero.bias.value[c]);

  const LinearParams w = make_linear("c", 8, 4, rng);
  const Tensor out = combine_streams(g, l, w).value();
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      double expected = w.bias.value[c];
      for (std::size_t j = 0; j < 4; ++j) {
        expected += g.value().at(r, j) * w.weight.value.at(j, c);
        expected += l.value().at(r, j) * w.weight.value.at(4 + j, c);
      }
      CHECK(std::abs(out.at(r, c) - expected) <= 1e-12);
    }
  }
  CHECK(combine_streams(g, g, w).value() == combine_streams(g, g, w).value());
  CHECK_THROWS_AS(combine_streams(g, tape.constant(Tensor::zeros(2, 4)), w), Error);
}

TEST_CASE("end-to-end gradient on a tiny model") {
  Rng rng(7);
  for (Variant v : {Variant::kBaseline, Variant::kLongShort}) {
    ModelConfig cfg = tiny(v);
    Model model(cfg, 18);
    const std::vector<TokenId> src{5, 6, 7, 8, 9, cfg.sep_id, 10, 11, 12, 13, 14, 15};
    const std::vector<TokenId> tgt{6, 7, 8, 9, 10, cfg.sep_id, 11, 12, 13, 14, 15};
    const auto tf = teacher_forcing(tgt, cfg);
    auto loss = [&](Tape& tape) { return model.loss(tape, src, tf, 0.0, Reduction::kMean); };
    // Every seventh scalar keeps the unit test quick; the acceptance suite
    // checks all of them.
    const auto r = docmt::testing::param_grad_check(loss, model.params().list(), 1e-5, 7);
    CHECK(r.max_rel_error <= 1e-4);
  }
}
