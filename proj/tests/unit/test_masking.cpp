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

#include <vector>

#include "docmt/error.hpp"
#include "docmt/masking.hpp"

using namespace docmt;

namespace {

constexpr TokenId kSep = 3;
constexpr TokenId kW = 7;

// Two positions share a sentence iff no separator occurs in (lo, hi]. This
// never forms the running count, so it is independent of segment_index.
bool same_sentence(const std::vector<TokenId>& t, std::size_t i, std::size_t j) {
  const std::size_t lo = std::min(i, j), hi = std::max(i, j);
  for (std::size_t p = lo + 1; p <= hi; ++p)
    if (t[p] == kSep) return false;
  return true;
}

std::vector<TokenId> random_tokens(Rng& rng, std::size_t n, double sep_rate) {
  std::vector<TokenId> t(n);
  for (auto& v : t) v = rng.uniform() < sep_rate ? kSep : static_cast<TokenId>(4 + rng.below(10));
  return t;
}

}  // namespace

TEST_CASE("zero_mask") {
  CHECK(zero_mask(1).bias() == Tensor::from_rows({{0}}));
  CHECK(zero_mask(2).bias() == Tensor::from_rows({{0, 0}, {0, 0}}));
  CHECK(zero_mask(3).bias() == Tensor::zeros(3, 3));
  CHECK_THROWS_AS(zero_mask(0), Error);
}

TEST_CASE("causal_mask") {
  CHECK(causal_mask(3).bias() == Tensor::from_rows({{0, -1e9, -1e9}, {0, 0, -1e9}, {0, 0, 0}}));
  CHECK(causal_mask(1).bias() == Tensor::from_rows({{0}}));
  CHECK(causal_mask(2)(0, 0) == 0.0);
  CHECK(causal_mask(2)(0, 1) == -1e9);
  CHECK_THROWS_AS(causal_mask(0), Error);
}

TEST_CASE("segment_index") {
  CHECK(segment_index(std::vector<TokenId>{kW, kW, kSep, kW, kW}, kSep) == std::vector<int>{0, 0, 1, 1, 1});
  CHECK(segment_index(std::vector<TokenId>{kW, kW, kW}, kSep) == std::vector<int>{0, 0, 0});
  CHECK(segment_index(std::vector<TokenId>{kSep, kW}, kSep) == std::vector<int>{1, 1});
}

TEST_CASE("local_block_mask") {
  const MaskMatrix m = local_block_mask(std::vector<TokenId>{kW, kW, kSep, kW}, kSep);
  const double N = kNegInf;
  CHECK(m.bias() == Tensor::from_rows({{0, 0, N, N}, {0, 0, N, N}, {N, N, 0, 0}, {N, N, 0, 0}}));
  CHECK(local_block_mask(std::vector<TokenId>{kW, kW, kW}, kSep) == zero_mask(3));
  const MaskMatrix three = local_block_mask(std::vector<TokenId>{kW, kSep, kW, kSep, kW}, kSep);
  CHECK(three.bias() == Tensor::from_rows({{0, N, N, N, N},
                                           {N, 0, 0, N, N},
                                           {N, 0, 0, N, N},
                                           {N, N, N, 0, 0},
                                           {N, N, N, 0, 0}}));
}

TEST_CASE("decoder_local_mask") {
  const std::vector<TokenId> t{kW, kSep, kW};
  const MaskMatrix m = decoder_local_mask(t, kSep);
  CHECK(m(2, 0) == kNegInf);
  CHECK(m(2, 1) == 0.0);
  CHECK(m(2, 2) == 0.0);
  CHECK(m(0, 2) == kNegInf);
  CHECK(decoder_local_mask(std::vector<TokenId>{kW, kW, kW, kW}, kSep) == causal_mask(4));
}

TEST_CASE("masks match the pairwise oracle on random sequences") {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_tokens(rng, 1 + rng.below(40), rng.uniform() * 0.4);
    const MaskMatrix enc = local_block_mask(t, kSep);
    const MaskMatrix dec = decoder_local_mask(t, kSep);
    const MaskMatrix causal = causal_mask(t.size());
    CHECK(dec == saturating_combine(causal, enc));
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t j = 0; j < t.size(); ++j) {
        const bool same = same_sentence(t, i, j);
        REQUIRE(enc(i, j) == (same ? 0.0 : kNegInf));
        REQUIRE(dec(i, j) == (same && j <= i ? 0.0 : kNegInf));
        REQUIRE(enc(i, j) == enc(j, i));
      }
    }
  }
}

TEST_CASE("saturating combine never goes below -1e9") {
  const MaskMatrix c = saturating_combine(causal_mask(3), causal_mask(3));
  CHECK(c == causal_mask(3));
}

TEST_CASE("key padding blocks pad columns only") {
  const std::vector<TokenId> keys{kW, kW, 0};
  const MaskMatrix m = with_key_padding(zero_mask(3), keys, 0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m(i, 2) == kNegInf);
    CHECK(m(i, 0) == 0.0);
  }
  const Tensor cross = key_padding_bias(2, keys, 0);
  CHECK(cross.shape() == Shape{2, 3});
  CHECK(cross.at(1, 2) == kNegInf);
}

TEST_CASE("MaskMatrix rejects values outside {0, -1e9}") {
  CHECK_THROWS_AS(MaskMatrix(Tensor::from_rows({{0, -1}, {0, 0}})), Error);
  CHECK_THROWS_AS(MaskMatrix(Tensor::zeros(2, 3)), Error);
}

TEST_CASE("render_mask") {
  const MaskMatrix m = local_block_mask(std::vector<TokenId>{kW, kW, kSep, kW}, kSep);
  CHECK(render_mask(m) == "00--\n00--\n--00\n--00\n");
}
