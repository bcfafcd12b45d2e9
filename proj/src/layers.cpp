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

#include "docmt/layers.hpp"

#include <cmath>

namespace docmt {

LinearParams make_linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  LinearParams p;
  p.weight.name = name + ".weight";
  p.weight.value = Tensor({in, out});
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : p.weight.value.data()) w = rng.uniform(-limit, limit);
  p.bias.name = name + ".bias";
  p.bias.value = Tensor({out});
  return p;
}

LayerNormParams make_layer_norm(const std::string& name, std::size_t dim) {
  LayerNormParams p;
  p.gain.name = name + ".gain";
  p.gain.value = Tensor({dim});
  p.gain.value.fill(1.0);
  p.bias.name = name + ".bias";
  p.bias.value = Tensor({dim});
  return p;
}

FeedForwardParams make_feed_forward(const std::string& name, std::size_t dim, std::size_t hidden, Rng& rng) {
  return {make_linear(name + ".inner", dim, hidden, rng), make_linear(name + ".outer", hidden, dim, rng)};
}

Var linear(Var x, const LinearParams& p) {
  Tape& tape = x.tape();
  return add_row_vector(matmul(x, tape.param(p.weight)), tape.param(p.bias));
}

Var feed_forward(Var x, const FeedForwardParams& p, const Regularizer& reg) {
  return linear(dropout(relu(linear(x, p.inner)), reg.rate, reg.rng), p.outer);
}

Var apply_layer_norm(Var x, const LayerNormParams& p) {
  Tape& tape = x.tape();
  return layer_norm(x, tape.param(p.gain), tape.param(p.bias));
}

Var residual_norm(Var x, Var sublayer_out, const LayerNormParams& norm, const Regularizer& reg) {
  return apply_layer_norm(add(x, dropout(sublayer_out, reg.rate, reg.rng)), norm);
}

}  // namespace docmt
