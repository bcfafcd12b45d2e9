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

#include "docmt/autograd.hpp"

namespace docmt {

// Affine map y = x W + b with W stored as (in x out).
struct LinearParams {
  Parameter weight;
  Parameter bias;
};

struct LayerNormParams {
  Parameter gain;
  Parameter bias;
};

// Position-wise relu(x W1 + b1) W2 + b2.
struct FeedForwardParams {
  LinearParams inner;
  LinearParams outer;
};

// Dropout settings threaded through a forward pass. rng == nullptr means
// evaluation mode.
struct Regularizer {
  double rate = 0.0;
  Rng* rng = nullptr;
};

LinearParams make_linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
LayerNormParams make_layer_norm(const std::string& name, std::size_t dim);
FeedForwardParams make_feed_forward(const std::string& name, std::size_t dim, std::size_t hidden, Rng& rng);

Var linear(Var x, const LinearParams& p);
Var feed_forward(Var x, const FeedForwardParams& p, const Regularizer& reg);
Var apply_layer_norm(Var x, const LayerNormParams& p);

// Post-norm residual block: layer_norm(x + dropout(sublayer_out)).
Var residual_norm(Var x, Var sublayer_out, const LayerNormParams& norm, const Regularizer& reg);

}  // namespace docmt
