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
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "docmt/tensor.hpp"

namespace docmt {

// A learned tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad = Tensor(value.shape()); }
};

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// that produced it is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode computation record. Nodes are appended in evaluation order, so
// every node's inputs precede it and a reverse sweep is a valid topological
// traversal. With recording off the tape only keeps values.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var constant(Tensor value);
  // Differentiable input whose gradient is readable through grad() after backward.
  Var leaf(Tensor value);
  // Binds a parameter once per tape. After backward its gradient is read with
  // param_grad(); the parameter itself is never written.
  Var param(const Parameter& parameter);
  // Zeros when the parameter was not bound or received no gradient.
  Tensor param_grad(const Parameter& parameter) const;
  bool bound(const Parameter& parameter) const { return bound_.contains(&parameter); }

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  // Gradient of the last backward() target with respect to v; zeros when v
  // did not contribute.
  Tensor grad(Var v) const;

  // Seeds d(loss) = seed and propagates. loss must hold a single element.
  void backward(Var loss, double seed = 1.0);

  // Hooks used by operation implementations.
  Var push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var push(Tensor value, std::span<const Var> inputs, BackwardFn backward);
  const Tensor& value_at(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad_at(std::size_t id) const { return nodes_[id].grad; }
  Tensor& grad_buffer(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  bool record_;
  // deque: values stay addressable while later nodes are appended.
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> bound_;
};

// Plain tensor kernels. These carry no gradient and are shared by the tape
// operations and by inference-only code paths.
namespace dense {

// c (+)= a * b, a: m x k, b: k x n.
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate);
// c (+)= a * b^T, a: m x k, b: n x k.
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate);
// c (+)= a^T * b, a: k x m, b: k x n.
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
Tensor log_softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

}  // namespace dense

inline constexpr double kLayerNormEps = 1e-6;

Var matmul(Var a, Var b);
// a * b^T without materializing the transpose.
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
// Adds a length-cols vector to every row.
Var add_row_vector(Var x, Var bias);
// Adds a constant tensor of identical shape (masks, positional encodings).
Var add_constant(Var x, const Tensor& c);
Var relu(Var x);
Var softmax_rows(Var x);
Var layer_norm(Var x, Var gain, Var bias, double eps = kLayerNormEps);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t begin, std::size_t width);
// Gathers rows of table at ids, multiplied by factor.
Var embedding(Var table, std::span<const TokenId> ids, double factor = 1.0);
// Inverted dropout; identity when rate == 0 or rng is null.
Var dropout(Var x, double rate, Rng* rng);
Var sum(Var x);
Var pick(Var x, std::size_t index);

enum class Reduction { kMean, kSum };

// Negative log-likelihood of targets under softmax(logits), skipping
// positions whose target is pad_id. With smoothing > 0 the target
// distribution is (1 - smoothing) one-hot + smoothing / V uniform.
Var cross_entropy(Var logits, std::span<const TokenId> targets, TokenId pad_id,
                  double smoothing = 0.0, Reduction reduction = Reduction::kMean);

}  // namespace docmt
