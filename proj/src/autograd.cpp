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

#include "docmt/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "docmt/error.hpp"

namespace docmt {

const Tensor& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = record_;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(const Parameter& parameter) {
  if (auto it = bound_.find(&parameter); it != bound_.end()) return Var(this, it->second);
  Node node;
  node.value = parameter.value;
  node.requires_grad = record_;
  nodes_.push_back(std::move(node));
  bound_.emplace(&parameter, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  return node.grad.empty() && !node.value.empty() ? Tensor(node.value.shape()) : node.grad;
}

Tensor Tape::param_grad(const Parameter& parameter) const {
  auto it = bound_.find(&parameter);
  if (it == bound_.end()) return Tensor(parameter.value.shape());
  const Node& node = nodes_[it->second];
  return node.grad.empty() ? Tensor(parameter.value.shape()) : node.grad;
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.size() != node.value.size()) node.grad = Tensor(node.value.shape());
  return node.grad;
}

Var Tape::push(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::push(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (const Var& in : inputs) {
      if (&in.tape() != this) fail(ErrorCode::kInternal, "operation mixes values from different tapes");
      if (in.id() >= nodes_.size()) fail(ErrorCode::kInternal, "tape cycle: input recorded after its consumer");
      node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
      node.inputs.push_back(in.id());
    }
    if (node.requires_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss, double seed) {
  if (!record_) fail(ErrorCode::kState, "backward on a tape that is not recording");
  if (loss.value().size() != 1)
    fail(ErrorCode::kShape, "backward needs a scalar loss, got " + shape_string(loss.value().shape()));
  for (Node& node : nodes_) node.grad = Tensor();
  grad_buffer(loss.id())[0] = seed;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.empty()) continue;
    for (std::size_t in : node.inputs)
      if (in >= id) fail(ErrorCode::kInternal, "tape cycle detected during backward");
    if (node.backward) node.backward(*this, id);
  }
}

namespace dense {
namespace {

void check_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) fail(ErrorCode::kShape, std::string(what) + " expects a matrix, got " + shape_string(t.shape()));
}

void prepare_output(Tensor& c, std::size_t m, std::size_t n, bool accumulate) {
  if (!accumulate || c.shape() != Shape{m, n}) {
    if (accumulate) fail(ErrorCode::kShape, "gemm accumulator has shape " + shape_string(c.shape()));
    c = Tensor({m, n});
  }
}

}  // namespace

void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_matrix(a, "matmul");
  check_matrix(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k)
    fail(ErrorCode::kShape, "matmul dimension mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  prepare_output(c, m, n, accumulate);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_matrix(a, "matmul_nt");
  check_matrix(b, "matmul_nt");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k)
    fail(ErrorCode::kShape,
         "matmul_nt dimension mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()) + "^T");
  prepare_output(c, m, n, accumulate);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = pa + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = pb + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      pc[i * n + j] += s;
    }
  }
}

void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_matrix(a, "matmul_tn");
  check_matrix(b, "matmul_tn");
  const std::size_t k = a.shape()[0], m = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k)
    fail(ErrorCode::kShape,
         "matmul_tn dimension mismatch: " + shape_string(a.shape()) + "^T x " + shape_string(b.shape()));
  prepare_output(c, m, n, accumulate);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = pb + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = pa[p * m + i];
      if (av == 0.0) continue;
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor c;
  gemm_nn(a, b, c, false);
  return c;
}

Tensor softmax_rows(const Tensor& x) {
  if (x.rank() < 1 || x.cols() == 0) fail(ErrorCode::kShape, "softmax_rows on " + shape_string(x.shape()));
  if (!x.all_finite()) fail(ErrorCode::kNumeric, "softmax_rows: non-finite input");
  Tensor y(x.shape());
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += (out[j] = std::exp(in[j] - mx));
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < n; ++j) out[j] *= inv;
  }
  return y;
}

Tensor log_softmax_rows(const Tensor& x) {
  if (!x.all_finite()) fail(ErrorCode::kNumeric, "log_softmax_rows: non-finite input");
  Tensor y(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (double v : in) total += std::exp(v - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = in[j] - lse;
  }
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t n = x.cols();
  if (gain.size() != n || bias.size() != n)
    fail(ErrorCode::kShape, "layer_norm: gain/bias " + shape_string(gain.shape()) + "/" +
                                shape_string(bias.shape()) + " vs input " + shape_string(x.shape()));
  Tensor y(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) out[j] = gain[j] * (in[j] - mean) * inv + bias[j];
  }
  return y;
}

}  // namespace dense

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    fail(ErrorCode::kShape, std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                                shape_string(b.shape()));
}

void accumulate(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = a.tape();
  Tensor out = dense::matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    if (tape.needs_grad(ia)) dense::gemm_nt(g, tape.value_at(ib), tape.grad_buffer(ia), true);
    if (tape.needs_grad(ib)) dense::gemm_tn(tape.value_at(ia), g, tape.grad_buffer(ib), true);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = a.tape();
  Tensor out;
  dense::gemm_nt(a.value(), b.value(), out, false);
  const std::size_t ia = a.id(), ib = b.id();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    if (tape.needs_grad(ia)) dense::gemm_nn(g, tape.value_at(ib), tape.grad_buffer(ia), true);
    if (tape.needs_grad(ib)) dense::gemm_tn(g, tape.value_at(ia), tape.grad_buffer(ib), true);
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  accumulate(out, b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().push(std::move(out), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    if (tape.needs_grad(ia)) accumulate(tape.grad_buffer(ia), g);
    if (tape.needs_grad(ib)) accumulate(tape.grad_buffer(ib), g);
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().push(std::move(out), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    const Tensor& va = tape.value_at(ia);
    const Tensor& vb = tape.value_at(ib);
    if (tape.needs_grad(ia)) {
      Tensor& ga = tape.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (tape.needs_grad(ib)) {
      Tensor& gb = tape.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, factor](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    Tensor& gx = tape.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var add_row_vector(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols())
    fail(ErrorCode::kShape, "add_row_vector: bias " + shape_string(bv.shape()) + " vs " + shape_string(xv.shape()));
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += bv[j];
  }
  const std::size_t ix = x.id(), ib = bias.id();
  return x.tape().push(std::move(out), {x, bias}, [ix, ib](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    if (tape.needs_grad(ix)) accumulate(tape.grad_buffer(ix), g);
    if (tape.needs_grad(ib)) {
      Tensor& gb = tape.grad_buffer(ib);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) gb[j] += row[j];
      }
    }
  });
}

Var add_constant(Var x, const Tensor& c) {
  require_same_shape(x.value(), c, "add_constant");
  Tensor out = x.value();
  accumulate(out, c);
  const std::size_t ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix](Tape& tape, std::size_t self) {
    accumulate(tape.grad_buffer(ix), tape.grad_at(self));
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    const Tensor& in = tape.value_at(ix);
    Tensor& gx = tape.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in[i] > 0.0) gx[i] += g[i];
  });
}

Var softmax_rows(Var x) {
  Tensor out = dense::softmax_rows(x.value());
  const std::size_t ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    const Tensor& y = tape.value_at(self);
    Tensor& gx = tape.grad_buffer(ix);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto gr = g.row(r);
      auto out = gx.row(r);
      double dot = 0.0;
      for (std::size_t j = 0; j < yr.size(); ++j) dot += yr[j] * gr[j];
      for (std::size_t j = 0; j < yr.size(); ++j) out[j] += yr[j] * (gr[j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.cols();
  Tensor out = dense::layer_norm(xv, gain.value(), bias.value(), eps);
  // Normalized activations and inverse deviations are needed again in the
  // backward pass.
  Tensor normalized(xv.shape());
  std::vector<double> inv_std(xv.rows());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto in = xv.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    auto nr = normalized.row(r);
    for (std::size_t j = 0; j < n; ++j) nr[j] = (in[j] - mean) * inv_std[r];
  }
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape().push(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, normalized = std::move(normalized), inv_std = std::move(inv_std)](Tape& tape, std::size_t self) {
        const Tensor& g = tape.grad_at(self);
        const Tensor& gv = tape.value_at(ig);
        const std::size_t cols = g.cols();
        if (tape.needs_grad(ig) || tape.needs_grad(ib)) {
          Tensor& gg = tape.grad_buffer(ig);
          Tensor& gb = tape.grad_buffer(ib);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            auto gr = g.row(r);
            auto nr = normalized.row(r);
            for (std::size_t j = 0; j < cols; ++j) {
              gg[j] += gr[j] * nr[j];
              gb[j] += gr[j];
            }
          }
        }
        if (!tape.needs_grad(ix)) return;
        Tensor& gx = tape.grad_buffer(ix);
        std::vector<double> dhat(cols);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto gr = g.row(r);
          auto nr = normalized.row(r);
          double mean_d = 0.0, mean_dn = 0.0;
          for (std::size_t j = 0; j < cols; ++j) {
            dhat[j] = gr[j] * gv[j];
            mean_d += dhat[j];
            mean_dn += dhat[j] * nr[j];
          }
          mean_d /= static_cast<double>(cols);
          mean_dn /= static_cast<double>(cols);
          auto out = gx.row(r);
          for (std::size_t j = 0; j < cols; ++j) out[j] += inv_std[r] * (dhat[j] - mean_d - nr[j] * mean_dn);
        }
      });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) fail(ErrorCode::kShape, "concat_cols with no inputs");
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rank() != 2 || p.value().rows() != rows)
      fail(ErrorCode::kShape, "concat_cols: row mismatch " + shape_string(p.value().shape()));
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out({rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + offset);
    offset += widths[k];
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id());
  return parts[0].tape().push(std::move(out), parts,
                              [ids = std::move(ids), widths = std::move(widths)](Tape& tape, std::size_t self) {
                                const Tensor& g = tape.grad_at(self);
                                std::size_t offset = 0;
                                for (std::size_t k = 0; k < ids.size(); ++k) {
                                  if (tape.needs_grad(ids[k])) {
                                    Tensor& gp = tape.grad_buffer(ids[k]);
                                    for (std::size_t r = 0; r < g.rows(); ++r) {
                                      auto src = g.row(r).subspan(offset, widths[k]);
                                      auto dst = gp.row(r);
                                      for (std::size_t j = 0; j < widths[k]; ++j) dst[j] += src[j];
                                    }
                                  }
                                  offset += widths[k];
                                }
                              });
}

Var slice_cols(Var x, std::size_t begin, std::size_t width) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || begin + width > xv.cols())
    fail(ErrorCode::kShape, "slice_cols [" + std::to_string(begin) + ", +" + std::to_string(width) + ") of " +
                                shape_string(xv.shape()));
  Tensor out({xv.rows(), width});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto src = xv.row(r).subspan(begin, width);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  const std::size_t ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, begin, width](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    Tensor& gx = tape.grad_buffer(ix);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto dst = gx.row(r).subspan(begin, width);
      auto src = g.row(r);
      for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
    }
  });
}

Var embedding(Var table, std::span<const TokenId> ids, double factor) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2) fail(ErrorCode::kShape, "embedding table must be a matrix");
  const std::size_t vocab = tv.rows(), d = tv.cols();
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab)
      fail(ErrorCode::kInvalidArgument,
           "token id " + std::to_string(ids[i]) + " outside vocabulary of size " + std::to_string(vocab));
    auto src = tv.row(static_cast<std::size_t>(ids[i]));
    auto dst = out.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] = factor * src[j];
  }
  const std::size_t it = table.id();
  return table.tape().push(std::move(out), {table},
                           [it, factor, rows = std::vector<TokenId>(ids.begin(), ids.end())](Tape& tape, std::size_t self) {
                             const Tensor& g = tape.grad_at(self);
                             Tensor& gt = tape.grad_buffer(it);
                             for (std::size_t i = 0; i < rows.size(); ++i) {
                               auto src = g.row(i);
                               auto dst = gt.row(static_cast<std::size_t>(rows[i]));
                               for (std::size_t j = 0; j < src.size(); ++j) dst[j] += factor * src[j];
                             }
                           });
}

Var dropout(Var x, double rate, Rng* rng) {
  if (rate <= 0.0 || rng == nullptr) return x;
  if (rate >= 1.0) fail(ErrorCode::kInvalidArgument, "dropout rate must be below 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor keep(x.value().shape());
  for (double& k : keep.data()) k = rng->uniform() >= rate ? keep_scale : 0.0;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= keep[i];
  const std::size_t ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, keep = std::move(keep)](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad_at(self);
    Tensor& gx = tape.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * keep[i];
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t ix = x.id();
  return x.tape().push(Tensor::scalar(total), {x}, [ix](Tape& tape, std::size_t self) {
    const double g = tape.grad_at(self)[0];
    for (double& v : tape.grad_buffer(ix).data()) v += g;
  });
}

Var pick(Var x, std::size_t index) {
  if (index >= x.value().size())
    fail(ErrorCode::kShape, "pick index " + std::to_string(index) + " outside " + shape_string(x.value().shape()));
  const std::size_t ix = x.id();
  return x.tape().push(Tensor::scalar(x.value()[index]), {x}, [ix, index](Tape& tape, std::size_t self) {
    tape.grad_buffer(ix)[index] += tape.grad_at(self)[0];
  });
}

Var cross_entropy(Var logits, std::span<const TokenId> targets, TokenId pad_id, double smoothing,
                  Reduction reduction) {
  const Tensor& lv = logits.value();
  const std::size_t vocab = lv.cols();
  if (lv.rows() != targets.size())
    fail(ErrorCode::kShape, "cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                                shape_string(lv.shape()));
  Tensor logp = dense::log_softmax_rows(lv);
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] == pad_id) continue;
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= vocab)
      fail(ErrorCode::kInvalidArgument, "cross_entropy: target id " + std::to_string(targets[i]) +
                                            " outside vocabulary of size " + std::to_string(vocab));
    auto row = logp.row(i);
    double nll = -row[static_cast<std::size_t>(targets[i])];
    if (smoothing > 0.0) {
      double mean_nll = 0.0;
      for (double v : row) mean_nll -= v;
      mean_nll /= static_cast<double>(vocab);
      nll = (1.0 - smoothing) * nll + smoothing * mean_nll;
    }
    total += nll;
    ++count;
  }
  if (count == 0) fail(ErrorCode::kInvalidArgument, "empty loss support");
  const double norm = reduction == Reduction::kMean ? 1.0 / static_cast<double>(count) : 1.0;
  const std::size_t il = logits.id();
  return logits.tape().push(
      Tensor::scalar(total * norm), {logits},
      [il, norm, smoothing, pad_id, logp = std::move(logp),
       tgt = std::vector<TokenId>(targets.begin(), targets.end())](Tape& tape, std::size_t self) {
        const double g = tape.grad_at(self)[0] * norm;
        Tensor& gl = tape.grad_buffer(il);
        const std::size_t v = logp.cols();
        const double uniform = smoothing / static_cast<double>(v);
        for (std::size_t i = 0; i < tgt.size(); ++i) {
          if (tgt[i] == pad_id) continue;
          auto lp = logp.row(i);
          auto out = gl.row(i);
          for (std::size_t j = 0; j < v; ++j) out[j] += g * (std::exp(lp[j]) - uniform);
          out[static_cast<std::size_t>(tgt[i])] -= g * (1.0 - smoothing);
        }
      });
}

}  // namespace docmt
