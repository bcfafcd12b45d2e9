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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "docmt/checkpoint.hpp"
#include "docmt/data.hpp"
#include "docmt/model.hpp"

namespace docmt {

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  std::size_t warmup = 16000;
  double scale = 4.0;
};

// Inverse square root schedule with linear warmup. step is 1-based.
double learning_rate(std::size_t step, std::size_t dim, std::size_t warmup, double scale);

struct AdamState {
  std::size_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState zeros_like(std::span<Parameter* const> params);
};

// Bias-corrected Adam update from each parameter's grad buffer. Every
// gradient is checked for non-finite values before anything is written.
void adam_step(std::span<Parameter* const> params, AdamState& state, const OptimizerConfig& opt, double lr);

// Rescales grad buffers so their global L2 norm is at most max_norm; returns
// the norm before clipping. max_norm <= 0 disables clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

struct TrainConfig {
  OptimizerConfig optimizer;
  std::size_t epochs = 10;
  // Stops mid-epoch once this many updates have run; 0 means no cap.
  std::size_t max_steps = 0;
  std::size_t max_tokens = 2048;
  double label_smoothing = 0.1;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  // Select the best checkpoint by the dev scorer (higher is better) instead
  // of dev loss.
  bool select_by_score = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double lr = 0.0;
  std::optional<double> dev_score;
};

using DevScorer = std::function<double(const Model&)>;

class Trainer {
 public:
  Trainer(const ModelConfig& cfg, const TrainConfig& tc);
  // Restores parameters, Adam moments, step and epoch.
  Trainer(const Checkpoint& ckpt, const TrainConfig& tc);

  const Model& model() const noexcept { return model_; }
  Model& model() noexcept { return model_; }
  std::size_t step() const noexcept { return adam_.step; }
  std::size_t epoch() const noexcept { return epoch_; }
  bool done() const noexcept;
  const TrainConfig& train_config() const noexcept { return tc_; }

  // One optimizer update. Returns the summed (smoothed) loss per target token.
  double train_step(std::span<const Chunk* const> batch);
  // Shuffles batch order with the epoch seed and steps through every batch,
  // or until max_steps. Returns the token-weighted mean training loss.
  double run_epoch(std::span<const Chunk> chunks, std::span<const Batch> batches);
  // Unsmoothed negative log-likelihood per target token, without dropout.
  double dev_loss(std::span<const Chunk> chunks) const;

  // Model tensors plus "adam.m/<name>", "adam.v/<name>" and step/epoch meta.
  Checkpoint checkpoint() const;

 private:
  std::vector<Parameter*> params();

  TrainConfig tc_;
  Model model_;
  AdamState adam_;
  std::size_t epoch_ = 0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  // 0 when no epoch ran.
  std::size_t best_epoch = 0;
  std::filesystem::path best_checkpoint;
};

// Writes checkpoints/init.ckpt, epoch-<n>.ckpt, last.ckpt and best.ckpt under
// checkpoint_dir and appends one metrics line per epoch:
//   step \t epoch \t train_loss \t dev_loss \t lr
// With resume set, continues from that checkpoint up to tc.epochs. A
// non-finite loss saves postmortem-step-<n>.ckpt before the error propagates.
TrainResult train(const ModelConfig& cfg, const TrainConfig& tc, std::span<const Chunk> train_chunks,
                  std::span<const Chunk> dev_chunks, const std::filesystem::path& checkpoint_dir,
                  const std::filesystem::path& metrics_log, const DevScorer& scorer = {},
                  const std::filesystem::path& resume = {});

}  // namespace docmt
