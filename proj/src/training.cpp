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

#include "docmt/training.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "docmt/error.hpp"
#include "docmt/text.hpp"

namespace docmt {

double learning_rate(std::size_t step, std::size_t dim, std::size_t warmup, double scale) {
  if (step == 0) fail(ErrorCode::kInvalidArgument, "learning rate step is 1-based; got 0");
  if (dim == 0 || warmup == 0) fail(ErrorCode::kInvalidArgument, "learning rate needs dim > 0 and warmup > 0");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(warmup);
  return scale / std::sqrt(static_cast<double>(dim)) * std::min(1.0 / std::sqrt(s), s / (w * std::sqrt(w)));
}

AdamState AdamState::zeros_like(std::span<Parameter* const> params) {
  AdamState state;
  for (const Parameter* p : params) {
    state.m.emplace_back(p->value.shape());
    state.v.emplace_back(p->value.shape());
  }
  return state;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, const OptimizerConfig& opt, double lr) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    fail(ErrorCode::kShape, "optimizer state holds " + std::to_string(state.m.size()) + " moments for " +
                                std::to_string(params.size()) + " parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    if (!p.grad.same_shape(p.value) || !state.m[i].same_shape(p.value) || !state.v[i].same_shape(p.value))
      fail(ErrorCode::kShape, "gradient or moment shape mismatch for " + p.name);
    if (!p.grad.all_finite()) fail(ErrorCode::kNumeric, "non-finite gradient in " + p.name);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    auto w = p.value.data();
    auto g = std::as_const(p.grad).data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      m[j] = opt.beta1 * m[j] + (1.0 - opt.beta1) * g[j];
      v[j] = opt.beta2 * v[j] + (1.0 - opt.beta2) * g[j] * g[j];
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + opt.eps);
    }
  }
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (std::size_t j = 0; j < p->grad.size(); ++j) sq += p->grad.data()[j] * p->grad.data()[j];
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter* p : params)
      for (std::size_t j = 0; j < p->grad.size(); ++j) p->grad.data()[j] *= factor;
  }
  return norm;
}

namespace {

constexpr std::uint64_t kShuffleStream = 1ull << 32;
constexpr std::uint64_t kDropoutStream = 2ull << 32;

std::size_t target_tokens(const Chunk& c) { return c.tgt.size() + 1; }

double scalar_of(const Var& v) { return v.value().data()[0]; }

}  // namespace

Trainer::Trainer(const ModelConfig& cfg, const TrainConfig& tc) : tc_(tc), model_(cfg, tc.seed) {
  adam_ = AdamState::zeros_like(params());
}

Trainer::Trainer(const Checkpoint& ckpt, const TrainConfig& tc) : tc_(tc), model_(model_from_checkpoint(ckpt)) {
  auto ps = params();
  adam_ = AdamState::zeros_like(ps);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (auto [prefix, target] : {std::pair{"adam.m/", &adam_.m[i]}, std::pair{"adam.v/", &adam_.v[i]}}) {
      const Tensor* t = ckpt.find(prefix + ps[i]->name);
      if (!t) fail(ErrorCode::kFormat, "checkpoint has no optimizer moment " + std::string(prefix) + ps[i]->name);
      if (!t->same_shape(*target)) fail(ErrorCode::kShape, "optimizer moment shape mismatch for " + ps[i]->name);
      *target = *t;
    }
  }
  auto meta = [&](const std::string& key) {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) fail(ErrorCode::kFormat, "checkpoint metadata lacks '" + key + "'");
    return parse_size(it->second);
  };
  adam_.step = meta("step");
  epoch_ = meta("epoch");
}

bool Trainer::done() const noexcept {
  return epoch_ >= tc_.epochs || (tc_.max_steps != 0 && adam_.step >= tc_.max_steps);
}

std::vector<Parameter*> Trainer::params() { return model_.params().list(); }

double Trainer::train_step(std::span<const Chunk* const> batch) {
  if (batch.empty()) fail(ErrorCode::kInvalidArgument, "empty training batch");
  std::size_t tokens = 0;
  for (const Chunk* c : batch) tokens += target_tokens(*c);
  auto ps = params();
  for (Parameter* p : ps) p->zero_grad();

  Rng rng(derive_seed(tc_.seed, kDropoutStream + adam_.step));
  const Regularizer reg{model_.config().dropout, &rng};
  double loss_sum = 0.0;
  for (const Chunk* c : batch) {
    Tape tape;
    const Var loss = model_.loss(tape, c->src, teacher_forcing(c->tgt, model_.config()), tc_.label_smoothing,
                                 Reduction::kSum, reg);
    const double value = scalar_of(loss);
    if (!std::isfinite(value))
      fail(ErrorCode::kNumeric, "non-finite training loss at step " + std::to_string(adam_.step + 1) +
                                    " (document " + std::to_string(c->doc) + ", sentence " +
                                    std::to_string(c->start + 1) + ")");
    loss_sum += value;
    tape.backward(loss, 1.0 / static_cast<double>(tokens));
    for (Parameter* p : ps) {
      if (!tape.bound(*p)) continue;
      const Tensor g = tape.param_grad(*p);
      for (std::size_t j = 0; j < g.size(); ++j) p->grad.data()[j] += g.data()[j];
    }
  }
  clip_grad_norm(ps, tc_.clip_norm);
  const OptimizerConfig& opt = tc_.optimizer;
  adam_step(ps, adam_, opt, learning_rate(adam_.step + 1, model_.config().dim, opt.warmup, opt.scale));
  return loss_sum / static_cast<double>(tokens);
}

double Trainer::run_epoch(std::span<const Chunk> chunks, std::span<const Batch> batches) {
  std::vector<std::size_t> order(batches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(tc_.seed, kShuffleStream + epoch_));
  rng.shuffle(order);
  double weighted = 0.0;
  std::size_t tokens = 0;
  std::vector<const Chunk*> members;
  for (std::size_t b : order) {
    if (tc_.max_steps && adam_.step >= tc_.max_steps) break;
    members.clear();
    std::size_t batch_tokens = 0;
    for (std::size_t m : batches[b].members) {
      members.push_back(&chunks[m]);
      batch_tokens += target_tokens(chunks[m]);
    }
    weighted += train_step(members) * static_cast<double>(batch_tokens);
    tokens += batch_tokens;
  }
  ++epoch_;
  return tokens ? weighted / static_cast<double>(tokens) : 0.0;
}

double Trainer::dev_loss(std::span<const Chunk> chunks) const {
  if (chunks.empty()) fail(ErrorCode::kInvalidArgument, "empty development set");
  double sum = 0.0;
  std::size_t tokens = 0;
  for (const Chunk& c : chunks) {
    Tape tape(false);
    sum += scalar_of(model_.loss(tape, c.src, teacher_forcing(c.tgt, model_.config()), 0.0, Reduction::kSum));
    tokens += target_tokens(c);
  }
  return sum / static_cast<double>(tokens);
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt = model_checkpoint(model_);
  const auto ps = model_.params().list();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ckpt.tensors.push_back({"adam.m/" + ps[i]->name, adam_.m[i]});
    ckpt.tensors.push_back({"adam.v/" + ps[i]->name, adam_.v[i]});
  }
  ckpt.meta["step"] = std::to_string(adam_.step);
  ckpt.meta["epoch"] = std::to_string(epoch_);
  return ckpt;
}

TrainResult train(const ModelConfig& cfg, const TrainConfig& tc, std::span<const Chunk> train_chunks,
                  std::span<const Chunk> dev_chunks, const std::filesystem::path& checkpoint_dir,
                  const std::filesystem::path& metrics_log, const DevScorer& scorer,
                  const std::filesystem::path& resume) {
  if (tc.select_by_score && !scorer) fail(ErrorCode::kInvalidArgument, "score-based selection needs a dev scorer");
  std::filesystem::create_directories(checkpoint_dir);
  if (!metrics_log.empty() && metrics_log.has_parent_path()) std::filesystem::create_directories(metrics_log.parent_path());

  TrainResult result;
  std::optional<double> best_metric;
  std::optional<Trainer> trainer;
  if (resume.empty()) {
    trainer.emplace(cfg, tc);
    Checkpoint init = trainer->checkpoint();
    save_checkpoint(checkpoint_dir / "init.ckpt", init);
  } else {
    const Checkpoint ckpt = load_checkpoint(resume);
    if (!(ckpt.config == cfg)) fail(ErrorCode::kState, "resume checkpoint was trained with a different model config");
    trainer.emplace(ckpt, tc);
    if (auto it = ckpt.meta.find("best_epoch"); it != ckpt.meta.end()) {
      result.best_epoch = parse_size(it->second);
      best_metric = parse_double(ckpt.meta.at("best_metric"));
      result.best_checkpoint = checkpoint_dir / "best.ckpt";
    }
  }
  if (trainer->done()) return result;

  const std::vector<Batch> batches = make_batches(train_chunks, tc.max_tokens, cfg.pad_id);
  std::ofstream log;
  if (!metrics_log.empty()) {
    log.open(metrics_log, std::ios::app);
    if (!log) fail(ErrorCode::kIo, "cannot open metrics log " + metrics_log.string());
  }

  while (!trainer->done()) {
    EpochRecord rec;
    try {
      rec.train_loss = trainer->run_epoch(train_chunks, batches);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric) throw;
      const auto path = checkpoint_dir / ("postmortem-step-" + std::to_string(trainer->step()) + ".ckpt");
      save_checkpoint(path, trainer->checkpoint());
      fail(ErrorCode::kNumeric, std::string(e.what()) + "; state saved to " + path.string());
    }
    rec.epoch = trainer->epoch();
    rec.step = trainer->step();
    rec.dev_loss = trainer->dev_loss(dev_chunks);
    rec.lr = rec.step ? learning_rate(rec.step, cfg.dim, tc.optimizer.warmup, tc.optimizer.scale) : 0.0;
    if (!std::isfinite(rec.dev_loss)) {
      const auto path = checkpoint_dir / ("postmortem-step-" + std::to_string(rec.step) + ".ckpt");
      save_checkpoint(path, trainer->checkpoint());
      fail(ErrorCode::kNumeric, "non-finite dev loss after epoch " + std::to_string(rec.epoch) +
                                    "; state saved to " + path.string());
    }
    if (scorer) rec.dev_score = scorer(trainer->model());
    const double metric = tc.select_by_score ? -*rec.dev_score : rec.dev_loss;
    const bool improved = !best_metric || metric < *best_metric;
    if (improved) {
      best_metric = metric;
      result.best_epoch = rec.epoch;
    }

    Checkpoint ckpt = trainer->checkpoint();
    ckpt.meta["best_epoch"] = std::to_string(result.best_epoch);
    ckpt.meta["best_metric"] = format_double(*best_metric);
    save_checkpoint(checkpoint_dir / ("epoch-" + std::to_string(rec.epoch) + ".ckpt"), ckpt);
    if (improved) {
      result.best_checkpoint = checkpoint_dir / "best.ckpt";
      save_checkpoint(result.best_checkpoint, ckpt);
    }
    save_checkpoint(checkpoint_dir / "last.ckpt", ckpt);

    if (log) {
      log << rec.step << '\t' << rec.epoch << '\t' << format_double(rec.train_loss) << '\t'
          << format_double(rec.dev_loss) << '\t' << format_double(rec.lr) << '\n';
      log.flush();
    }
    result.history.push_back(rec);
  }
  return result;
}

}  // namespace docmt
