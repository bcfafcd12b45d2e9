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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "docmt/docmt.h"

namespace {

// Carries a failed C API status up to main.
struct Failure {
  docmt_status status;
  std::string message;
};

void check(docmt_status s) {
  if (s != DOCMT_OK) throw Failure{s, docmt_last_error()};
}

// Owns a string returned by the library.
class Text {
 public:
  Text() = default;
  ~Text() { docmt_string_free(p_); }
  Text(const Text&) = delete;
  Text& operator=(const Text&) = delete;
  char** out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

class Config {
 public:
  Config() { check(docmt_config_create(&c_)); }
  ~Config() { docmt_config_destroy(c_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  docmt_config* get() { return c_; }
  void set(const std::string& key, const std::string& value) { check(docmt_config_set(c_, key.c_str(), value.c_str())); }

 private:
  docmt_config* c_ = nullptr;
};

class ModelHandle {
 public:
  ModelHandle(docmt_config* cfg, const std::string& checkpoint) {
    check(docmt_model_load(cfg, checkpoint.empty() ? nullptr : checkpoint.c_str(), &m_));
  }
  ~ModelHandle() { docmt_model_destroy(m_); }
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
  const docmt_model* get() const { return m_; }

 private:
  docmt_model* m_ = nullptr;
};

// Options every pipeline subcommand accepts. Explicit flags are applied after
// --config and --set, so they win.
struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::string run_dir;
  std::optional<unsigned long long> seed;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "INI config file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override a config key: section.key=value (repeatable)");
    app->add_option("--run-dir", run_dir, "Run directory (run.dir)");
    app->add_option("--seed", seed, "Random seed (run.seed)");
  }

  void apply(Config& cfg) const {
    if (!config_file.empty()) check(docmt_config_load(cfg.get(), config_file.c_str()));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Failure{DOCMT_INVALID_ARGUMENT, "--set expects key=value, got '" + s + "'"};
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!run_dir.empty()) cfg.set("run.dir", run_dir);
    if (seed) cfg.set("run.seed", std::to_string(*seed));
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{DOCMT_IO, "cannot write " + path};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{DOCMT_IO, "cannot read " + path};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document-level NMT with long-short term masking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "docmt 0.1.0");

  Common common;

  auto* preprocess = app.add_subcommand("preprocess", "Build vocabularies and chunked datasets");
  common.attach(preprocess);
  std::string train_src, train_tgt, dev_src, dev_tgt;
  std::optional<std::size_t> pre_k;
  preprocess->add_option("--train-src", train_src, "Training source (data.train_src)");
  preprocess->add_option("--train-tgt", train_tgt, "Training target (data.train_tgt)");
  preprocess->add_option("--dev-src", dev_src, "Development source (data.dev_src)");
  preprocess->add_option("--dev-tgt", dev_tgt, "Development target (data.dev_tgt)");
  preprocess->add_option("--k", pre_k, "Sentences per chunk (model.k)");

  auto* train = app.add_subcommand("train", "Train from preprocessed data");
  common.attach(train);
  bool resume = false;
  std::optional<std::size_t> epochs, max_steps;
  train->add_flag("--resume", resume, "Continue from checkpoints/last.ckpt");
  train->add_option("--epochs", epochs, "Epoch count (train.epochs)");
  train->add_option("--max-steps", max_steps, "Update cap (train.max_steps)");

  auto* translate = app.add_subcommand("translate", "Sliding-window document translation");
  common.attach(translate);
  std::string input, output, grid_out, checkpoint, position = "";
  std::size_t k = 0, beam = 0;
  translate->add_option("-i,--input", input, "Source documents, blank line between documents")
      ->required()
      ->check(CLI::ExistingFile);
  translate->add_option("-o,--output", output, "Translation file, '-' for stdout (default <run>/outputs/translation.txt)");
  translate->add_option("--grid", grid_out, "Grid dump file (default <run>/outputs/grid.tsv)");
  translate->add_option("--checkpoint", checkpoint, "Checkpoint (default best, last, then init)");
  translate->add_option("--k", k, "Window size (default: the model's k)");
  translate->add_option("--beam", beam, "Beam size (decode.beam)");
  translate->add_option("--position", position, "Window position j to assemble, or 'last' (decode.position)");

  auto* evaluate = app.add_subcommand("evaluate", "Corpus BLEU, or BLEU by window position");
  std::string hyp, ref, grid_in;
  bool per_position = false;
  evaluate->add_option("--hyp", hyp, "Hypothesis file")->check(CLI::ExistingFile);
  evaluate->add_option("--ref", ref, "Reference file")->required()->check(CLI::ExistingFile);
  evaluate->add_flag("--per-position", per_position, "Report BLEU for each window position j");
  evaluate->add_option("--grid", grid_in, "Grid dump from translate --grid")->check(CLI::ExistingFile);

  auto* score = app.add_subcommand("score-contrastive", "Consistency accuracy on contrastive groups");
  common.attach(score);
  std::string groups, score_checkpoint;
  bool mean = false;
  score->add_option("--groups", groups, "Contrastive groups file")->required()->check(CLI::ExistingFile);
  score->add_option("--checkpoint", score_checkpoint, "Checkpoint (default best, last, then init)");
  score->add_flag("--mean", mean, "Score by mean log-probability per token instead of the sum");

  auto* masks = app.add_subcommand("masks", "Print an attention mask as a 0/- grid");
  std::string tokens_file, sep = "<sep>", kind = "enc-local";
  masks->add_option("tokens-file", tokens_file, "File with whitespace-separated tokens")
      ->required()
      ->check(CLI::ExistingFile);
  masks->add_option("--sep", sep, "Separator token")->capture_default_str();
  masks->add_option("--kind", kind, "enc-local, dec-local or causal")
      ->capture_default_str()
      ->check(CLI::IsMember({"enc-local", "dec-local", "causal"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "docmt: error: usage: " << msg << "\n";
    return 2;
  }

  try {
    if (*preprocess) {
      Config cfg;
      common.apply(cfg);
      if (!train_src.empty()) cfg.set("data.train_src", train_src);
      if (!train_tgt.empty()) cfg.set("data.train_tgt", train_tgt);
      if (!dev_src.empty()) cfg.set("data.dev_src", dev_src);
      if (!dev_tgt.empty()) cfg.set("data.dev_tgt", dev_tgt);
      if (pre_k) cfg.set("model.k", std::to_string(*pre_k));
      Text stats;
      check(docmt_preprocess(cfg.get(), stats.out()));
      std::cout << stats.str();
    } else if (*train) {
      Config cfg;
      common.apply(cfg);
      if (epochs) cfg.set("train.epochs", std::to_string(*epochs));
      if (max_steps) cfg.set("train.max_steps", std::to_string(*max_steps));
      Text summary;
      check(docmt_train(cfg.get(), resume ? 1 : 0, summary.out()));
      std::cout << summary.str();
    } else if (*translate) {
      Config cfg;
      common.apply(cfg);
      if (!position.empty()) cfg.set("decode.position", position);
      ModelHandle model(cfg.get(), checkpoint);
      Text text, grid, summary;
      check(docmt_translate(model.get(), input.c_str(), k, 0, beam, text.out(), grid.out(), summary.out()));
      if (output.empty() || grid_out.empty()) {
        Text dir;
        check(docmt_config_get(cfg.get(), "run.dir", dir.out()));
        const std::filesystem::path outputs = std::filesystem::path(dir.str()) / "outputs";
        std::filesystem::create_directories(outputs);
        if (output.empty()) output = (outputs / "translation.txt").string();
        if (grid_out.empty()) grid_out = (outputs / "grid.tsv").string();
      }
      write_output(output, text.str());
      write_output(grid_out, grid.str());
      std::cerr << summary.str();
    } else if (*evaluate) {
      if (per_position) {
        if (grid_in.empty()) throw Failure{DOCMT_INVALID_ARGUMENT, "--per-position needs --grid"};
        Text rows, table;
        check(docmt_per_position_report(grid_in.c_str(), ref.c_str(), rows.out(), table.out()));
        std::cout << rows.str();
        std::cerr << table.str();
      } else {
        if (hyp.empty()) throw Failure{DOCMT_INVALID_ARGUMENT, "evaluate needs --hyp"};
        Text report;
        double value = 0.0;
        check(docmt_bleu_files(hyp.c_str(), ref.c_str(), &value, report.out()));
        std::cout << report.str();
      }
    } else if (*score) {
      Config cfg;
      common.apply(cfg);
      ModelHandle model(cfg.get(), score_checkpoint);
      Text report;
      check(docmt_score_contrastive(model.get(), groups.c_str(), mean ? 1 : 0, report.out()));
      std::cout << report.str();
    } else if (*masks) {
      const std::string tokens = read_text(tokens_file);
      Text grid;
      check(docmt_render_mask(tokens.c_str(), sep.c_str(), kind.c_str(), grid.out()));
      std::cout << grid.str();
    }
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "docmt: error: " << docmt_status_name(f.status) << ": " << msg << "\n";
    return static_cast<int>(f.status);
  }
  return 0;
}
