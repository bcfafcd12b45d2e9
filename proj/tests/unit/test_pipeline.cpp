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

#include <filesystem>

#include "docmt/error.hpp"
#include "docmt/pipeline.hpp"
#include "docmt/text.hpp"
#include "support/synthetic.hpp"

using namespace docmt;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("docmt_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig tiny_run(const fs::path& dir) {
  synthetic::Options o;
  o.documents = 30;
  o.seed = 4;
  synthetic::write_corpus(synthetic::make_corpus(o), dir / "train.src", dir / "train.tgt");
  o.documents = 5;
  o.seed = 5;
  synthetic::write_corpus(synthetic::make_corpus(o), dir / "dev.src", dir / "dev.tgt");
  RunConfig cfg;
  cfg.train_src = dir / "train.src";
  cfg.train_tgt = dir / "train.tgt";
  cfg.dev_src = dir / "dev.src";
  cfg.dev_tgt = dir / "dev.tgt";
  cfg.run_dir = dir / "run";
  cfg.set("model.dim", "8");
  cfg.set("model.heads", "2");
  cfg.set("model.ffn_dim", "16");
  cfg.set("model.encoder_layers", "1");
  cfg.set("model.decoder_layers", "1");
  cfg.set("model.k", "2");
  cfg.set("train.epochs", "2");
  cfg.set("train.max_tokens", "64");
  cfg.set("train.warmup", "20");
  cfg.set("decode.beam", "2");
  return cfg;
}

}  // namespace

TEST_CASE("config keys round trip through set, get and echo") {
  RunConfig cfg;
  cfg.set("model.variant", "baseline");
  cfg.set("train.lr_scale", "0.5");
  cfg.set("decode.position", "3");
  cfg.set("run.seed", "99");
  CHECK(cfg.get("model.variant") == "baseline");
  CHECK(cfg.get("train.lr_scale") == "0.5");
  CHECK(cfg.position == 3);
  CHECK(cfg.train.seed == 99);
  cfg.set("decode.position", "last");
  CHECK(cfg.position == 0);

  const auto dir = fresh_dir("config");
  write_file(dir / "echo.ini", cfg.echo());
  RunConfig back;
  back.load(dir / "echo.ini");
  CHECK(back.echo() == cfg.echo());
  for (const auto& key : RunConfig::keys()) CHECK(back.get(key) == cfg.get(key));
  fs::remove_all(dir);
}

TEST_CASE("config errors name the key") {
  RunConfig cfg;
  CHECK_THROWS_WITH(cfg.set("model.nope", "1"), doctest::Contains("model.nope"));
  CHECK_THROWS_WITH(cfg.set("model.dim", "abc"), doctest::Contains("model.dim"));
  CHECK_THROWS_WITH(cfg.set("train.select", "accuracy"), doctest::Contains("loss or bleu"));
  const auto dir = fresh_dir("badini");
  write_file(dir / "a.ini", "dim = 3\n");
  CHECK_THROWS_WITH(cfg.load(dir / "a.ini"), doctest::Contains("outside a section"));
  write_file(dir / "b.ini", "[model]\ndim\n");
  CHECK_THROWS_AS(cfg.load(dir / "b.ini"), Error);
  CHECK_THROWS_AS(cfg.load(dir / "missing.ini"), Error);
  fs::remove_all(dir);
}

TEST_CASE("run directory lock is exclusive") {
  const auto dir = fresh_dir("lock");
  {
    RunLock first(dir);
    try {
      RunLock second(dir);
      FAIL("second lock acquired");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kState);
    }
  }
  RunLock again(dir);
  fs::remove_all(dir);
}

TEST_CASE("preprocess, train and translate on a tiny corpus") {
  const auto dir = fresh_dir("e2e");
  RunConfig cfg = tiny_run(dir);
  const RunPaths paths{cfg.run_dir};
  const std::string stats = run_preprocess(cfg);
  CHECK(stats.find("train_documents\t30") != std::string::npos);
  CHECK(stats.find("train_chunks\t60") != std::string::npos);
  CHECK(fs::exists(paths.train_data()));
  CHECK(fs::exists(paths.config_echo()));

  const std::string summary = run_train(cfg, false);
  CHECK(summary.find("epoch 2") != std::string::npos);
  CHECK(split_lines(read_file(paths.metrics())).size() == 2);
  CHECK(fs::exists(paths.checkpoints() / "best.ckpt"));
  CHECK_FALSE(fs::exists(cfg.run_dir / ".lock"));

  const LoadedModel m = load_run_model(cfg);
  CHECK(m.model.config().k == 2);
  const auto docs = read_documents(dir / "dev.src");
  const auto out = translate_documents(m, docs, 0, 0, cfg.decode);
  CHECK(out.grids.size() == 5);
  CHECK(split_lines(out.text).size() == 5 * 4 + 4);
  // 5 documents x 4 sentences, positions 1 + 2 + 2 + 2.
  CHECK(split_lines(out.grid).size() == 5 * 7);
  CHECK(out.summary.find("windows\t20") != std::string::npos);

  // Per-position BLEU from the dump matches the in-memory grids.
  write_file(dir / "grid.tsv", out.grid);
  std::vector<std::vector<std::string>> refs;
  for (const auto& d : parse_documents(read_file(dir / "dev.tgt"))) {
    refs.emplace_back();
    for (const auto& s : d) refs.back().push_back(join(s, " "));
  }
  const auto rows = per_position_from_dump(out.grid, read_file(dir / "dev.tgt"));
  const auto direct = per_position_report(out.grids, refs, m.tgt_vocab);
  REQUIRE(rows.size() == 2);
  for (std::size_t j = 0; j < 2; ++j) CHECK(rows[j].report.bleu == doctest::Approx(direct[j].report.bleu));

  CHECK_THROWS_AS(translate_documents(m, docs, 2, 3, cfg.decode), Error);

  // Resume when already complete trains nothing further.
  cfg.set("train.epochs", "3");
  CHECK(run_train(cfg, true).find("epoch 3") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("k=1 translation equals sentence-level decoding") {
  const auto dir = fresh_dir("k1");
  RunConfig cfg = tiny_run(dir);
  cfg.set("model.k", "1");
  cfg.set("model.variant", "baseline");
  cfg.set("train.epochs", "1");
  run_preprocess(cfg);
  run_train(cfg, false);
  const LoadedModel m = load_run_model(cfg);
  const auto docs = read_documents(dir / "dev.src");
  const auto out = translate_documents(m, docs, 1, 0, cfg.decode);
  std::vector<std::vector<std::string>> expected;
  for (const auto& doc : docs) {
    expected.emplace_back();
    for (const auto& s : doc) {
      const auto r = translate_chunk(m.model, m.src_vocab.encode(s), cfg.decode);
      expected.back().push_back(join(m.tgt_vocab.decode(split_sentences(r.tokens, Vocab::kSep, 1).sentences[0]), " "));
    }
  }
  CHECK(out.text == render_documents(expected));
  fs::remove_all(dir);
}

TEST_CASE("stage preconditions are reported") {
  const auto dir = fresh_dir("order");
  RunConfig cfg = tiny_run(dir);
  CHECK_THROWS_WITH(run_train(cfg, false), doctest::Contains("preprocess"));
  CHECK_THROWS_AS(load_run_model(cfg), Error);
  cfg.set("model.max_positions", "5");
  CHECK_THROWS_WITH(run_preprocess(cfg), doctest::Contains("max_positions"));
  fs::remove_all(dir);
}

TEST_CASE("bleu_files aligns lines and tolerates empty translations") {
  const auto dir = fresh_dir("bleu");
  write_file(dir / "ref", "a b c d\n\ne f g h\n");
  write_file(dir / "hyp", "a b c d\n\n\n");
  write_file(dir / "same", "a b c d\n\ne f g h\n");
  write_file(dir / "broken", "a b c d\nx\ne f g h\n");
  CHECK(bleu_files(dir / "same", dir / "ref").bleu == doctest::Approx(100.0));
  const auto partial = bleu_files(dir / "hyp", dir / "ref");
  CHECK(partial.hyp_length == 4);
  CHECK(partial.ref_length == 8);
  CHECK_THROWS_WITH(bleu_files(dir / "broken", dir / "ref"), doctest::Contains("document break"));
  fs::remove_all(dir);
}

TEST_CASE("mask rendering from text") {
  CHECK(render_mask_for("a b <sep> c", "<sep>", MaskKind::kEncoderLocal) == "00--\n00--\n--00\n--00\n");
}

TEST_CASE("grid dump validation") {
  CHECK_THROWS_WITH(per_position_from_dump("1\t2\t1\tx\n", "a\nb\n"), doctest::Contains("lacks"));
  CHECK_THROWS_WITH(per_position_from_dump("1\t1\t2\tx\n", "a\n"), doctest::Contains("invalid"));
  CHECK_THROWS_AS(per_position_from_dump("1 1 1 x\n", "a\n"), Error);
}
