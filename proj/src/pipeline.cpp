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

#include "docmt/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>

#include "docmt/checkpoint.hpp"
#include "docmt/error.hpp"
#include "docmt/masking.hpp"
#include "docmt/text.hpp"

namespace docmt {

namespace {

struct KeyBinding {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::kInvalidArgument, "expected a boolean, got '" + std::string(v) + "'");
}

template <typename T>
KeyBinding size_key(T RunConfig::*outer, std::size_t T::*field) {
  return {[=](const RunConfig& c) { return std::to_string(c.*outer.*field); },
          [=](RunConfig& c, std::string_view v) { c.*outer.*field = parse_size(v); }};
}

template <typename T>
KeyBinding double_key(T RunConfig::*outer, double T::*field) {
  return {[=](const RunConfig& c) { return format_double(c.*outer.*field); },
          [=](RunConfig& c, std::string_view v) { c.*outer.*field = parse_double(v); }};
}

KeyBinding top_size(std::size_t RunConfig::*field) {
  return {[=](const RunConfig& c) { return std::to_string(c.*field); },
          [=](RunConfig& c, std::string_view v) { c.*field = parse_size(v); }};
}

KeyBinding top_path(std::filesystem::path RunConfig::*field) {
  return {[=](const RunConfig& c) { return (c.*field).string(); },
          [=](RunConfig& c, std::string_view v) { c.*field = std::string(v); }};
}

KeyBinding optimizer_size(std::size_t OptimizerConfig::*field) {
  return {[=](const RunConfig& c) { return std::to_string(c.train.optimizer.*field); },
          [=](RunConfig& c, std::string_view v) { c.train.optimizer.*field = parse_size(v); }};
}

KeyBinding optimizer_double(double OptimizerConfig::*field) {
  return {[=](const RunConfig& c) { return format_double(c.train.optimizer.*field); },
          [=](RunConfig& c, std::string_view v) { c.train.optimizer.*field = parse_double(v); }};
}

// Ordered as echoed.
const std::vector<std::pair<std::string, KeyBinding>>& bindings() {
  static const std::vector<std::pair<std::string, KeyBinding>> table = {
      {"model.variant",
       {[](const RunConfig& c) { return std::string(variant_name(c.model.variant)); },
        [](RunConfig& c, std::string_view v) { c.model.variant = parse_variant(v); }}},
      {"model.dim", size_key(&RunConfig::model, &ModelConfig::dim)},
      {"model.heads", size_key(&RunConfig::model, &ModelConfig::heads)},
      {"model.encoder_layers", size_key(&RunConfig::model, &ModelConfig::encoder_layers)},
      {"model.decoder_layers", size_key(&RunConfig::model, &ModelConfig::decoder_layers)},
      {"model.ffn_dim", size_key(&RunConfig::model, &ModelConfig::ffn_dim)},
      {"model.k", size_key(&RunConfig::model, &ModelConfig::k)},
      {"model.max_positions", size_key(&RunConfig::model, &ModelConfig::max_positions)},
      {"model.dropout", double_key(&RunConfig::model, &ModelConfig::dropout)},
      {"model.tie_output",
       {[](const RunConfig& c) { return std::string(c.model.tie_output ? "true" : "false"); },
        [](RunConfig& c, std::string_view v) { c.model.tie_output = parse_bool(v); }}},
      {"data.train_src", top_path(&RunConfig::train_src)},
      {"data.train_tgt", top_path(&RunConfig::train_tgt)},
      {"data.dev_src", top_path(&RunConfig::dev_src)},
      {"data.dev_tgt", top_path(&RunConfig::dev_tgt)},
      {"data.vocab_size", top_size(&RunConfig::vocab_size)},
      {"data.min_freq", top_size(&RunConfig::min_freq)},
      {"data.train_stride", top_size(&RunConfig::train_stride)},
      {"train.epochs", size_key(&RunConfig::train, &TrainConfig::epochs)},
      {"train.max_steps", size_key(&RunConfig::train, &TrainConfig::max_steps)},
      {"train.max_tokens", size_key(&RunConfig::train, &TrainConfig::max_tokens)},
      {"train.warmup", optimizer_size(&OptimizerConfig::warmup)},
      {"train.lr_scale", optimizer_double(&OptimizerConfig::scale)},
      {"train.beta1", optimizer_double(&OptimizerConfig::beta1)},
      {"train.beta2", optimizer_double(&OptimizerConfig::beta2)},
      {"train.eps", optimizer_double(&OptimizerConfig::eps)},
      {"train.label_smoothing", double_key(&RunConfig::train, &TrainConfig::label_smoothing)},
      {"train.clip_norm", double_key(&RunConfig::train, &TrainConfig::clip_norm)},
      {"train.select",
       {[](const RunConfig& c) { return std::string(c.train.select_by_score ? "bleu" : "loss"); },
        [](RunConfig& c, std::string_view v) {
          if (v != "bleu" && v != "loss")
            fail(ErrorCode::kInvalidArgument, "train.select must be loss or bleu, got '" + std::string(v) + "'");
          c.train.select_by_score = v == "bleu";
        }}},
      {"decode.beam", size_key(&RunConfig::decode, &DecodeOptions::beam_size)},
      {"decode.alpha", double_key(&RunConfig::decode, &DecodeOptions::alpha)},
      {"decode.max_len_a", double_key(&RunConfig::decode, &DecodeOptions::max_len_a)},
      {"decode.max_len_b", size_key(&RunConfig::decode, &DecodeOptions::max_len_b)},
      {"decode.position",
       {[](const RunConfig& c) { return c.position ? std::to_string(c.position) : std::string("last"); },
        [](RunConfig& c, std::string_view v) { c.position = v == "last" ? 0 : parse_size(v); }}},
      {"run.dir", top_path(&RunConfig::run_dir)},
      {"run.seed",
       {[](const RunConfig& c) { return std::to_string(c.train.seed); },
        [](RunConfig& c, std::string_view v) { c.train.seed = parse_size(v); }}},
  };
  return table;
}

const KeyBinding& binding(std::string_view key) {
  for (const auto& [name, b] : bindings())
    if (name == key) return b;
  fail(ErrorCode::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
}

std::vector<std::vector<TokenId>> encode_sentences(const std::vector<Tokens>& sentences, const Vocab& vocab) {
  std::vector<std::vector<TokenId>> out;
  for (const auto& s : sentences) out.push_back(vocab.encode(s));
  return out;
}

std::vector<Chunk> chunk_all(std::span<const Document> docs, std::size_t k, std::size_t stride) {
  std::vector<Chunk> out;
  for (const auto& d : docs) {
    auto c = chunk_documents(d, k, stride, Vocab::kSep);
    out.insert(out.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
  }
  return out;
}

void check_fits(std::span<const Chunk> chunks, std::size_t max_positions, const std::string& split) {
  for (std::size_t i = 0; i < chunks.size(); ++i)
    if (chunks[i].src.size() > max_positions || chunks[i].tgt.size() + 1 > max_positions)
      fail(ErrorCode::kInvalidArgument, split + " chunk " + std::to_string(i) + " (document " +
                                            std::to_string(chunks[i].doc + 1) + ", sentence " +
                                            std::to_string(chunks[i].start + 1) + ") exceeds model.max_positions " +
                                            std::to_string(max_positions));
}

ModelConfig model_config_for(const RunConfig& cfg, const Vocab& src, const Vocab& tgt) {
  ModelConfig m = cfg.model;
  m.vocab_src = src.size();
  m.vocab_tgt = tgt.size();
  m.pad_id = Vocab::kPad;
  m.bos_id = Vocab::kBos;
  m.eos_id = Vocab::kEos;
  m.sep_id = Vocab::kSep;
  m.validate();
  return m;
}

std::vector<std::vector<std::string>> documents_as_text(const std::vector<std::vector<Tokens>>& docs) {
  std::vector<std::vector<std::string>> out;
  for (const auto& d : docs) {
    out.emplace_back();
    for (const auto& s : d) out.back().push_back(join(s, " "));
  }
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  // Small CPU-friendly defaults; base-transformer sizes are reachable through keys.
  model.dim = 64;
  model.heads = 4;
  model.encoder_layers = 2;
  model.decoder_layers = 2;
  model.ffn_dim = 128;
  model.k = 2;
  model.max_positions = 256;
  train.epochs = 10;
  train.optimizer.warmup = 400;
  train.optimizer.scale = 1.0;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  try {
    binding(key).set(*this, trim(value));
  } catch (const Error& e) {
    fail(e.code(), std::string(key) + ": " + e.what());
  }
}

std::string RunConfig::get(std::string_view key) const { return binding(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : bindings()) out.push_back(name);
    return out;
  }();
  return names;
}

void RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::kIo, "config file not found: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorCode::kFormat, path.string() + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) set(section + "." + key, value.data());
  }
}

std::string RunConfig::echo() const {
  std::string out;
  std::string section;
  for (const auto& [name, b] : bindings()) {
    const auto dot = name.find('.');
    if (name.substr(0, dot) != section) {
      if (!section.empty()) out += "\n";
      section = name.substr(0, dot);
      out += "[" + section + "]\n";
    }
    out += name.substr(dot + 1) + " = " + b.get(*this) + "\n";
  }
  return out;
}

RunLock::RunLock(const std::filesystem::path& run_dir) : path_(run_dir / ".lock") {
  std::filesystem::create_directories(run_dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) fail(ErrorCode::kState, "run directory is locked: " + path_.string());
    fail(ErrorCode::kIo, "cannot create " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

std::string run_preprocess(const RunConfig& cfg) {
  RunLock lock(cfg.run_dir);
  const RunPaths paths{cfg.run_dir};
  for (const auto* p : {&cfg.train_src, &cfg.train_tgt, &cfg.dev_src, &cfg.dev_tgt})
    if (p->empty()) fail(ErrorCode::kInvalidArgument, "data paths train_src, train_tgt, dev_src, dev_tgt are required");

  const auto train_text = read_parallel_corpus(cfg.train_src, cfg.train_tgt);
  const auto dev_text = read_parallel_corpus(cfg.dev_src, cfg.dev_tgt);
  if (train_text.empty()) fail(ErrorCode::kFormat, "training corpus has no documents");
  if (dev_text.empty()) fail(ErrorCode::kFormat, "development corpus has no documents");

  std::vector<Tokens> src_sentences, tgt_sentences;
  for (const auto& d : train_text) {
    src_sentences.insert(src_sentences.end(), d.src.begin(), d.src.end());
    tgt_sentences.insert(tgt_sentences.end(), d.tgt.begin(), d.tgt.end());
  }
  const Vocab src_vocab = Vocab::build(src_sentences, cfg.vocab_size, cfg.min_freq);
  const Vocab tgt_vocab = Vocab::build(tgt_sentences, cfg.vocab_size, cfg.min_freq);

  const std::size_t k = cfg.model.k;
  const std::size_t stride = cfg.train_stride ? cfg.train_stride : k;
  const auto train_docs = encode_corpus(train_text, src_vocab, tgt_vocab);
  const auto dev_docs = encode_corpus(dev_text, src_vocab, tgt_vocab);
  const auto train_chunks = chunk_all(train_docs, k, stride);
  const auto dev_chunks = chunk_all(dev_docs, k, k);
  check_fits(train_chunks, cfg.model.max_positions, "training");
  check_fits(dev_chunks, cfg.model.max_positions, "development");

  write_file(paths.src_vocab(), src_vocab.serialize());
  write_file(paths.tgt_vocab(), tgt_vocab.serialize());
  write_file(paths.train_data(), encode_dataset(train_chunks));
  write_file(paths.dev_data(), encode_dataset(dev_chunks));
  write_file(paths.config_echo(), cfg.echo());

  std::size_t train_sentences = 0, longest = 0;
  for (const auto& d : train_docs) train_sentences += d.sentences.size();
  for (const auto& c : train_chunks) longest = std::max(longest, chunk_tokens(c));
  std::ostringstream stats;
  stats << "train_documents\t" << train_docs.size() << "\n"
        << "train_sentences\t" << train_sentences << "\n"
        << "train_chunks\t" << train_chunks.size() << "\n"
        << "dev_documents\t" << dev_docs.size() << "\n"
        << "dev_chunks\t" << dev_chunks.size() << "\n"
        << "src_vocab\t" << src_vocab.size() << "\n"
        << "tgt_vocab\t" << tgt_vocab.size() << "\n"
        << "k\t" << k << "\n"
        << "train_stride\t" << stride << "\n"
        << "longest_chunk_tokens\t" << longest << "\n";
  write_file(paths.stats(), stats.str());
  return stats.str();
}

std::string run_train(const RunConfig& cfg, bool resume) {
  RunLock lock(cfg.run_dir);
  const RunPaths paths{cfg.run_dir};
  if (!std::filesystem::exists(paths.train_data()))
    fail(ErrorCode::kState, "no preprocessed data in " + cfg.run_dir.string() + "; run preprocess first");
  const Vocab src_vocab = Vocab::parse(read_file(paths.src_vocab()));
  const Vocab tgt_vocab = Vocab::parse(read_file(paths.tgt_vocab()));
  const ModelConfig model_cfg = model_config_for(cfg, src_vocab, tgt_vocab);
  const auto train_chunks = decode_dataset(read_file(paths.train_data()), Vocab::kSep);
  const auto dev_chunks = decode_dataset(read_file(paths.dev_data()), Vocab::kSep);
  write_file(paths.config_echo(), cfg.echo());

  DevScorer scorer;
  std::vector<std::vector<Tokens>> dev_src_docs;
  std::vector<std::vector<std::string>> dev_refs;
  if (cfg.train.select_by_score) {
    for (const auto& d : read_parallel_corpus(cfg.dev_src, cfg.dev_tgt)) {
      dev_src_docs.push_back(d.src);
      dev_refs.emplace_back();
      for (const auto& s : d.tgt) dev_refs.back().push_back(join(s, " "));
    }
    scorer = [&](const Model& model) {
      const LoadedModel view{model, src_vocab, tgt_vocab};
      const auto out = translate_documents(view, dev_src_docs, 0, 0, cfg.decode);
      return per_position_report(out.grids, dev_refs, tgt_vocab).back().report.bleu;
    };
  }

  const std::filesystem::path from = resume ? paths.checkpoints() / "last.ckpt" : std::filesystem::path{};
  if (resume && !std::filesystem::exists(from)) fail(ErrorCode::kState, "nothing to resume: " + from.string() + " missing");
  const TrainResult result =
      train(model_cfg, cfg.train, train_chunks, dev_chunks, paths.checkpoints(), paths.metrics(), scorer, from);

  std::ostringstream out;
  for (const auto& r : result.history) {
    out << "epoch " << r.epoch << "\tstep " << r.step << "\ttrain_loss " << format_fixed(r.train_loss, 4)
        << "\tdev_loss " << format_fixed(r.dev_loss, 4);
    if (r.dev_score) out << "\tdev_bleu " << format_bleu(*r.dev_score);
    out << "\n";
  }
  if (result.best_epoch) out << "best epoch " << result.best_epoch << "\n";
  return out.str();
}

LoadedModel load_run_model(const RunConfig& cfg, const std::filesystem::path& checkpoint) {
  const RunPaths paths{cfg.run_dir};
  std::filesystem::path path = checkpoint;
  if (path.empty()) {
    for (const char* name : {"best.ckpt", "last.ckpt", "init.ckpt"})
      if (std::filesystem::exists(paths.checkpoints() / name)) {
        path = paths.checkpoints() / name;
        break;
      }
    if (path.empty()) fail(ErrorCode::kState, "no checkpoint in " + paths.checkpoints().string());
  }
  Model model = model_from_checkpoint(load_checkpoint(path));
  Vocab src = Vocab::parse(read_file(paths.src_vocab()));
  Vocab tgt = Vocab::parse(read_file(paths.tgt_vocab()));
  if (src.size() != model.config().vocab_src || tgt.size() != model.config().vocab_tgt)
    fail(ErrorCode::kState, "vocabularies in " + cfg.run_dir.string() + " do not match checkpoint " + path.string());
  return {std::move(model), std::move(src), std::move(tgt)};
}

TranslationOutput translate_documents(const LoadedModel& m, const std::vector<std::vector<Tokens>>& docs,
                                      std::size_t k, std::size_t position, const DecodeOptions& opts) {
  if (docs.empty()) fail(ErrorCode::kInvalidArgument, "no documents to translate");
  if (k == 0) k = m.model.config().k;
  const std::size_t j = position ? position : k;
  if (j > k)
    fail(ErrorCode::kInvalidArgument, "position " + std::to_string(j) + " exceeds window size " + std::to_string(k));
  TranslationOutput out;
  std::vector<std::vector<std::string>> rendered;
  std::size_t windows = 0, underflow = 0, overflow = 0, truncated = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto ids = encode_sentences(docs[d], m.src_vocab);
    TranslationGrid grid = sliding_translate(m.model, ids, k, opts);
    for (const auto& [key, tokens] : grid.entries)
      out.grid += std::to_string(d + 1) + "\t" + std::to_string(key.first) + "\t" + std::to_string(key.second) +
                  "\t" + join(m.tgt_vocab.decode(tokens), " ") + "\n";
    rendered.emplace_back();
    for (const auto& sentence : assemble_position(grid, j))
      rendered.back().push_back(join(m.tgt_vocab.decode(sentence), " "));
    windows += grid.windows;
    underflow += grid.underflow;
    overflow += grid.overflow;
    truncated += grid.truncated;
    out.grids.push_back(std::move(grid));
  }
  out.text = render_documents(rendered);
  out.summary = "windows\t" + std::to_string(windows) + "\nseparator_underflow\t" + std::to_string(underflow) +
                "\nseparator_overflow\t" + std::to_string(overflow) + "\ntruncated\t" + std::to_string(truncated) +
                "\n";
  return out;
}

std::string render_documents(const std::vector<std::vector<std::string>>& docs) {
  std::string out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d) out += "\n";
    for (const auto& s : docs[d]) out += s + "\n";
  }
  return out;
}

std::string render_bleu(const BleuReport& r) {
  std::ostringstream out;
  out << "BLEU = " << format_bleu(r.bleu) << ", " << format_fixed(100 * r.precisions[0], 1) << "/"
      << format_fixed(100 * r.precisions[1], 1) << "/" << format_fixed(100 * r.precisions[2], 1) << "/"
      << format_fixed(100 * r.precisions[3], 1) << " (BP = " << format_fixed(r.brevity_penalty, 3)
      << ", hyp_len = " << r.hyp_length << ", ref_len = " << r.ref_length << ")\n";
  return out.str();
}

BleuReport bleu_files(const std::filesystem::path& hyp, const std::filesystem::path& ref) {
  // Line-aligned: an empty translation is an empty line, so blank reference
  // lines (document breaks) must be blank in the hypothesis too.
  auto h = split_lines(read_file(hyp));
  auto r = split_lines(read_file(ref));
  while (!h.empty() && trim(h.back()).empty() && h.size() > r.size()) h.pop_back();
  if (h.size() != r.size())
    fail(ErrorCode::kFormat, hyp.string() + " has " + std::to_string(h.size()) + " lines but " + ref.string() +
                                 " has " + std::to_string(r.size()));
  std::vector<std::string> hs, rs;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (trim(r[i]).empty()) {
      if (!trim(h[i]).empty())
        fail(ErrorCode::kFormat, "line " + std::to_string(i + 1) + " is a document break in " + ref.string() +
                                     " but not in " + hyp.string());
      continue;
    }
    hs.push_back(h[i]);
    rs.push_back(r[i]);
  }
  return bleu(hs, rs);
}

std::vector<PositionRow> per_position_from_dump(std::string_view grid_dump, std::string_view refs) {
  struct Entry {
    std::size_t doc, i, j;
    std::string text;
  };
  std::vector<Entry> entries;
  std::vector<Tokens> words;
  std::size_t docs = 0, k = 0;
  const auto lines = split_lines(grid_dump);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    std::vector<std::string> f;
    std::string_view rest = lines[n];
    for (int field = 0; field < 3; ++field) {
      const auto tab = rest.find('\t');
      if (tab == std::string_view::npos)
        fail(ErrorCode::kFormat, "grid dump line " + std::to_string(n + 1) + ": expected doc\\ti\\tj\\ttext");
      f.emplace_back(rest.substr(0, tab));
      rest.remove_prefix(tab + 1);
    }
    Entry e{parse_size(f[0]), parse_size(f[1]), parse_size(f[2]), std::string(rest)};
    if (e.doc == 0 || e.i == 0 || e.j == 0 || e.j > e.i)
      fail(ErrorCode::kFormat, "grid dump line " + std::to_string(n + 1) + ": invalid indices");
    docs = std::max(docs, e.doc);
    k = std::max(k, e.j);
    words.push_back(split_whitespace(e.text));
    entries.push_back(std::move(e));
  }
  if (entries.empty()) fail(ErrorCode::kFormat, "empty grid dump");
  // A vocabulary over the dump itself makes ids round-trip to the same words.
  const Vocab vocab = Vocab::build(words, 0, 1);
  std::vector<TranslationGrid> grids(docs);
  for (auto& g : grids) g.k = k;
  for (const auto& e : entries) {
    auto& g = grids[e.doc - 1];
    g.sentences = std::max(g.sentences, e.i);
    g.entries[{e.i, e.j}] = vocab.encode(split_whitespace(e.text));
  }
  for (std::size_t d = 0; d < docs; ++d)
    for (std::size_t i = 1; i <= grids[d].sentences; ++i)
      for (std::size_t j = 1; j <= std::min(i, k); ++j)
        if (!grids[d].entries.contains({i, j}))
          fail(ErrorCode::kFormat, "grid dump lacks document " + std::to_string(d + 1) + " sentence " +
                                       std::to_string(i) + " position " + std::to_string(j));
  const auto ref_docs = documents_as_text(parse_documents(refs));
  return per_position_report(grids, ref_docs, vocab);
}

ContrastiveReport score_contrastive_file(const LoadedModel& m, const std::filesystem::path& groups,
                                         CandidateScore mode) {
  const auto parsed = parse_contrastive(read_file(groups));
  return contrastive_accuracy(parsed, model_candidate_scorer(m.model, m.src_vocab, m.tgt_vocab, mode));
}

MaskKind parse_mask_kind(std::string_view name) {
  if (name == "enc-local") return MaskKind::kEncoderLocal;
  if (name == "dec-local") return MaskKind::kDecoderLocal;
  if (name == "causal") return MaskKind::kCausal;
  fail(ErrorCode::kInvalidArgument, "mask kind must be enc-local, dec-local or causal; got '" + std::string(name) + "'");
}

std::string render_mask_for(std::string_view tokens, std::string_view sep_token, MaskKind kind) {
  std::vector<TokenId> ids;
  for (const auto& t : split_whitespace(tokens)) ids.push_back(t == sep_token ? Vocab::kSep : Vocab::kReserved);
  if (ids.empty()) fail(ErrorCode::kInvalidArgument, "no tokens to build a mask from");
  switch (kind) {
    case MaskKind::kEncoderLocal:
      return render_mask(local_block_mask(ids, Vocab::kSep));
    case MaskKind::kDecoderLocal:
      return render_mask(decoder_local_mask(ids, Vocab::kSep));
    case MaskKind::kCausal:
      return render_mask(causal_mask(ids.size()));
  }
  fail(ErrorCode::kInternal, "unhandled mask kind");
}

}  // namespace docmt
