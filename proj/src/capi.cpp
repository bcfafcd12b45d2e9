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

#include "docmt/docmt.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "docmt/error.hpp"
#include "docmt/pipeline.hpp"
#include "docmt/text.hpp"

struct docmt_config {
  docmt::RunConfig run;
};

struct docmt_model {
  docmt::RunConfig run;
  std::optional<docmt::LoadedModel> loaded;
};

namespace {

thread_local std::string last_error;

docmt_status to_status(docmt::ErrorCode code) {
  switch (code) {
    case docmt::ErrorCode::kInvalidArgument:
      return DOCMT_INVALID_ARGUMENT;
    case docmt::ErrorCode::kIo:
      return DOCMT_IO;
    case docmt::ErrorCode::kFormat:
      return DOCMT_FORMAT;
    case docmt::ErrorCode::kShape:
      return DOCMT_SHAPE;
    case docmt::ErrorCode::kNumeric:
      return DOCMT_NUMERIC;
    case docmt::ErrorCode::kState:
      return DOCMT_STATE;
    case docmt::ErrorCode::kInternal:
      return DOCMT_INTERNAL;
  }
  return DOCMT_INTERNAL;
}

template <typename F>
docmt_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return DOCMT_OK;
  } catch (const docmt::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return DOCMT_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DOCMT_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DOCMT_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return DOCMT_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) docmt::fail(docmt::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void give(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

}  // namespace

extern "C" {

const char* docmt_status_name(docmt_status status) {
  switch (status) {
    case DOCMT_OK:
      return "ok";
    case DOCMT_INVALID_ARGUMENT:
      return "invalid_argument";
    case DOCMT_IO:
      return "io";
    case DOCMT_FORMAT:
      return "format";
    case DOCMT_SHAPE:
      return "shape";
    case DOCMT_NUMERIC:
      return "numeric";
    case DOCMT_STATE:
      return "state";
    case DOCMT_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* docmt_last_error(void) { return last_error.c_str(); }

void docmt_string_free(char* s) { std::free(s); }

docmt_status docmt_config_create(docmt_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new docmt_config();
  });
}

void docmt_config_destroy(docmt_config* cfg) { delete cfg; }

docmt_status docmt_config_load(docmt_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "config");
    require(path, "path");
    docmt::RunConfig staged = cfg->run;
    staged.load(path);
    cfg->run = std::move(staged);
  });
}

docmt_status docmt_config_set(docmt_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->run.set(key, value);
  });
}

docmt_status docmt_config_get(const docmt_config* cfg, const char* key, char** out) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(out, "out");
    *out = dup(cfg->run.get(key));
  });
}

docmt_status docmt_config_echo(const docmt_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = dup(cfg->run.echo());
  });
}

docmt_status docmt_preprocess(const docmt_config* cfg, char** stats_out) {
  return guarded([&] {
    require(cfg, "config");
    give(stats_out, docmt::run_preprocess(cfg->run));
  });
}

docmt_status docmt_train(const docmt_config* cfg, int resume, char** summary_out) {
  return guarded([&] {
    require(cfg, "config");
    give(summary_out, docmt::run_train(cfg->run, resume != 0));
  });
}

docmt_status docmt_model_load(const docmt_config* cfg, const char* checkpoint, docmt_model** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    auto model = std::make_unique<docmt_model>();
    model->run = cfg->run;
    model->loaded.emplace(docmt::load_run_model(cfg->run, checkpoint ? checkpoint : ""));
    *out = model.release();
  });
}

void docmt_model_destroy(docmt_model* model) { delete model; }

docmt_status docmt_model_param_count(const docmt_model* model, uint64_t* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->loaded->model.params().scalar_count();
  });
}

docmt_status docmt_model_k(const docmt_model* model, size_t* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->loaded->model.config().k;
  });
}

docmt_status docmt_translate(const docmt_model* model, const char* input_path, size_t k, size_t position,
                             size_t beam, char** translation_out, char** grid_out, char** summary_out) {
  return guarded([&] {
    require(model, "model");
    require(input_path, "input_path");
    require(translation_out, "translation_out");
    docmt::DecodeOptions opts = model->run.decode;
    if (beam) opts.beam_size = beam;
    const auto docs = docmt::read_documents(input_path);
    const auto out = docmt::translate_documents(*model->loaded, docs, k, position ? position : model->run.position, opts);
    *translation_out = dup(out.text);
    give(grid_out, out.grid);
    give(summary_out, out.summary);
  });
}

docmt_status docmt_bleu_files(const char* hyp_path, const char* ref_path, double* bleu_out, char** report_out) {
  return guarded([&] {
    require(hyp_path, "hyp_path");
    require(ref_path, "ref_path");
    const auto report = docmt::bleu_files(hyp_path, ref_path);
    if (bleu_out) *bleu_out = report.bleu;
    give(report_out, docmt::render_bleu(report));
  });
}

docmt_status docmt_per_position_report(const char* grid_path, const char* ref_path, char** rows_out,
                                       char** table_out) {
  return guarded([&] {
    require(grid_path, "grid_path");
    require(ref_path, "ref_path");
    require(rows_out, "rows_out");
    const auto rows = docmt::per_position_from_dump(docmt::read_file(grid_path), docmt::read_file(ref_path));
    *rows_out = dup(docmt::render_position_rows(rows));
    give(table_out, docmt::render_position_table(rows));
  });
}

docmt_status docmt_score_contrastive(const docmt_model* model, const char* groups_path, int mean_per_token,
                                     char** report_out) {
  return guarded([&] {
    require(model, "model");
    require(groups_path, "groups_path");
    require(report_out, "report_out");
    const auto mode = mean_per_token ? docmt::CandidateScore::kMeanPerToken : docmt::CandidateScore::kSum;
    *report_out = dup(docmt::render_contrastive(docmt::score_contrastive_file(*model->loaded, groups_path, mode)));
  });
}

docmt_status docmt_render_mask(const char* tokens, const char* sep_token, const char* kind, char** out) {
  return guarded([&] {
    require(tokens, "tokens");
    require(kind, "kind");
    require(out, "out");
    *out = dup(docmt::render_mask_for(tokens, sep_token ? sep_token : "<sep>", docmt::parse_mask_kind(kind)));
  });
}

}  // extern "C"
