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

#ifndef DOCMT_DOCMT_H_
#define DOCMT_DOCMT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DOCMT_BUILDING_LIBRARY)
#define DOCMT_API __attribute__((visibility("default")))
#else
#define DOCMT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum docmt_status {
  DOCMT_OK = 0,
  DOCMT_INVALID_ARGUMENT = 1,
  DOCMT_IO = 2,
  DOCMT_FORMAT = 3,
  DOCMT_SHAPE = 4,
  DOCMT_NUMERIC = 5,
  DOCMT_STATE = 6,
  DOCMT_INTERNAL = 7
} docmt_status;

typedef struct docmt_config docmt_config;
typedef struct docmt_model docmt_model;

/* Short lowercase name such as "invalid_argument". */
DOCMT_API const char* docmt_status_name(docmt_status status);
/* Message of the last failing call on this thread; "" after success. */
DOCMT_API const char* docmt_last_error(void);
/* Strings returned through char** out parameters are owned by the caller. */
DOCMT_API void docmt_string_free(char* s);

DOCMT_API docmt_status docmt_config_create(docmt_config** out);
DOCMT_API void docmt_config_destroy(docmt_config* cfg);
/* INI file with [model], [data], [train], [decode] and [run] sections. */
DOCMT_API docmt_status docmt_config_load(docmt_config* cfg, const char* path);
/* key is "section.name", for example "train.epochs". */
DOCMT_API docmt_status docmt_config_set(docmt_config* cfg, const char* key, const char* value);
DOCMT_API docmt_status docmt_config_get(const docmt_config* cfg, const char* key, char** out);
DOCMT_API docmt_status docmt_config_echo(const docmt_config* cfg, char** out);

/* stats_out and summary_out may be NULL. */
DOCMT_API docmt_status docmt_preprocess(const docmt_config* cfg, char** stats_out);
DOCMT_API docmt_status docmt_train(const docmt_config* cfg, int resume, char** summary_out);

/* checkpoint NULL picks the run's best, last or init checkpoint. */
DOCMT_API docmt_status docmt_model_load(const docmt_config* cfg, const char* checkpoint, docmt_model** out);
DOCMT_API void docmt_model_destroy(docmt_model* model);
DOCMT_API docmt_status docmt_model_param_count(const docmt_model* model, uint64_t* out);
DOCMT_API docmt_status docmt_model_k(const docmt_model* model, size_t* out);

/* Sliding-window translation of a document file. k = 0 uses the model's k,
 * position = 0 the last window position, beam = 0 the configured beam.
 * grid_out and summary_out may be NULL. */
DOCMT_API docmt_status docmt_translate(const docmt_model* model, const char* input_path, size_t k, size_t position,
                                       size_t beam, char** translation_out, char** grid_out, char** summary_out);

DOCMT_API docmt_status docmt_bleu_files(const char* hyp_path, const char* ref_path, double* bleu_out,
                                        char** report_out);
/* rows_out holds "j\tbleu" lines; table_out may be NULL. */
DOCMT_API docmt_status docmt_per_position_report(const char* grid_path, const char* ref_path, char** rows_out,
                                                 char** table_out);
DOCMT_API docmt_status docmt_score_contrastive(const docmt_model* model, const char* groups_path,
                                               int mean_per_token, char** report_out);
/* kind is "enc-local", "dec-local" or "causal". */
DOCMT_API docmt_status docmt_render_mask(const char* tokens, const char* sep_token, const char* kind, char** out);

#ifdef __cplusplus
}
#endif

#endif  // DOCMT_DOCMT_H_
