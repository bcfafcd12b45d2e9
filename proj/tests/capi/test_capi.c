/*
 * Copyright 2026 The docmt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "docmt/docmt.h"

static int failures = 0;

#define EXPECT(cond)                                                 \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                    \
    }                                                                \
  } while (0)

static void write_text(const char* path, const char* text) {
  FILE* f = fopen(path, "wb");
  fputs(text, f);
  fclose(f);
}

int main(void) {
  docmt_config* cfg = NULL;
  char* s = NULL;

  EXPECT(docmt_config_create(&cfg) == DOCMT_OK);
  EXPECT(docmt_config_set(cfg, "model.dim", "16") == DOCMT_OK);
  EXPECT(docmt_config_get(cfg, "model.dim", &s) == DOCMT_OK);
  EXPECT(s && strcmp(s, "16") == 0);
  docmt_string_free(s);
  EXPECT(strcmp(docmt_last_error(), "") == 0);

  EXPECT(docmt_config_set(cfg, "model.missing", "1") == DOCMT_INVALID_ARGUMENT);
  EXPECT(strstr(docmt_last_error(), "model.missing") != NULL);
  EXPECT(strcmp(docmt_status_name(DOCMT_INVALID_ARGUMENT), "invalid_argument") == 0);
  EXPECT(docmt_config_set(NULL, "model.dim", "1") == DOCMT_INVALID_ARGUMENT);
  EXPECT(docmt_config_load(cfg, "/nonexistent/config.ini") == DOCMT_IO);

  s = NULL;
  EXPECT(docmt_config_echo(cfg, &s) == DOCMT_OK);
  EXPECT(s && strstr(s, "[model]\n") && strstr(s, "dim = 16\n"));
  docmt_string_free(s);

  s = NULL;
  EXPECT(docmt_render_mask("a b <sep> c", "<sep>", "enc-local", &s) == DOCMT_OK);
  EXPECT(s && strcmp(s, "00--\n00--\n--00\n--00\n") == 0);
  docmt_string_free(s);
  s = NULL;
  EXPECT(docmt_render_mask("a b", NULL, "sideways", &s) == DOCMT_INVALID_ARGUMENT);
  EXPECT(s == NULL);

  write_text("capi_hyp.txt", "a b c d\n");
  write_text("capi_ref.txt", "a b c d e\n");
  double bleu = 0.0;
  s = NULL;
  EXPECT(docmt_bleu_files("capi_hyp.txt", "capi_ref.txt", &bleu, &s) == DOCMT_OK);
  EXPECT(fabs(bleu - 77.88) <= 0.01);
  EXPECT(s && strncmp(s, "BLEU = 77.88", 12) == 0);
  docmt_string_free(s);
  EXPECT(docmt_bleu_files("capi_hyp.txt", "capi_missing.txt", &bleu, NULL) == DOCMT_IO);

  docmt_model* model = NULL;
  EXPECT(docmt_config_set(cfg, "run.dir", "capi_no_run") == DOCMT_OK);
  EXPECT(docmt_model_load(cfg, NULL, &model) == DOCMT_STATE);
  EXPECT(model == NULL);
  EXPECT(docmt_train(cfg, 0, NULL) == DOCMT_STATE);

  docmt_config_destroy(cfg);
  remove("capi_hyp.txt");
  remove("capi_ref.txt");
  remove("capi_no_run");
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  return failures ? 1 : 0;
}
