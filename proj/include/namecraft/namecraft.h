/* Copyright 2026 The Namecraft Authors.
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

/* C interface to libnamecraft.
 *
 * Every fallible call returns an nc_status; NC_OK is zero. On failure the
 * message is available from nc_last_error() on the calling thread until the
 * next failing call there. Strings and arrays handed out by the library are
 * released with nc_free_string / nc_free_doubles. Models are immutable once
 * built and may be shared between threads.
 */

#ifndef NAMECRAFT_NAMECRAFT_H_
#define NAMECRAFT_NAMECRAFT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(NAMECRAFT_BUILDING_LIBRARY)
#define NC_API __attribute__((visibility("default")))
#else
#define NC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nc_status {
  NC_OK = 0,
  NC_ERR_INVALID_ARGUMENT = 1,
  NC_ERR_IO = 2,
  NC_ERR_SCHEMA = 3,
  NC_ERR_LABEL = 4,
  NC_ERR_EMPTY_NAME = 5,
  NC_ERR_RATIO = 6,
  NC_ERR_EMPTY_CLASS = 7,
  NC_ERR_BAD_PROFILE = 8,
  NC_ERR_EMPTY_CORPUS = 9,
  NC_ERR_NOT_CONVERGED = 10,
  NC_ERR_DIMENSION_MISMATCH = 11,
  NC_ERR_TOO_LONG = 12,
  NC_ERR_UNKNOWN_CHAR = 13,
  NC_ERR_DIVERGED = 14,
  NC_ERR_EMPTY_DATASET = 15,
  NC_ERR_NO_MATCH = 16,
  NC_ERR_MODEL_MISMATCH = 17,
  NC_ERR_LENGTH_MISMATCH = 18,
  NC_ERR_VERSION = 19,
  NC_ERR_SHAPE_MISMATCH = 20,
  NC_ERR_INTERNAL = 99
} nc_status;

/* Predicted labels outside 0..K-1. */
#define NC_UNCLASSIFIED (-1)
#define NC_AMBIGUOUS (-2)

typedef struct nc_model nc_model;
typedef struct nc_train_config nc_train_config;

NC_API const char* nc_version(void);
NC_API const char* nc_status_string(nc_status status);
NC_API const char* nc_last_error(void);
NC_API void nc_free_string(char* s);
NC_API void nc_free_doubles(double* p);

/* Canonical form of a raw name, e.g. "Abdul  Karim!" -> "{ABDUL}{KARIM}". */
NC_API nc_status nc_preprocess(const char* raw, char** canonical_out);

/* Training. Keys: model, mode, data, seed and the hyperparameters listed by
 * nc_train_config_key(). Values are parsed and checked on set. */
NC_API nc_status nc_train_config_new(nc_train_config** out);
NC_API void nc_train_config_free(nc_train_config* cfg);
NC_API nc_status nc_train_config_set(nc_train_config* cfg, const char* key, const char* value);
/* Known keys by index; NULL past the end. */
NC_API const char* nc_train_config_key(size_t index);

/* Any of summary_text, summary_json and history_csv may be NULL. history_csv
 * is empty unless a CNN was trained. */
NC_API nc_status nc_train(const nc_train_config* cfg, nc_model** model_out, char** summary_text,
                          char** summary_json, char** history_csv);

NC_API nc_status nc_model_load(const char* path, nc_model** out);
NC_API nc_status nc_model_save(const nc_model* model, const char* path);
NC_API nc_status nc_model_serialize(const nc_model* model, char** out);
NC_API void nc_model_free(nc_model* model);

/* "lr", "svm", "cnn", "n2c" or "two_stage"; NULL for a NULL model. */
NC_API const char* nc_model_kind(const nc_model* model);
/* "single" or "concat". */
NC_API const char* nc_model_mode(const nc_model* model);
NC_API size_t nc_model_num_classes(const nc_model* model);
NC_API const char* nc_model_class_name(const nc_model* model, size_t index);
/* Score columns written by nc_predict: p_<class> for lr/svm/cnn,
 * certainty_<class> for n2c, p1/p2/score for two_stage. */
NC_API size_t nc_model_num_scores(const nc_model* model);
NC_API const char* nc_model_score_name(const nc_model* model, size_t index);

/* Predicts n raw names. `relatives` may be NULL, as may any entry of it.
 * labels_out receives class ids or NC_UNCLASSIFIED / NC_AMBIGUOUS.
 * scores_out (optional) receives n * nc_model_num_scores() values, row-major.
 * truncated_out (optional) flags names cut to the CNN input length.
 * threads <= 0 uses every core, capped by NAMECRAFT_THREADS. */
NC_API nc_status nc_predict(const nc_model* model, const char* const* names, const char* const* relatives,
                            size_t n, int threads, int* labels_out, double* scores_out, int* truncated_out);

typedef struct nc_predict_summary {
  size_t rows;
  size_t unclassified;
  size_t ambiguous;
  size_t truncated;
} nc_predict_summary;

/* Streams predictions for a CSV file (header name[,relative_name[,label]])
 * to out_path, or to standard output when out_path is NULL. Rows before a
 * failing row are written. */
NC_API nc_status nc_predict_file(const nc_model* model, const char* data_path, const char* out_path, int proba,
                                 int threads, nc_predict_summary* summary);

typedef struct nc_explain_options {
  const char* target_class;
  const int* ngram_sizes; /* NULL: 1, 2, 3 */
  size_t num_ngram_sizes;
  long min_count;
  int bins;
  int heatmaps; /* write heatmap_XXXXX.html files */
} nc_explain_options;

NC_API void nc_explain_options_init(nc_explain_options* options);

/* LRP reports for a CNN model into out_dir. summary_json may be NULL. */
NC_API nc_status nc_explain(const nc_model* model, const char* data_path, const char* out_dir,
                            const nc_explain_options* options, char** summary_json);

/* Per-character relevance of one raw name for target_class. The canonical
 * (possibly truncated) name is returned alongside; both arrays have
 * *length entries. */
NC_API nc_status nc_explain_name(const nc_model* model, const char* raw_name, const char* target_class,
                                 char** canonical_out, double** relevance_out, size_t* length);

/* Timed batch prediction. Either output may be NULL. */
NC_API nc_status nc_bench(const nc_model* model, const char* data_path, int repeat, int threads,
                          size_t max_rows, char** report_text, char** report_json);

/* Per-class relative letter frequencies of a labeled CSV file. */
NC_API nc_status nc_char_frequency(const char* data_path, char** csv_out);

/* Synthetic corpus from a builtin profile ("letter-asymmetry", "household")
 * or a JSON profile file. */
NC_API nc_status nc_generate(const char* profile, size_t n, uint64_t seed, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* NAMECRAFT_NAMECRAFT_H_ */
