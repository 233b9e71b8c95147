// Copyright 2026 The Namecraft Authors.
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

#include "namecraft/namecraft.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/model_file.hpp"
#include "core/pipeline.hpp"

struct nc_model {
  namecraft::Model model;
  std::vector<std::string> score_names;
};

struct nc_train_config {
  namecraft::pipeline::TrainOptions options;
};

namespace {

using namecraft::ErrorCode;

thread_local std::string g_last_error;

nc_status set_error(nc_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
nc_status guarded(F&& fn) {
  try {
    fn();
    return NC_OK;
  } catch (const namecraft::Error& e) {
    return set_error(static_cast<nc_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(NC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(NC_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(NC_ERR_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* what) {
  namecraft::require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

nc_model* wrap(namecraft::Model&& m) {
  auto* h = new nc_model{std::move(m), {}};
  h->score_names = namecraft::pipeline::score_columns(h->model);
  return h;
}

}  // namespace

extern "C" {

const char* nc_version(void) { return "1.0.0"; }

const char* nc_status_string(nc_status status) {
  if (status == NC_OK) return "ok";
  return namecraft::error_code_name(static_cast<ErrorCode>(status));
}

const char* nc_last_error(void) { return g_last_error.c_str(); }

void nc_free_string(char* s) { std::free(s); }

void nc_free_doubles(double* p) { std::free(p); }

nc_status nc_preprocess(const char* raw, char** canonical_out) {
  return guarded([&] {
    need(raw, "raw");
    need(canonical_out, "canonical_out");
    *canonical_out = dup(namecraft::corpus::preprocess_name(raw));
  });
}

nc_status nc_train_config_new(nc_train_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new nc_train_config{};
  });
}

void nc_train_config_free(nc_train_config* cfg) { delete cfg; }

nc_status nc_train_config_set(nc_train_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    cfg->options.set(key, value);
  });
}

const char* nc_train_config_key(size_t index) {
  const auto& keys = namecraft::pipeline::known_train_keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

nc_status nc_train(const nc_train_config* cfg, nc_model** model_out, char** summary_text, char** summary_json,
                   char** history_csv) {
  return guarded([&] {
    need(cfg, "cfg");
    need(model_out, "model_out");
    auto r = namecraft::pipeline::train(cfg->options);
    const std::string text = r.summary_text();
    const std::string js = r.summary_json();
    nc_model* h = wrap(std::move(r.model));
    try {
      put(summary_text, text);
      put(summary_json, js);
      put(history_csv, r.history_csv);
    } catch (...) {
      delete h;
      throw;
    }
    *model_out = h;
  });
}

nc_status nc_model_load(const char* path, nc_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(namecraft::load_model(path));
  });
}

nc_status nc_model_save(const nc_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    namecraft::save_model(model->model, path);
  });
}

nc_status nc_model_serialize(const nc_model* model, char** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = dup(namecraft::serialize_model(model->model));
  });
}

void nc_model_free(nc_model* model) { delete model; }

const char* nc_model_kind(const nc_model* model) {
  return model ? namecraft::model_kind_name(model->model.kind) : nullptr;
}

const char* nc_model_mode(const nc_model* model) {
  return model ? namecraft::load_mode_name(model->model.mode) : nullptr;
}

size_t nc_model_num_classes(const nc_model* model) { return model ? model->model.num_classes() : 0; }

const char* nc_model_class_name(const nc_model* model, size_t index) {
  if (!model || index >= model->model.num_classes()) return nullptr;
  return model->model.classes[index].name.c_str();
}

size_t nc_model_num_scores(const nc_model* model) { return model ? model->score_names.size() : 0; }

const char* nc_model_score_name(const nc_model* model, size_t index) {
  if (!model || index >= model->score_names.size()) return nullptr;
  return model->score_names[index].c_str();
}

nc_status nc_predict(const nc_model* model, const char* const* names, const char* const* relatives, size_t n,
                     int threads, int* labels_out, double* scores_out, int* truncated_out) {
  return guarded([&] {
    need(model, "model");
    if (n == 0) return;
    need(names, "names");
    need(labels_out, "labels_out");
    const std::size_t width = model->score_names.size();
    namecraft::pipeline::parallel_for(
        n, namecraft::pipeline::resolve_threads(threads), [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) {
            need(names[i], "name");
            const char* rel = relatives && relatives[i] ? relatives[i] : "";
            try {
              const auto p = namecraft::pipeline::predict_raw(model->model, names[i], rel);
              labels_out[i] = p.label;
              if (scores_out) std::copy(p.scores.begin(), p.scores.end(), scores_out + i * width);
              if (truncated_out) truncated_out[i] = p.truncated ? 1 : 0;
            } catch (const namecraft::Error& err) {
              throw namecraft::Error(err.code(), "name " + std::to_string(i) + ": " + err.what());
            }
          }
        });
  });
}

nc_status nc_predict_file(const nc_model* model, const char* data_path, const char* out_path, int proba,
                          int threads, nc_predict_summary* summary) {
  return guarded([&] {
    need(model, "model");
    need(data_path, "data_path");
    namecraft::pipeline::PredictOptions po;
    po.proba = proba != 0;
    po.threads = threads;
    namecraft::pipeline::PredictSummary s;
    if (out_path) {
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      namecraft::require(static_cast<bool>(out), ErrorCode::kIo, std::string("cannot write ") + out_path);
      s = namecraft::pipeline::predict_stream(model->model, data_path, out, po);
    } else {
      s = namecraft::pipeline::predict_stream(model->model, data_path, std::cout, po);
    }
    if (summary) *summary = nc_predict_summary{s.rows, s.unclassified, s.ambiguous, s.truncated};
  });
}

void nc_explain_options_init(nc_explain_options* options) {
  if (!options) return;
  options->target_class = nullptr;
  options->ngram_sizes = nullptr;
  options->num_ngram_sizes = 0;
  options->min_count = 25;
  options->bins = 20;
  options->heatmaps = 1;
}

nc_status nc_explain(const nc_model* model, const char* data_path, const char* out_dir,
                     const nc_explain_options* options, char** summary_json) {
  return guarded([&] {
    need(model, "model");
    need(data_path, "data_path");
    need(out_dir, "out_dir");
    need(options, "options");
    need(options->target_class, "target_class");
    namecraft::pipeline::ExplainOptions eo;
    eo.target_class = options->target_class;
    if (options->ngram_sizes) eo.ngram_sizes.assign(options->ngram_sizes, options->ngram_sizes + options->num_ngram_sizes);
    eo.min_count = options->min_count;
    eo.bins = options->bins;
    eo.heatmaps = options->heatmaps != 0;
    const auto s = namecraft::pipeline::explain(model->model, data_path, out_dir, eo);
    if (summary_json) {
      nlohmann::ordered_json j;
      j["names"] = s.names;
      j["aggregated"] = s.aggregated;
      j["max_conservation_residual"] = s.max_conservation_residual;
      j["max_abs_bias_absorbed"] = s.max_abs_bias_absorbed;
      nlohmann::ordered_json top = nlohmann::ordered_json::object();
      for (const auto& rep : s.ngrams) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < rep.rows.size() && i < 10; ++i) {
          rows.push_back({{"ngram", rep.rows[i].ngram},
                          {"mean_relevance", rep.rows[i].mean_relevance},
                          {"count", rep.rows[i].count}});
        }
        top[std::to_string(rep.n)] = rows;
      }
      j["top_ngrams"] = top;
      *summary_json = dup(j.dump(2));
    }
  });
}

nc_status nc_explain_name(const nc_model* model, const char* raw_name, const char* target_class,
                          char** canonical_out, double** relevance_out, size_t* length) {
  return guarded([&] {
    need(model, "model");
    need(raw_name, "raw_name");
    need(target_class, "target_class");
    need(canonical_out, "canonical_out");
    need(relevance_out, "relevance_out");
    need(length, "length");
    const auto& m = model->model;
    int target = -1;
    for (const auto& c : m.classes) {
      if (c.name == target_class) target = c.id;
    }
    namecraft::require(target >= 0, ErrorCode::kInvalidArgument, std::string("unknown class ") + target_class);
    const auto nr = namecraft::pipeline::explain_name(m, namecraft::corpus::preprocess_name(raw_name, m.preprocess),
                                                      target);
    auto* rel = static_cast<double*>(std::malloc(std::max<std::size_t>(1, nr.relevance.size()) * sizeof(double)));
    if (!rel) throw std::bad_alloc();
    std::copy(nr.relevance.begin(), nr.relevance.end(), rel);
    char* name = nullptr;
    try {
      name = dup(nr.name);
    } catch (...) {
      std::free(rel);
      throw;
    }
    *canonical_out = name;
    *relevance_out = rel;
    *length = nr.relevance.size();
  });
}

nc_status nc_bench(const nc_model* model, const char* data_path, int repeat, int threads, size_t max_rows,
                   char** report_text, char** report_json) {
  return guarded([&] {
    need(model, "model");
    need(data_path, "data_path");
    namecraft::pipeline::BenchOptions bo;
    bo.repeat = repeat;
    bo.threads = threads;
    bo.max_rows = max_rows;
    const auto r = namecraft::pipeline::bench(model->model, data_path, bo);
    put(report_text, r.to_text());
    put(report_json, r.to_json());
  });
}

nc_status nc_char_frequency(const char* data_path, char** csv_out) {
  return guarded([&] {
    need(data_path, "data_path");
    need(csv_out, "csv_out");
    *csv_out = dup(namecraft::pipeline::char_frequency_csv(data_path));
  });
}

nc_status nc_generate(const char* profile, size_t n, uint64_t seed, const char* out_path) {
  return guarded([&] {
    need(profile, "profile");
    need(out_path, "out_path");
    namecraft::pipeline::generate(profile, n, seed, out_path);
  });
}

}  // extern "C"
