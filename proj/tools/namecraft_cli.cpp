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

// namecraft command line. Talks to the library only through namecraft.h.
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "namecraft/namecraft.h"

namespace {

constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct RuntimeFailure {
  std::string message;
};

void check(nc_status s) {
  if (s != NC_OK) throw RuntimeFailure{std::string(nc_status_string(s)) + ": " + nc_last_error()};
}

struct ModelDeleter {
  void operator()(nc_model* m) const { nc_model_free(m); }
};
using ModelPtr = std::unique_ptr<nc_model, ModelDeleter>;

struct StringDeleter {
  void operator()(char* s) const { nc_free_string(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

ModelPtr load(const std::string& path) {
  nc_model* m = nullptr;
  check(nc_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure{"cannot write " + path};
  out << text;
  if (!out) throw RuntimeFailure{"write failed: " + path};
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ngrams", "expected a comma-separated list of positive integers");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--ngrams", "empty list");
  return out;
}

struct TrainArgs {
  std::string model, mode = "single", data, out, summary_json, history;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> extra;
};

struct PredictArgs {
  std::string model_file, data, out;
  bool proba = false;
  int threads = 0;
};

struct ExplainArgs {
  std::string model_file, data, target, out_dir, ngrams = "1,2,3";
  long min_count = 25;
  int bins = 20;
  bool no_heatmaps = false;
};

struct BenchArgs {
  std::string model_file, data, json_out;
  int repeat = 5;
  int threads = 1;
  std::size_t max_rows = 0;
};

struct GenerateArgs {
  std::string profile = "letter-asymmetry", out;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
  if (a.model == "two-stage" || a.model == "two_stage") {
    if (a.mode == "concat") {
      std::cerr << "error: the two-stage model takes --mode single (it scores each name separately)\n";
      return kUsageError;
    }
  }
  nc_train_config* raw = nullptr;
  check(nc_train_config_new(&raw));
  std::unique_ptr<nc_train_config, void (*)(nc_train_config*)> cfg(raw, nc_train_config_free);
  check(nc_train_config_set(cfg.get(), "model", a.model.c_str()));
  check(nc_train_config_set(cfg.get(), "mode", a.mode.c_str()));
  check(nc_train_config_set(cfg.get(), "data", a.data.c_str()));
  check(nc_train_config_set(cfg.get(), "seed", std::to_string(a.seed).c_str()));
  for (const auto& [k, v] : a.extra) check(nc_train_config_set(cfg.get(), k.c_str(), v.c_str()));

  nc_model* m = nullptr;
  char *text = nullptr, *json = nullptr, *history = nullptr;
  check(nc_train(cfg.get(), &m, &text, &json, &history));
  ModelPtr model(m);
  CString t(text), j(json), h(history);
  check(nc_model_save(model.get(), a.out.c_str()));
  if (!a.summary_json.empty()) write_text(a.summary_json, j.get());
  if (!a.history.empty()) write_text(a.history, h.get());
  std::cout << t.get();
  std::cout << "model written to " << a.out << "\n";
  return 0;
}

int run_predict(const PredictArgs& a) {
  auto model = load(a.model_file);
  nc_predict_summary s{};
  check(nc_predict_file(model.get(), a.data.c_str(), a.out.empty() ? nullptr : a.out.c_str(), a.proba ? 1 : 0,
                        a.threads, &s));
  std::cerr << "predicted " << s.rows << " rows";
  if (std::string(nc_model_kind(model.get())) == "n2c") {
    std::cerr << ", UNCLASSIFIED " << s.unclassified << ", AMBIGUOUS " << s.ambiguous;
  }
  std::cerr << "\n";
  if (s.truncated > 0) {
    std::cerr << "warning: " << s.truncated << " names were longer than the model input and were truncated\n";
  }
  return 0;
}

int run_explain(const ExplainArgs& a) {
  const auto sizes = parse_sizes(a.ngrams);
  auto model = load(a.model_file);
  if (std::string(nc_model_kind(model.get())) != "cnn") {
    std::cerr << "error: LRP requires the neural model (got " << nc_model_kind(model.get()) << ")\n";
    return kRuntimeError;
  }
  nc_explain_options o;
  nc_explain_options_init(&o);
  o.target_class = a.target.c_str();
  o.ngram_sizes = sizes.data();
  o.num_ngram_sizes = sizes.size();
  o.min_count = a.min_count;
  o.bins = a.bins;
  o.heatmaps = a.no_heatmaps ? 0 : 1;
  char* summary = nullptr;
  check(nc_explain(model.get(), a.data.c_str(), a.out_dir.c_str(), &o, &summary));
  CString s(summary);
  std::cout << s.get() << "\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  auto model = load(a.model_file);
  char *text = nullptr, *json = nullptr;
  check(nc_bench(model.get(), a.data.c_str(), a.repeat, a.threads, a.max_rows, &text, &json));
  CString t(text), j(json);
  std::cout << t.get();
  if (!a.json_out.empty()) write_text(a.json_out, j.get());
  return 0;
}

int run_stats(const std::string& data, const std::string& out) {
  char* csv = nullptr;
  check(nc_char_frequency(data.c_str(), &csv));
  CString c(csv);
  if (out.empty()) {
    std::cout << c.get();
  } else {
    write_text(out, c.get());
  }
  return 0;
}

int run_generate(const GenerateArgs& a) {
  check(nc_generate(a.profile.c_str(), a.n, a.seed, a.out.c_str()));
  std::cerr << "wrote " << a.n << " rows to " << a.out << "\n";
  return 0;
}

std::string flag_for(const std::string& key) {
  std::string f = "--" + key;
  for (auto& ch : f) {
    if (ch == '_') ch = '-';
  }
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"namecraft: character-level name classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nc_version()));

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a model and report validation/test metrics");
  train->add_option("--model", ta.model, "lr, svm, cnn, n2c or two-stage")
      ->required()
      ->check(CLI::IsMember({"lr", "svm", "cnn", "n2c", "two-stage", "two_stage"}));
  train->add_option("--mode", ta.mode, "single or concat")->check(CLI::IsMember({"single", "concat"}));
  train->add_option("--data", ta.data, "labeled CSV (name,relative_name,label)")->required();
  train->add_option("--out", ta.out, "model file to write")->required();
  train->add_option("--seed", ta.seed, "random seed");
  train->add_option("--summary-json", ta.summary_json, "write the metrics report as JSON");
  train->add_option("--history", ta.history, "write the CNN training history CSV");
  for (std::size_t i = 0; const char* key = nc_train_config_key(i); ++i) {
    const std::string k = key;
    if (k == "model" || k == "mode" || k == "data" || k == "seed") continue;
    train->add_option_function<std::string>(
        flag_for(k), [&ta, k](const std::string& v) { ta.extra[k] = v; }, "hyperparameter " + k);
  }

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "predict a CSV of names");
  predict->add_option("--model-file", pa.model_file)->required();
  predict->add_option("--data", pa.data, "CSV with a name column")->required();
  predict->add_flag("--proba", pa.proba, "append per-class score columns");
  predict->add_option("--out", pa.out, "output file (default: standard output)");
  predict->add_option("--threads", pa.threads, "worker threads (0: all cores)");

  ExplainArgs ea;
  auto* explain = app.add_subcommand("explain", "LRP heatmaps, n-gram rankings and positional profile");
  explain->add_option("--model-file", ea.model_file)->required();
  explain->add_option("--data", ea.data)->required();
  explain->add_option("--target-class", ea.target)->required();
  explain->add_option("--out-dir", ea.out_dir)->required();
  explain->add_option("--ngrams", ea.ngrams, "n-gram sizes, e.g. 1,2,3");
  explain->add_option("--min-count", ea.min_count)->check(CLI::NonNegativeNumber);
  explain->add_option("--bins", ea.bins)->check(CLI::PositiveNumber);
  explain->add_flag("--no-heatmaps", ea.no_heatmaps, "skip the per-name HTML files");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "measure batch prediction throughput");
  bench->add_option("--model-file", ba.model_file)->required();
  bench->add_option("--data", ba.data)->required();
  bench->add_option("--repeat", ba.repeat)->check(CLI::PositiveNumber);
  bench->add_option("--threads", ba.threads, "worker threads (0: all cores)");
  bench->add_option("--max-rows", ba.max_rows, "read at most this many rows (0: all)");
  bench->add_option("--json", ba.json_out, "also write the report as JSON");

  std::string stats_data, stats_out;
  auto* stats = app.add_subcommand("stats", "per-class relative letter frequencies");
  stats->add_option("--data", stats_data)->required();
  stats->add_option("--out", stats_out, "output file (default: standard output)");

  GenerateArgs ga;
  auto* generate = app.add_subcommand("generate", "write a synthetic labeled corpus");
  generate->add_option("--profile", ga.profile, "letter-asymmetry, household or a JSON profile file");
  generate->add_option("--n", ga.n, "number of records");
  generate->add_option("--seed", ga.seed);
  generate->add_option("--out", ga.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*train) return run_train(ta);
    if (*predict) return run_predict(pa);
    if (*explain) return run_explain(ea);
    if (*bench) return run_bench(ba);
    if (*stats) return run_stats(stats_data, stats_out);
    if (*generate) return run_generate(ga);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const RuntimeFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
