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

// End-to-end operations behind the command line: training with evaluation,
// streaming prediction, explanations, benchmarking and corpus utilities.

#ifndef NAMECRAFT_CORE_PIPELINE_HPP_
#define NAMECRAFT_CORE_PIPELINE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "core/eval.hpp"
#include "core/lrp.hpp"
#include "core/model.hpp"

namespace namecraft::pipeline {

// Worker count: `requested` (<= 0 means the hardware concurrency), capped by
// the NAMECRAFT_THREADS environment variable when it holds a positive integer.
int resolve_threads(int requested);

// Runs fn(begin, end) over contiguous slices of [0, n) on up to `threads`
// threads. The exception from the lowest failing slice is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& fn);

// Training settings as string key/value pairs; see known_train_keys().
class TrainOptions {
 public:
  ModelKind kind = ModelKind::kLogistic;
  corpus::LoadMode mode = corpus::LoadMode::kSingle;
  std::string data;
  std::uint64_t seed = 0;

  // Throws Error(kInvalidArgument) for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const { return values_.at(key); }

 private:
  std::map<std::string, std::string> values_;
};

const std::vector<std::string>& known_train_keys();

struct TrainResult {
  Model model;
  eval::MetricsReport validation;
  eval::MetricsReport test;
  std::optional<eval::MetricsReport> stage1_test;  // two-stage: first stage alone
  std::string history_csv;                         // cnn only
  nlohmann::json details = nlohmann::json::object();

  std::string summary_text() const;
  std::string summary_json() const;
};

TrainResult train(const TrainOptions& options);

struct Prediction {
  int label = eval::kUnclassified;  // class id, kUnclassified or kAmbiguous
  std::vector<double> scores;
  bool truncated = false;
};

// Column names matching Prediction::scores.
std::vector<std::string> score_columns(const Model& model);

// Inputs are canonical; `relative` may be empty.
Prediction predict_canonical(const Model& model, std::string_view primary, std::string_view relative);

// Raw names are preprocessed first. Throws Error(kEmptyName).
Prediction predict_raw(const Model& model, std::string_view name, std::string_view relative);

// Normalized class probabilities of a single-name model (lr, svm, cnn).
std::vector<double> class_probabilities(const Model& model, std::string_view canonical);

// Label per record of an already loaded dataset.
std::vector<int> predict_dataset(const Model& model, const corpus::Dataset& ds, int threads = 1);

std::string label_text(const Model& model, int label);

struct PredictOptions {
  bool proba = false;
  int threads = 1;
  std::size_t chunk_rows = 8192;
};

struct PredictSummary {
  std::size_t rows = 0;
  std::size_t unclassified = 0;
  std::size_t ambiguous = 0;
  std::size_t truncated = 0;
};

// Reads `name[,relative_name[,label]]` and writes one CSV row per input row,
// in input order, holding at most one chunk in memory.
PredictSummary predict_stream(const Model& model, const std::string& path, std::ostream& out,
                              const PredictOptions& options);

struct ExplainOptions {
  std::string target_class;
  std::vector<int> ngram_sizes{1, 2, 3};
  long min_count = 25;
  int bins = 20;
  bool heatmaps = true;
};

struct ExplainSummary {
  std::size_t names = 0;
  std::size_t aggregated = 0;  // names entering the n-gram and profile reports
  std::vector<lrp::NgramReport> ngrams;
  lrp::PositionalProfile profile;
  double max_conservation_residual = 0.0;
  double max_abs_bias_absorbed = 0.0;
};

// Canonical names and their per-character relevance for `target`.
struct NameRelevance {
  std::string name;
  std::vector<double> relevance;
  double logit = 0.0;
  double bias_absorbed = 0.0;
  double residual = 0.0;  // |sum R + bias_absorbed - logit|
};
NameRelevance explain_name(const Model& model, std::string_view canonical, int target);

// Aggregates over names whose true label (or, without labels, prediction)
// is the target class and which the model classifies as the target.
ExplainSummary explain(const Model& model, const std::string& data_path, const std::string& out_dir,
                       const ExplainOptions& options);

struct BenchOptions {
  int repeat = 5;
  int threads = 1;
  std::size_t max_rows = 0;  // 0: all
};

struct BenchReport {
  std::string model_kind;
  std::size_t rows = 0;
  int threads = 1;
  std::vector<double> repeat_seconds;
  std::vector<double> repeat_names_per_second;
  double median_names_per_second = 0.0;
  double wall_seconds = 0.0;
  double latency_p50_us = 0.0;
  double latency_p90_us = 0.0;
  double latency_p99_us = 0.0;

  std::string to_json() const;
  std::string to_text() const;
};

BenchReport bench(const Model& model, const std::string& data_path, const BenchOptions& options);

// Timed batch prediction on in-memory raw rows, for the acceptance suite.
BenchReport bench_rows(const Model& model, const std::vector<std::pair<std::string, std::string>>& rows,
                       const BenchOptions& options);

std::string char_frequency_csv(const std::string& data_path);

// `profile` is a builtin name or a JSON profile path.
void generate(const std::string& profile, std::size_t n, std::uint64_t seed, const std::string& out_path);

}  // namespace namecraft::pipeline

#endif  // NAMECRAFT_CORE_PIPELINE_HPP_
