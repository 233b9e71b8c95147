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

// Character-level CNN.
//
//   ids -> embedding -> dropout -> { conv_k -> batch-norm -> act -> max over time }_k
//       -> concat -> dropout -> dense (sigmoid) -> K sigmoid outputs
//
// All parameters live in one flat vector; Layout gives the offsets. Batch-norm
// running statistics are kept outside it because they are not trained by
// gradient descent.

#ifndef NAMECRAFT_CORE_CNN_HPP_
#define NAMECRAFT_CORE_CNN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/corpus.hpp"

namespace namecraft::cnn {

enum class Activation { kTanh, kElu, kIdentity };
enum class Init { kHeUniform, kGlorotUniform };

const char* activation_name(Activation a);
Activation parse_activation(std::string_view s);
const char* init_name(Init i);
Init parse_init(std::string_view s);

// A-Z followed by the three markers; ids are 1-based, 0 is padding.
std::string default_alphabet(const corpus::PreprocessConfig& cfg = {});

struct CnnConfig {
  std::string alphabet = default_alphabet();
  int max_len = 0;  // 0: derive from the training data
  int embed_dim = 29;
  std::vector<int> kernel_sizes{1, 2, 3, 4, 5, 6, 7};
  std::vector<int> filters{50, 300, 305, 200, 250, 200, 200};
  Activation activation = Activation::kTanh;
  int dense_units = 400;  // 0: pooled features feed the output layer directly
  double dropout_embed = 0.01;
  double dropout = 0.2;
  int batch_size = 512;
  int epochs = 80;
  double learning_rate = 1e-3;
  double min_learning_rate = 0.0002;
  double plateau_factor = 0.5;
  int patience = 2;
  Init init = Init::kHeUniform;
  bool batch_norm = true;

  static CnnConfig single_defaults();
  static CnnConfig concat_defaults();

  // Throws Error(kInvalidArgument). max_len is checked only when set.
  void validate() const;
};

struct ConvBlock {
  int width = 0;
  int filters = 0;
  std::size_t weight = 0;  // width x embed_dim x filters, filter index fastest
  std::size_t bias = 0;
  std::size_t gamma = 0;
  std::size_t beta = 0;
  std::size_t pooled_offset = 0;  // first column in the concatenated features
};

struct Layout {
  int vocab = 0;  // alphabet size + 1
  int embed_dim = 0;
  int max_len = 0;
  int num_classes = 0;
  std::size_t embedding = 0;
  std::vector<ConvBlock> convs;
  int pooled = 0;  // sum of filters
  int dense_units = 0;
  std::size_t dense_w = 0;  // pooled x dense_units
  std::size_t dense_b = 0;
  int out_in = 0;
  std::size_t out_w = 0;  // out_in x num_classes
  std::size_t out_b = 0;
  std::size_t total = 0;

  static Layout build(const CnnConfig& cfg, int num_classes);
  int positions(const ConvBlock& c) const { return max_len - c.width + 1; }
};

struct CnnModel {
  CnnConfig config;
  std::vector<corpus::ClassLabel> classes;
  Layout layout;
  std::vector<double> params;
  std::vector<double> running_mean;  // one per pooled feature
  std::vector<double> running_var;

  std::size_t num_classes() const { return classes.size(); }

  // Zero parameters, unit running variance. config.max_len must be set.
  static CnnModel zeros(const CnnConfig& config, std::vector<corpus::ClassLabel> classes);

  // Throws Error(kModelMismatch) on shape problems, non-finite values or a
  // non-zero padding row.
  void validate() const;
};

// Named slices of the parameter vector, for serialization.
struct TensorSlice {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};
std::vector<TensorSlice> tensor_slices(const Layout& layout);

// Throws Error(kTooLong) or Error(kUnknownChar).
std::vector<int> encode(std::string_view name, const std::string& alphabet, int max_len);

// Like encode but cuts names longer than max_len; `truncated` reports it.
std::vector<int> encode_truncating(std::string_view name, const std::string& alphabet, int max_len,
                                   bool* truncated);

// Per-example activations for one forward pass.
struct ForwardCache {
  std::vector<int> ids;
  std::vector<double> x;  // max_len x embed_dim, after embedding dropout
  std::vector<double> embed_mask;  // dropout scale per entry; empty when off
  // Per conv block, positions x filters.
  std::vector<std::vector<double>> z;  // conv output
  std::vector<std::vector<double>> y;  // after batch-norm
  std::vector<int> argmax;             // per pooled feature
  std::vector<double> pooled;          // after activation and pooling
  std::vector<double> pooled_drop;     // after dropout
  std::vector<double> pooled_mask;
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probs;  // per-class sigmoid
};

double apply_activation(Activation a, double v);
double activation_derivative(Activation a, double pre, double post);

// Inference-mode forward (running batch-norm statistics, no dropout).
// Throws Error(kShapeMismatch) unless ids.size() == max_len.
void forward(const CnnModel& model, std::span<const int> ids, ForwardCache& cache);

// Per-class sigmoid outputs renormalized to sum to 1.
std::vector<double> predict_proba(const CnnModel& model, std::string_view canonical,
                                  bool* truncated = nullptr);

// Weighted binary cross-entropy summed over classes for one example.
double example_loss(std::span<const double> logits, int label, double weight);

// Inference-mode mean loss over a sample and its gradient with respect to
// every parameter. `weights` may be empty (unit weights).
double loss_and_gradient(const CnnModel& model, std::span<const std::vector<int>> ids,
                         std::span<const int> labels, std::span<const double> weights,
                         std::vector<double>* gradient);

struct GradCheckResult {
  double max_relative_error = 0.0;
  int checked = 0;
  int skipped = 0;
};

// Central finite differences on up to 500 randomly chosen parameters.
// Differences where both gradients are below 1e-8 are skipped.
GradCheckResult grad_check(const CnnModel& model, std::span<const std::vector<int>> ids,
                           std::span<const int> labels, double epsilon, std::uint64_t seed,
                           int max_params = 500);

// Same check for the training-mode loss (batch statistics, dropout off).
GradCheckResult grad_check_batch_stats(const CnnModel& model, std::span<const std::vector<int>> ids,
                                       std::span<const int> labels, double epsilon,
                                       std::uint64_t seed, int max_params = 500);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
  bool checkpoint = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::string to_csv() const;
};

struct CnnTrainResult {
  CnnModel model;
  TrainHistory history;
};

// Names must be canonical. Throws Error(kEmptyDataset) or Error(kDiverged).
CnnTrainResult train_cnn(const CnnConfig& config, const std::vector<corpus::ClassLabel>& classes,
                         std::span<const std::string> train_names, std::span<const int> train_labels,
                         std::span<const std::string> val_names, std::span<const int> val_labels,
                         std::span<const double> class_weights, std::uint64_t seed);

// Draws initial parameters the way train_cnn does.
CnnModel init_model(const CnnConfig& config, std::vector<corpus::ClassLabel> classes,
                    std::uint64_t seed);

}  // namespace namecraft::cnn

#endif  // NAMECRAFT_CORE_CNN_HPP_
