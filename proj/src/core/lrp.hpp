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

// Layer-wise relevance propagation for the character CNN.
//
// The target class logit is pushed back through every linear map with the
// epsilon rule
//
//   R_i = sum_j a_i w_ij / (z_j + eps * sign(z_j)) * R_j,   sign(0) = +1
//
// where z_j includes the bias. Biases keep their share b_j / (z_j + ...) R_j,
// which is reported as `bias_absorbed`. Element-wise activations pass
// relevance through unchanged, max-over-time pooling hands each filter's
// relevance to its winning position, and batch-norm is folded into the
// convolution before propagation.

#ifndef NAMECRAFT_CORE_LRP_HPP_
#define NAMECRAFT_CORE_LRP_HPP_

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/cnn.hpp"

namespace namecraft::lrp {

inline constexpr double kEpsilon = 1e-7;

struct RelevanceMap {
  int target_class = 0;
  double logit = 0.0;
  int positions = 0;  // max_len
  int embed_dim = 0;
  std::vector<double> r;  // positions x embed_dim
  double bias_absorbed = 0.0;
  // Relevance at each convolution output (positions x filters), per block.
  std::vector<std::vector<double>> conv_relevance;
  std::vector<int> argmax;  // winning position per pooled feature

  double total() const;
  // |total + bias_absorbed - logit|: what the epsilon stabilizer leaks.
  double conservation_residual() const { return std::abs(total() + bias_absorbed - logit); }
};

// One epsilon-rule step for a dense map z = a W + b, W stored input-major
// (inputs x outputs). Returns input relevances; adds the bias shares to
// `bias_share` when non-null. `bias` may be empty.
std::vector<double> epsilon_rule(std::span<const double> a, std::span<const double> w,
                                 std::span<const double> bias, std::span<const double> relevance_out,
                                 double eps, double* bias_share = nullptr);

// Throws Error(kModelMismatch) for a bad target class or input length.
RelevanceMap lrp_relevance(const cnn::CnnModel& model, std::span<const int> ids, int target_class,
                           double eps = kEpsilon);

// Row sums over the embedding dimension.
std::vector<double> char_relevance(const RelevanceMap& map);

// A conservation test of the kind used by the acceptance suite.
bool conserves(const RelevanceMap& map);

struct NgramStat {
  std::string ngram;
  double mean_relevance = 0.0;
  long count = 0;
};

struct NgramReport {
  int n = 1;
  long min_count = 25;
  std::vector<NgramStat> rows;  // descending mean relevance, ties by n-gram

  std::string to_csv() const;
};

// Every length-n window of every name, relevance = sum of its characters'
// relevances. `relevances[i]` must cover names[i] character by character.
NgramReport ngram_report(std::span<const std::string> names,
                         std::span<const std::vector<double>> relevances, int n, long min_count);

struct ProfileBin {
  int part = 0;  // 1-based part index within the name
  int bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  double mean_abs = 0.0;
  long count = 0;
  double ci95 = 0.0;
};

struct PositionalProfile {
  int bins = 20;
  std::vector<ProfileBin> rows;  // non-empty bins, ordered by (part, bin)

  std::string to_csv() const;
};

// Letters only; position = index / (part length - 1), 0.5 for one letter.
PositionalProfile positional_profile(std::span<const std::string> names,
                                     std::span<const std::vector<double>> relevances, int bins,
                                     const corpus::PreprocessConfig& cfg = {});

// Standalone HTML page. Throws Error(kLengthMismatch).
std::string render_heatmap(std::string_view name, std::span<const double> relevances);

}  // namespace namecraft::lrp

#endif  // NAMECRAFT_CORE_LRP_HPP_
