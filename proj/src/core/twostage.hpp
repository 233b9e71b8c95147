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

// Household second stage: a linear SVM over handcrafted features of the two
// first-stage probabilities (person, relative). Feature pool, in order:
//
//   0 P1   1 P2   2 log P1   3 log P2   4 P1*P2   5 max(P1, P2)
//   6 P1*log P2   7 P2*log P1   8 max(log P1, log P2)
//
// Probabilities are clamped to [1e-9, 1] before any log.

#ifndef NAMECRAFT_CORE_TWOSTAGE_HPP_
#define NAMECRAFT_CORE_TWOSTAGE_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace namecraft::twostage {

inline constexpr int kPoolSize = 9;
inline constexpr double kLogClamp = 1e-9;

using FeatureMask = std::array<bool, kPoolSize>;
using ProbPair = std::pair<double, double>;

const char* feature_name(int index);
FeatureMask full_mask();
int active_count(const FeatureMask& mask);

std::vector<double> stage_features(double p1, double p2, const FeatureMask& mask = full_mask());

struct StageTwoModel {
  FeatureMask mask = full_mask();
  std::vector<double> weights;  // one per active feature
  // |weight| on standardized features, set by train_stage2 for RFE; not
  // stored in model files.
  std::vector<double> importance;
  double bias = 0.0;
  double c = 1.0;
  std::string positive_class = "1";
  std::string negative_class = "0";

  double score(double p1, double p2) const;
  bool positive(double p1, double p2) const { return score(p1, p2) > 0.0; }
  void validate() const;  // Throws Error(kModelMismatch)
};

// Linear SVM with balanced class weights on labels in {0, 1} (1 = positive),
// fitted on standardized features and returned in raw feature units.
// Throws Error(kInvalidArgument) when only one label is present.
StageTwoModel train_stage2(std::span<const ProbPair> pairs, std::span<const int> labels, double c,
                           const FeatureMask& mask = full_mask());

struct RfeStep {
  FeatureMask mask;
  double val_macro_recall = 0.0;
};

struct RfeResult {
  FeatureMask mask;
  std::vector<RfeStep> path;  // from the full pool down to one feature
};

// Drops the feature with the smallest standardized |w| each round; keeps the mask with the best
// validation macro-average recall, preferring fewer features on ties.
RfeResult rfe_select(const FeatureMask& pool, std::span<const ProbPair> train_pairs,
                     std::span<const int> train_labels, std::span<const ProbPair> val_pairs,
                     std::span<const int> val_labels, double c);

// Mean of per-class recall for labels in {0, 1}.
double binary_macro_recall(std::span<const int> predicted, std::span<const int> truth);

// `p1,p2,score,class` rows over the grid i / (resolution - 1).
std::string export_boundary(const StageTwoModel& model, int resolution);

}  // namespace namecraft::twostage

#endif  // NAMECRAFT_CORE_TWOSTAGE_HPP_
