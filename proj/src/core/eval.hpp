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

// Classification metrics. Predictions may be kUnclassified or kAmbiguous
// (dictionary baseline); those are tallied apart from the K x K matrix and
// only lower coverage.

#ifndef NAMECRAFT_CORE_EVAL_HPP_
#define NAMECRAFT_CORE_EVAL_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/corpus.hpp"

namespace namecraft::eval {

inline constexpr int kUnclassified = -1;
inline constexpr int kAmbiguous = -2;

struct ConfusionMatrix {
  int k = 0;
  std::vector<long> counts;  // rows = true class, columns = predicted
  long unclassified = 0;
  long ambiguous = 0;

  long at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth * k + predicted)];
  }
  long classified() const;
  long evaluated() const { return classified() + unclassified + ambiguous; }
};

// Throws Error(kLengthMismatch) or Error(kLabel).
ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth, int k);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;  // class never predicted
  bool recall_undefined = false;     // class absent from the truth
  long support = 0;
};

struct Metrics {
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double macro_recall = 0.0;
  double accuracy = 0.0;  // over classified records
  double coverage = 0.0;
  long n = 0;
  long classified = 0;
};

Metrics prf(const ConfusionMatrix& cm);

struct StandardErrors {
  int resamples = 0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  double coverage = 0.0;
};

// Nonparametric bootstrap over records. Resample b draws from its own stream
// mix_seed(seed, b). Throws Error(kInvalidArgument) unless resamples >= 100.
StandardErrors bootstrap_se(std::span<const int> predicted, std::span<const int> truth, int k,
                            int resamples, std::uint64_t seed);

double cohen_kappa(std::span<const int> a1, std::span<const int> a2);

struct CharProfile {
  std::vector<corpus::ClassLabel> classes;
  std::vector<std::array<double, 26>> frequency;  // per class, A..Z

  std::string to_csv() const;
};

// Ratio of mean letter counts to mean name length per class. Throws
// Error(kEmptyClass) for a class without letters.
CharProfile char_frequency_profile(const corpus::Dataset& ds);

struct MetricsReport {
  std::string split;
  std::vector<corpus::ClassLabel> classes;
  ConfusionMatrix confusion;
  Metrics metrics;
  StandardErrors se;

  std::string to_json() const;  // pretty-printed
  std::string to_table() const;
};

MetricsReport evaluate(std::span<const int> predicted, std::span<const int> truth,
                       const std::vector<corpus::ClassLabel>& classes, const std::string& split,
                       int resamples, std::uint64_t seed);

}  // namespace namecraft::eval

#endif  // NAMECRAFT_CORE_EVAL_HPP_
