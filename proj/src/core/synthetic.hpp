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

// Synthetic labeled name corpora driven by per-class letter propensities.

#ifndef NAMECRAFT_CORE_SYNTHETIC_HPP_
#define NAMECRAFT_CORE_SYNTHETIC_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/corpus.hpp"

namespace namecraft::corpus {

// How names of one kind are drawn: each part has a uniform length in
// [part_length_min, part_length_max], each name a uniform part count in
// [part_count_min, part_count_max], letters i.i.d. from letter_weights.
struct NameStyle {
  std::string name;
  std::array<double, 26> letter_weights{};
  int part_length_min = 3;
  int part_length_max = 8;
  int part_count_min = 1;
  int part_count_max = 3;
};

struct ClassProfile {
  std::string name;
  double proportion = 0.0;
  // (style index, probability) mixtures.
  std::vector<std::pair<int, double>> primary_mix;
  double relative_probability = 0.0;
  std::vector<std::pair<int, double>> relative_mix;
};

// JSON form:
//   {"styles": {"<style>": {"letter_weights": {"A": 0.1, ...},
//                           "part_length": [3, 8], "part_count": [1, 3]}},
//    "classes": [{"name": "...", "proportion": 0.5,
//                 "style": {"<style>": 1.0},
//                 "relative_probability": 0.0,
//                 "relative_style": {"<style>": 1.0}}]}
// A class may instead carry letter_weights/part_length/part_count inline,
// which defines a private style used for both names.
struct SyntheticProfile {
  std::vector<NameStyle> styles;
  std::vector<ClassProfile> classes;

  // Throws Error(kBadProfile) on non-normalized distributions or bad ranges.
  void validate() const;
  static SyntheticProfile from_json(const std::string& text);
  std::string to_json() const;
};

// Class sizes are the largest-remainder rounding of n * proportion, so they
// sum to n exactly; record order is a seeded shuffle.
Dataset generate_synthetic(const SyntheticProfile& profile, std::size_t n, std::uint64_t seed,
                           const PreprocessConfig& cfg = {});

// Two classes, "Muslim" enriched in F/Q/Z and "NonMuslim" enriched in P/V/W,
// otherwise sharing one background letter distribution.
SyntheticProfile letter_asymmetry_profile();

// Household corpus with relative names. Minority "Muslim" households draw
// each name from the F/Q/Z style with probability 0.7 and from the P/V/W
// style otherwise; "NonMuslim" households always use the P/V/W style.
SyntheticProfile household_profile();

// Looks up "letter-asymmetry" or "household"; throws Error(kBadProfile).
SyntheticProfile builtin_profile(const std::string& name);

// Writes `name,relative_name,label` rows with parts separated by spaces.
void write_dataset_csv(const Dataset& ds, const std::string& path,
                       const PreprocessConfig& cfg = {});

}  // namespace namecraft::corpus

#endif  // NAMECRAFT_CORE_SYNTHETIC_HPP_
