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

// Dictionary baseline in the style of name2community.
//
// Every name part X is looked up in a reference list by spelling and by its
// phonetic code. With S_X / P_X the spelling / phonetic occurrence counts and
// S_{X,Y} / P_{X,Y} those inside class Y:
//
//   I(X in Y) = q_s * q_p * (1 - (S_X - S_{X,Y}) / S_X * (P_X - P_{X,Y}) / P_X)
//   I(N in Y) = 1 - prod_X (E_X - I(X in Y)) / E_X,   E_X = S_X + P_X
//
// A channel without a match contributes a ratio of 1 and a count of 0.
//
// Phonetic codes use classic Soundex after folding PH->F, W->V and J->Z:
//   B F P V -> 1   C G K Q S X Z -> 2   D T -> 3   L -> 4   M N -> 5   R -> 6
// Vowels (A E I O U Y) separate repeated digits, H does not. The first letter
// is kept and the code is padded with zeros to four characters. This only
// approximates the Indic Soundex tables of the original tool.

#ifndef NAMECRAFT_CORE_N2C_HPP_
#define NAMECRAFT_CORE_N2C_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/corpus.hpp"

namespace namecraft::n2c {

inline constexpr int kUnclassified = -1;
inline constexpr int kAmbiguous = -2;

std::string soundex_code(std::string_view part);

struct KeyCounts {
  std::string key;
  std::vector<std::int64_t> per_class;
  std::int64_t total = 0;
};

struct ReferenceList {
  std::vector<corpus::ClassLabel> classes;
  std::vector<KeyCounts> spelling;  // sorted by key
  std::vector<KeyCounts> phonetic;  // sorted by key
  double q_s = 0.0;
  double q_p = 0.0;
  int majority_class = 0;  // used by the tie-break mode

  // Lookups walk the whole list, like the reference tool's matcher; cost is
  // linear in the reference size. Null when absent.
  const KeyCounts* find_spelling(std::string_view part) const;
  const KeyCounts* find_phonetic(std::string_view code) const;

  std::string to_json() const;
  // Throws Error(kSchema) on malformed documents.
  static ReferenceList from_json(std::string_view text);

  void validate() const;
};

// Fraction of keys whose occurrences all fall in one class (0 when empty).
double unambiguous_fraction(const std::vector<KeyCounts>& keys);

// Counts every part of every record's primary name. Throws
// Error(kEmptyCorpus) when there are no parts and Error(kLabel) for
// unlabeled records.
ReferenceList build_reference(const corpus::Dataset& train);

// Throws Error(kNoMatch) when neither channel knows the part.
double part_certainty(std::string_view part, int cls, const ReferenceList& ref);

// 1 - prod (E - I) / E over (E, I) pairs.
double aggregate_certainty(std::span<const std::pair<double, double>> matches);

// Parts without a match are skipped. Throws Error(kNoMatch) when no part matches.
double name_certainty(std::string_view canonical, int cls, const ReferenceList& ref,
                      const corpus::PreprocessConfig& cfg = {});

struct Classification {
  int label = kUnclassified;  // class id, kUnclassified or kAmbiguous
  std::vector<double> certainty;  // per class; zeros when unclassified
  int matched_parts = 0;
  int total_parts = 0;
};

Classification classify(std::string_view canonical, const ReferenceList& ref,
                        bool majority_tiebreak = false, const corpus::PreprocessConfig& cfg = {});

}  // namespace namecraft::n2c

#endif  // NAMECRAFT_CORE_N2C_HPP_
