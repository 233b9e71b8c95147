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

// Labeled name records, canonical preprocessing, splitting and class weights.
//
// A canonical name is a sequence of parts, each `{LETTERS}` with LETTERS in
// A-Z. A household string joins two canonical names with the separator:
// `{RAM}{KUMAR}|{SITA}{DEVI}`.

#ifndef NAMECRAFT_CORE_CORPUS_HPP_
#define NAMECRAFT_CORE_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace namecraft::corpus {

struct ClassLabel {
  int id = 0;
  std::string name;

  bool operator==(const ClassLabel&) const = default;
};

struct PreprocessConfig {
  char part_open = '{';
  char part_close = '}';
  char name_separator = '|';

  // Throws Error(kInvalidArgument) unless the markers are distinct and not A-Z.
  void validate() const;

  bool is_marker(char c) const {
    return c == part_open || c == part_close || c == name_separator;
  }
  bool operator==(const PreprocessConfig&) const = default;
};

struct NameRecord {
  std::string primary_name;
  std::optional<std::string> relative_name;
  std::optional<int> label;

  bool operator==(const NameRecord&) const = default;
};

struct Dataset {
  std::vector<NameRecord> records;
  std::vector<ClassLabel> classes;
  std::string provenance;

  std::size_t size() const { return records.size(); }
  std::size_t num_classes() const { return classes.size(); }
  std::vector<int> labels() const;  // throws if any record is unlabeled
  // Case-insensitive lookup; -1 if absent.
  int class_id(std::string_view name) const;
};

enum class LoadMode { kSingle, kConcat };

// Drops every character outside A-Z/a-z (including non-ASCII bytes), splits
// on whitespace runs, uppercases and wraps each part in the part markers.
// Throws Error(kEmptyName) when no letter survives.
std::string preprocess_name(std::string_view raw, const PreprocessConfig& cfg = {});

std::string concat_names(std::string_view primary, std::string_view relative,
                         const PreprocessConfig& cfg = {});

// True if `text` is a canonical name (or a household string when
// `allow_separator`).
bool is_canonical(std::string_view text, const PreprocessConfig& cfg = {},
                  bool allow_separator = false);

// Letters of each `{...}` part, in order, across separators.
std::vector<std::string_view> name_parts(std::string_view canonical,
                                         const PreprocessConfig& cfg = {});

struct LoadOptions {
  LoadMode mode = LoadMode::kSingle;
  PreprocessConfig preprocess;
  // Configured class names. When empty the classes are the distinct labels
  // found in the file, ordered case-insensitively.
  std::vector<std::string> class_names;
  // When false, empty label cells load as unlabeled records.
  bool require_labels = true;
};

// Reads the `name,relative_name,label` CSV. In concat mode the household
// string replaces the primary name and the relative name is cleared.
Dataset load_dataset(const std::string& path, const LoadOptions& options);

// Returns `ds` followed by one record per non-empty relative name, with the
// relative as its primary name and the same label.
Dataset augment_single(const Dataset& ds);

struct SplitRatios {
  double train = 0.7;
  double validation = 0.15;
  double test = 0.15;
};

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Stratified split: each class is shuffled with the seeded RNG and cut at the
// ratio boundaries (floor for validation and test, remainder to train).
// Records keep their original relative order inside each split. Unlabeled
// records are treated as one extra stratum.
Splits split_dataset(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed);

// Balanced weights N / (K * N_c). Throws Error(kEmptyClass) if a class is absent.
std::vector<double> class_weights(const std::vector<int>& labels, int num_classes);

}  // namespace namecraft::corpus

#endif  // NAMECRAFT_CORE_CORPUS_HPP_
