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

#include "core/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace namecraft::corpus {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

std::string fold(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

void PreprocessConfig::validate() const {
  const bool distinct = part_open != part_close && part_open != name_separator &&
                        part_close != name_separator;
  const bool outside = !is_upper(part_open) && !is_upper(part_close) && !is_upper(name_separator);
  require(distinct && outside, ErrorCode::kInvalidArgument,
          "preprocess markers must be distinct and outside A-Z");
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    require(records[i].label.has_value(), ErrorCode::kLabel,
            "record " + std::to_string(i) + " has no label");
    out.push_back(*records[i].label);
  }
  return out;
}

int Dataset::class_id(std::string_view name) const {
  const std::string key = fold(name);
  for (const auto& c : classes) {
    if (fold(c.name) == key) return c.id;
  }
  return -1;
}

std::string preprocess_name(std::string_view raw, const PreprocessConfig& cfg) {
  std::string out;
  out.reserve(raw.size() + 4);
  std::string part;
  auto flush = [&] {
    if (part.empty()) return;
    out.push_back(cfg.part_open);
    out += part;
    out.push_back(cfg.part_close);
    part.clear();
  };
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::isalpha(c)) {
      part.push_back(static_cast<char>(std::toupper(c)));
    }
  }
  flush();
  if (out.empty()) {
    fail(ErrorCode::kEmptyName, "no alphabetic character in name '" + std::string(raw) + "'");
  }
  return out;
}

std::string concat_names(std::string_view primary, std::string_view relative,
                         const PreprocessConfig& cfg) {
  std::string out;
  out.reserve(primary.size() + relative.size() + 1);
  out += primary;
  out.push_back(cfg.name_separator);
  out += relative;
  return out;
}

bool is_canonical(std::string_view text, const PreprocessConfig& cfg, bool allow_separator) {
  enum { kExpectOpen, kFirstLetter, kLetters, kAfterClose } state = kExpectOpen;
  for (char c : text) {
    switch (state) {
      case kExpectOpen:
        if (c != cfg.part_open) return false;
        state = kFirstLetter;
        break;
      case kFirstLetter:
        if (!is_upper(c)) return false;
        state = kLetters;
        break;
      case kLetters:
        if (c == cfg.part_close) {
          state = kAfterClose;
        } else if (!is_upper(c)) {
          return false;
        }
        break;
      case kAfterClose:
        if (c == cfg.part_open) {
          state = kFirstLetter;
        } else if (allow_separator && c == cfg.name_separator) {
          state = kExpectOpen;
        } else {
          return false;
        }
        break;
    }
  }
  return state == kAfterClose;
}

std::vector<std::string_view> name_parts(std::string_view canonical, const PreprocessConfig& cfg) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < canonical.size()) {
    if (canonical[i] != cfg.part_open) {
      ++i;
      continue;
    }
    const std::size_t close = canonical.find(cfg.part_close, i + 1);
    if (close == std::string_view::npos) break;
    if (close > i + 1) parts.push_back(canonical.substr(i + 1, close - i - 1));
    i = close + 1;
  }
  return parts;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  options.preprocess.validate();
  Dataset ds;
  ds.provenance = path;

  struct Raw {
    std::string primary;
    std::optional<std::string> relative;
    std::string label;
    std::size_t line;
  };
  std::vector<Raw> rows;

  NameCsvReader reader(path);
  NameCsvReader::Row row;
  while (reader.next(row)) {
    Raw r;
    r.line = row.line;
    try {
      r.primary = preprocess_name(row.name, options.preprocess);
      if (!trim(row.relative_name).empty()) {
        r.relative = preprocess_name(row.relative_name, options.preprocess);
      }
    } catch (const Error& e) {
      fail(e.code(), path + ": line " + std::to_string(row.line) + ": " + e.what());
    }
    r.label = trim(row.label);
    if (r.label.empty() && options.require_labels) {
      fail(ErrorCode::kLabel, path + ": line " + std::to_string(row.line) + ": missing label");
    }
    rows.push_back(std::move(r));
  }

  if (!options.class_names.empty()) {
    for (std::size_t i = 0; i < options.class_names.size(); ++i) {
      require(ds.class_id(options.class_names[i]) < 0, ErrorCode::kInvalidArgument,
              "duplicate class name " + options.class_names[i]);
      ds.classes.push_back({static_cast<int>(i), options.class_names[i]});
    }
  } else {
    // First spelling seen wins; order is case-insensitive lexicographic.
    std::map<std::string, std::string> seen;
    for (const auto& r : rows) {
      if (!r.label.empty()) seen.emplace(fold(r.label), r.label);
    }
    int id = 0;
    for (const auto& [key, spelling] : seen) ds.classes.push_back({id++, spelling});
  }

  ds.records.reserve(rows.size());
  for (auto& r : rows) {
    NameRecord rec;
    if (options.mode == LoadMode::kConcat && r.relative) {
      rec.primary_name = concat_names(r.primary, *r.relative, options.preprocess);
    } else {
      rec.primary_name = std::move(r.primary);
      if (options.mode == LoadMode::kSingle) rec.relative_name = std::move(r.relative);
    }
    if (!r.label.empty()) {
      const int id = ds.class_id(r.label);
      if (id < 0) {
        fail(ErrorCode::kLabel, path + ": line " + std::to_string(r.line) + ": unknown label '" +
                                    r.label + "'");
      }
      rec.label = id;
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset augment_single(const Dataset& ds) {
  Dataset out;
  out.classes = ds.classes;
  out.provenance = ds.provenance;
  out.records = ds.records;
  for (const auto& r : ds.records) {
    if (r.relative_name && !r.relative_name->empty()) {
      out.records.push_back(NameRecord{*r.relative_name, std::nullopt, r.label});
    }
  }
  return out;
}

Splits split_dataset(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  const bool positive = ratios.train > 0 && ratios.validation > 0 && ratios.test > 0;
  const double sum = ratios.train + ratios.validation + ratios.test;
  require(positive && std::abs(sum - 1.0) <= 1e-9, ErrorCode::kRatio,
          "split ratios must be positive and sum to 1");

  // Stratum K holds unlabeled records.
  const std::size_t k = ds.classes.size();
  std::vector<std::vector<std::size_t>> strata(k + 1);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& label = ds.records[i].label;
    const std::size_t s = label ? static_cast<std::size_t>(*label) : k;
    require(s <= k, ErrorCode::kLabel, "record label out of range");
    strata[s].push_back(i);
  }

  Rng rng(seed);
  std::vector<int> assignment(ds.records.size(), 0);
  for (auto& members : strata) {
    rng.shuffle(members);
    const double n = static_cast<double>(members.size());
    // The small slack keeps e.g. 0.15 * 100 = 15.000000000000002 and
    // 0.29 * 100 = 28.999999999999996 on the intended integer.
    const auto n_val = static_cast<std::size_t>(std::floor(n * ratios.validation + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(n * ratios.test + 1e-9));
    for (std::size_t j = 0; j < members.size(); ++j) {
      assignment[members[j]] = j < n_val ? 1 : (j < n_val + n_test ? 2 : 0);
    }
  }

  Splits out;
  for (Dataset* d : {&out.train, &out.validation, &out.test}) {
    d->classes = ds.classes;
  }
  out.train.provenance = ds.provenance + "#train";
  out.validation.provenance = ds.provenance + "#validation";
  out.test.provenance = ds.provenance + "#test";
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    Dataset& dst = assignment[i] == 0 ? out.train : (assignment[i] == 1 ? out.validation : out.test);
    dst.records.push_back(ds.records[i]);
  }
  return out;
}

std::vector<double> class_weights(const std::vector<int>& labels, int num_classes) {
  require(num_classes >= 1, ErrorCode::kInvalidArgument, "class count must be positive");
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    require(y >= 0 && y < num_classes, ErrorCode::kLabel, "label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  std::vector<double> weights(counts.size());
  const double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    require(counts[c] > 0, ErrorCode::kEmptyClass, "class " + std::to_string(c) + " has no examples");
    weights[c] = n / (static_cast<double>(num_classes) * static_cast<double>(counts[c]));
  }
  return weights;
}

}  // namespace namecraft::corpus
