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

// Character n-gram TF-IDF vectors.
//
// Every contiguous substring of length 1..max_n of the full canonical string
// (markers included) is a token. For a document d with N_d extracted token
// positions over all lengths, TF(t,d) = count(t,d) / N_d and
// IDF(t) = ln((1 + n) / (1 + DF(t))) + 1. Vectors are L2-normalized.

#ifndef NAMECRAFT_CORE_FEATURIZER_HPP_
#define NAMECRAFT_CORE_FEATURIZER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace namecraft::featurizer {

struct SparseVector {
  struct Entry {
    std::int32_t column;
    double value;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;  // sorted by column, no duplicates

  bool empty() const { return entries.empty(); }
  double dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * dense[static_cast<std::size_t>(e.column)];
    return s;
  }
  double squared_norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * e.value;
    return s;
  }
};

class FeatureSpace {
 public:
  FeatureSpace() = default;

  // Rebuilds idf and the lookup trie from serialized parts. Tokens must be
  // sorted, unique and prefix-closed (every prefix of a token is a token).
  static FeatureSpace from_parts(int max_n, std::int64_t n_docs, std::vector<std::string> tokens,
                                 std::vector<std::int64_t> df);

  int max_n() const { return max_n_; }
  std::int64_t n_docs() const { return n_docs_; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::int64_t>& df() const { return df_; }
  const std::vector<double>& idf() const { return idf_; }

  std::optional<std::int32_t> column(std::string_view token) const;

  // Stable 64-bit FNV-1a over max_n, n_docs, tokens and df.
  std::uint64_t fingerprint() const;

  // Appends the column of every in-vocabulary n-gram occurrence in `doc`.
  void collect_columns(std::string_view doc, std::vector<std::int32_t>& out) const;

 private:
  friend FeatureSpace fit_vocab(std::span<const std::string> corpus, int max_n);
  void build_index();
  std::int32_t child(std::int32_t node, char c) const;

  int max_n_ = 0;
  std::int64_t n_docs_ = 0;
  std::vector<std::string> tokens_;
  std::vector<std::int64_t> df_;
  std::vector<double> idf_;
  // Trie in CSR form. Node 0 is the root; node c + 1 is column c.
  std::vector<std::int32_t> edge_begin_;
  std::vector<char> edge_char_;
  std::vector<std::int32_t> edge_target_;
};

double idf_value(std::int64_t n_docs, std::int64_t df);

// Number of token positions N_d for a document of `length` characters.
std::int64_t token_positions(std::size_t length, int max_n);

// Throws Error(kEmptyCorpus) for an empty corpus, Error(kInvalidArgument)
// unless 1 <= max_n <= 12.
FeatureSpace fit_vocab(std::span<const std::string> corpus, int max_n);

// Out-of-vocabulary tokens still count toward N_d but contribute no entry; a
// document without in-vocabulary tokens yields the empty (zero) vector.
SparseVector tfidf_vector(std::string_view doc, const FeatureSpace& space);

}  // namespace namecraft::featurizer

#endif  // NAMECRAFT_CORE_FEATURIZER_HPP_
