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

#include "core/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "core/error.hpp"

namespace namecraft::featurizer {

namespace {

constexpr int kMaxNgram = 12;

void check_max_n(int max_n) {
  require(max_n >= 1 && max_n <= kMaxNgram, ErrorCode::kInvalidArgument,
          "max_n must be in [1, 12], got " + std::to_string(max_n));
}

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
  }
};

}  // namespace

double idf_value(std::int64_t n_docs, std::int64_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

std::int64_t token_positions(std::size_t length, int max_n) {
  std::int64_t total = 0;
  const auto len = static_cast<std::int64_t>(length);
  for (int n = 1; n <= max_n; ++n) total += std::max<std::int64_t>(0, len - n + 1);
  return total;
}

FeatureSpace FeatureSpace::from_parts(int max_n, std::int64_t n_docs, std::vector<std::string> tokens,
                                      std::vector<std::int64_t> df) {
  check_max_n(max_n);
  require(tokens.size() == df.size(), ErrorCode::kDimensionMismatch, "token/df length mismatch");
  require(n_docs >= 1, ErrorCode::kInvalidArgument, "n_docs must be positive");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    require(!tokens[i].empty() && static_cast<int>(tokens[i].size()) <= max_n,
            ErrorCode::kModelMismatch, "token length outside 1..max_n");
    require(i == 0 || tokens[i - 1] < tokens[i], ErrorCode::kModelMismatch,
            "tokens must be sorted and unique");
    require(df[i] >= 1 && df[i] <= n_docs, ErrorCode::kModelMismatch, "df outside [1, n_docs]");
  }
  FeatureSpace fs;
  fs.max_n_ = max_n;
  fs.n_docs_ = n_docs;
  fs.tokens_ = std::move(tokens);
  fs.df_ = std::move(df);
  fs.build_index();
  return fs;
}

void FeatureSpace::build_index() {
  const std::size_t v = tokens_.size();
  idf_.resize(v);
  for (std::size_t c = 0; c < v; ++c) idf_[c] = idf_value(n_docs_, df_[c]);

  std::unordered_map<std::string_view, std::int32_t> lookup;
  lookup.reserve(v);
  for (std::size_t c = 0; c < v; ++c) lookup.emplace(tokens_[c], static_cast<std::int32_t>(c));

  // Parent node of each token; tokens are sorted, so siblings appear in
  // character order and a stable bucket pass keeps them that way.
  std::vector<std::int32_t> parent(v);
  std::vector<std::int32_t> count(v + 2, 0);
  for (std::size_t c = 0; c < v; ++c) {
    const std::string& t = tokens_[c];
    if (t.size() == 1) {
      parent[c] = 0;
    } else {
      const auto it = lookup.find(std::string_view(t).substr(0, t.size() - 1));
      require(it != lookup.end(), ErrorCode::kModelMismatch, "token set is not prefix-closed");
      parent[c] = it->second + 1;
    }
    ++count[static_cast<std::size_t>(parent[c]) + 1];
  }
  edge_begin_.assign(v + 2, 0);
  for (std::size_t i = 1; i < v + 2; ++i) edge_begin_[i] = edge_begin_[i - 1] + count[i];
  edge_char_.assign(v, 0);
  edge_target_.assign(v, 0);
  std::vector<std::int32_t> fill(edge_begin_.begin(), edge_begin_.end() - 1);
  for (std::size_t c = 0; c < v; ++c) {
    const auto slot = static_cast<std::size_t>(fill[static_cast<std::size_t>(parent[c])]++);
    edge_char_[slot] = tokens_[c].back();
    edge_target_[slot] = static_cast<std::int32_t>(c) + 1;
  }
}

std::int32_t FeatureSpace::child(std::int32_t node, char c) const {
  const auto begin = static_cast<std::size_t>(edge_begin_[static_cast<std::size_t>(node)]);
  const auto end = static_cast<std::size_t>(edge_begin_[static_cast<std::size_t>(node) + 1]);
  for (std::size_t e = begin; e < end; ++e) {
    if (edge_char_[e] == c) return edge_target_[e];
  }
  return -1;
}

std::optional<std::int32_t> FeatureSpace::column(std::string_view token) const {
  if (token.empty() || edge_begin_.empty()) return std::nullopt;
  std::int32_t node = 0;
  for (char c : token) {
    node = child(node, c);
    if (node < 0) return std::nullopt;
  }
  return node - 1;
}

void FeatureSpace::collect_columns(std::string_view doc, std::vector<std::int32_t>& out) const {
  if (edge_begin_.empty()) return;
  const std::size_t len = doc.size();
  for (std::size_t i = 0; i < len; ++i) {
    std::int32_t node = 0;
    const std::size_t stop = std::min(len, i + static_cast<std::size_t>(max_n_));
    for (std::size_t j = i; j < stop; ++j) {
      node = child(node, doc[j]);
      // Prefix-closed vocabulary: no longer n-gram from i can be known.
      if (node < 0) break;
      out.push_back(node - 1);
    }
  }
}

std::uint64_t FeatureSpace::fingerprint() const {
  Fnv f;
  f.u64(static_cast<std::uint64_t>(max_n_));
  f.u64(static_cast<std::uint64_t>(n_docs_));
  f.u64(tokens_.size());
  for (std::size_t c = 0; c < tokens_.size(); ++c) {
    f.u64(tokens_[c].size());
    f.bytes(tokens_[c].data(), tokens_[c].size());
    f.u64(static_cast<std::uint64_t>(df_[c]));
  }
  return f.h;
}

FeatureSpace fit_vocab(std::span<const std::string> corpus, int max_n) {
  check_max_n(max_n);
  require(!corpus.empty(), ErrorCode::kEmptyCorpus, "cannot fit a vocabulary on an empty corpus");

  std::unordered_map<std::string, std::int64_t> df;
  std::vector<std::string_view> grams;
  for (const auto& doc : corpus) {
    grams.clear();
    const std::string_view d(doc);
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (int n = 1; n <= max_n && i + static_cast<std::size_t>(n) <= d.size(); ++n) {
        grams.push_back(d.substr(i, static_cast<std::size_t>(n)));
      }
    }
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto g : grams) ++df[std::string(g)];
  }

  std::vector<std::string> tokens;
  tokens.reserve(df.size());
  for (const auto& kv : df) tokens.push_back(kv.first);
  std::sort(tokens.begin(), tokens.end());

  FeatureSpace fs;
  fs.max_n_ = max_n;
  fs.n_docs_ = static_cast<std::int64_t>(corpus.size());
  fs.df_.reserve(tokens.size());
  for (const auto& t : tokens) fs.df_.push_back(df[t]);
  fs.tokens_ = std::move(tokens);
  fs.build_index();
  return fs;
}

SparseVector tfidf_vector(std::string_view doc, const FeatureSpace& space) {
  thread_local std::vector<std::int32_t> columns;
  columns.clear();
  space.collect_columns(doc, columns);
  SparseVector v;
  if (columns.empty()) return v;
  std::sort(columns.begin(), columns.end());

  const double n_d = static_cast<double>(token_positions(doc.size(), space.max_n()));
  const auto& idf = space.idf();
  double norm2 = 0.0;
  for (std::size_t i = 0; i < columns.size();) {
    std::size_t j = i;
    while (j < columns.size() && columns[j] == columns[i]) ++j;
    const double value = (static_cast<double>(j - i) / n_d) * idf[static_cast<std::size_t>(columns[i])];
    v.entries.push_back({columns[i], value});
    norm2 += value * value;
    i = j;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& e : v.entries) e.value *= inv;
  return v;
}

}  // namespace namecraft::featurizer
