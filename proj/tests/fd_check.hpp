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


// Central finite differences over the CNN loss, computed on the test side.

#ifndef NAMECRAFT_TESTS_FD_CHECK_HPP_
#define NAMECRAFT_TESTS_FD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/cnn.hpp"
#include "core/cnn_internal.hpp"
#include "oracles.hpp"

namespace harness {

struct FdResult {
  double max_rel = 0.0;
  int checked = 0;
  int skipped = 0;
};

// Relative error |a - n| / max(|a|, |n|) over up to `max_params` randomly
// chosen parameters; pairs below 1e-8 in magnitude are skipped, as are
// perturbations that move a max-pool winner (the loss is not smooth there).
inline FdResult fd_check(const namecraft::cnn::CnnModel& model, const std::vector<std::vector<int>>& ids,
                         const std::vector<int>& labels, bool batch_stats, double h, int max_params,
                         oracle::Gen& g) {
  using namespace namecraft::cnn;
  detail::PassOptions opt;
  opt.batch_stats = batch_stats;
  std::vector<ForwardCache> caches;
  std::vector<double> grad;
  const auto base = detail::batch_pass(model, ids, labels, opt, caches, &grad);
  FdResult r;
  CnnModel probe = model;
  const std::size_t first = static_cast<std::size_t>(model.layout.embed_dim);  // padding row is pinned
  for (int t = 0; t < max_params; ++t) {
    const std::size_t p = first + static_cast<std::size_t>(g.range(0, static_cast<int>(model.params.size() - first) - 1));
    const double keep = probe.params[p];
    probe.params[p] = keep + h;
    const auto plus = detail::batch_pass(probe, ids, labels, opt, caches, nullptr);
    probe.params[p] = keep - h;
    const auto minus = detail::batch_pass(probe, ids, labels, opt, caches, nullptr);
    probe.params[p] = keep;
    if (plus.argmax_signature != base.argmax_signature || minus.argmax_signature != base.argmax_signature) {
      ++r.skipped;
      continue;
    }
    const double numeric = (plus.loss - minus.loss) / (2.0 * h);
    const double scale = std::max(std::abs(numeric), std::abs(grad[p]));
    if (scale < 1e-8) {
      ++r.skipped;
      continue;
    }
    r.max_rel = std::max(r.max_rel, std::abs(numeric - grad[p]) / scale);
    ++r.checked;
  }
  return r;
}

// A small randomly initialized model with non-trivial batch-norm state.
inline namecraft::cnn::CnnModel tiny_model(oracle::Gen& g, bool batch_norm, namecraft::cnn::Activation act,
                                           int classes, int dense_units) {
  using namespace namecraft::cnn;
  CnnConfig c;
  c.alphabet = "ABC{}";
  c.max_len = g.range(4, 7);
  c.embed_dim = g.range(2, 4);
  c.kernel_sizes = {1, g.range(2, 3)};
  c.filters = {g.range(1, 3), g.range(1, 3)};
  c.dense_units = dense_units;
  c.activation = act;
  c.batch_norm = batch_norm;
  c.dropout = 0.0;
  c.dropout_embed = 0.0;
  std::vector<namecraft::corpus::ClassLabel> cls;
  for (int k = 0; k < classes; ++k) cls.push_back({k, "K" + std::to_string(k)});
  auto m = init_model(c, cls, static_cast<std::uint64_t>(g.range(0, 1 << 30)));
  for (std::size_t i = static_cast<std::size_t>(c.embed_dim); i < m.params.size(); ++i) m.params[i] += 0.3 * g.normal();
  for (auto& v : m.running_mean) v = 0.2 * g.normal();
  for (auto& v : m.running_var) v = g.uniform(0.3, 2.0);
  return m;
}

inline std::vector<int> random_ids(oracle::Gen& g, int max_len, int vocab) {
  std::vector<int> ids(static_cast<std::size_t>(max_len), 0);
  const int len = g.range(1, max_len);
  for (int i = 0; i < len; ++i) ids[static_cast<std::size_t>(i)] = g.range(1, vocab - 1);
  return ids;
}

}  // namespace harness

#endif  // NAMECRAFT_TESTS_FD_CHECK_HPP_
