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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/cnn.hpp"
#include "core/cnn_internal.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace namecraft::cnn {

namespace {

void fill_uniform(std::vector<double>& p, std::size_t offset, std::size_t n, double limit, Rng& rng) {
  for (std::size_t i = 0; i < n; ++i) p[offset + i] = rng.uniform(-limit, limit);
}

double init_limit(Init init, double fan_in, double fan_out) {
  return init == Init::kHeUniform ? std::sqrt(6.0 / fan_in) : std::sqrt(6.0 / (fan_in + fan_out));
}

// Nadam with the momentum warm-up schedule of Dozat (2016):
// mu_t = beta1 * (1 - 0.5 * 0.96^(t * 0.004)).
class Nadam {
 public:
  explicit Nadam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    ++t_;
    const double t = static_cast<double>(t_);
    const double mu_t = kBeta1 * (1.0 - 0.5 * std::pow(0.96, t * kScheduleDecay));
    const double mu_next = kBeta1 * (1.0 - 0.5 * std::pow(0.96, (t + 1.0) * kScheduleDecay));
    const double schedule_new = schedule_ * mu_t;
    const double schedule_next = schedule_new * mu_next;
    schedule_ = schedule_new;
    const double v_corr = 1.0 - std::pow(kBeta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i];
      if (g == 0.0 && m_[i] == 0.0 && v_[i] == 0.0) continue;
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g * g;
      const double g_hat = g / (1.0 - schedule_new);
      const double m_hat = m_[i] / (1.0 - schedule_next);
      const double v_hat = v_[i] / v_corr;
      const double m_bar = (1.0 - mu_t) * g_hat + mu_next * m_hat;
      params[i] -= lr * m_bar / (std::sqrt(v_hat) + kEpsilon);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;
  static constexpr double kScheduleDecay = 0.004;
  std::vector<double> m_, v_;
  double schedule_ = 1.0;
  long t_ = 0;
};

double mean_loss(const CnnModel& model, const std::vector<std::vector<int>>& ids,
                 std::span<const int> labels) {
  ForwardCache cache;
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    forward(model, ids[i], cache);
    total += example_loss(cache.logits, labels[i], 1.0);
  }
  return total / static_cast<double>(ids.size());
}

}  // namespace

CnnModel init_model(const CnnConfig& config, std::vector<corpus::ClassLabel> classes,
                    std::uint64_t seed) {
  CnnModel m = CnnModel::zeros(config, std::move(classes));
  const Layout& l = m.layout;
  Rng rng(seed);
  const auto E = static_cast<std::size_t>(l.embed_dim);
  // Row 0 stays zero.
  fill_uniform(m.params, l.embedding + E, (static_cast<std::size_t>(l.vocab) - 1) * E, 0.05, rng);
  for (const auto& b : l.convs) {
    const double fan_in = static_cast<double>(b.width) * static_cast<double>(l.embed_dim);
    const double fan_out = static_cast<double>(b.width) * static_cast<double>(b.filters);
    fill_uniform(m.params, b.weight, static_cast<std::size_t>(b.width) * E * static_cast<std::size_t>(b.filters),
                 init_limit(config.init, fan_in, fan_out), rng);
    if (config.batch_norm) {
      std::fill_n(m.params.begin() + static_cast<std::ptrdiff_t>(b.gamma), b.filters, 1.0);
    }
  }
  if (l.dense_units > 0) {
    fill_uniform(m.params, l.dense_w, static_cast<std::size_t>(l.pooled) * static_cast<std::size_t>(l.dense_units),
                 init_limit(config.init, l.pooled, l.dense_units), rng);
  }
  fill_uniform(m.params, l.out_w, static_cast<std::size_t>(l.out_in) * static_cast<std::size_t>(l.num_classes),
               init_limit(Init::kGlorotUniform, l.out_in, l.num_classes), rng);
  return m;
}

CnnTrainResult train_cnn(const CnnConfig& config_in, const std::vector<corpus::ClassLabel>& classes,
                         std::span<const std::string> train_names, std::span<const int> train_labels,
                         std::span<const std::string> val_names, std::span<const int> val_labels,
                         std::span<const double> class_weights, std::uint64_t seed) {
  require(!train_names.empty(), ErrorCode::kEmptyDataset, "empty training set");
  require(!val_names.empty(), ErrorCode::kEmptyDataset, "empty validation set");
  require(train_names.size() == train_labels.size() && val_names.size() == val_labels.size(),
          ErrorCode::kShapeMismatch, "names and labels differ in length");
  require(class_weights.size() == classes.size(), ErrorCode::kShapeMismatch,
          "one class weight per class");
  const int K = static_cast<int>(classes.size());
  for (int y : train_labels) require(y >= 0 && y < K, ErrorCode::kLabel, "label out of range");
  for (int y : val_labels) require(y >= 0 && y < K, ErrorCode::kLabel, "label out of range");

  CnnConfig config = config_in;
  if (config.max_len <= 0) {
    std::size_t longest = 0;
    for (const auto& n : train_names) longest = std::max(longest, n.size());
    config.max_len = static_cast<int>(longest) + 2;
  }
  config.validate();

  std::vector<std::vector<int>> train_ids, val_ids;
  train_ids.reserve(train_names.size());
  for (const auto& n : train_names) train_ids.push_back(encode(n, config.alphabet, config.max_len));
  for (const auto& n : val_names) {
    val_ids.push_back(encode_truncating(n, config.alphabet, config.max_len, nullptr));
  }
  std::vector<double> example_weight(train_labels.size());
  for (std::size_t i = 0; i < train_labels.size(); ++i) {
    example_weight[i] = class_weights[static_cast<std::size_t>(train_labels[i])];
  }

  CnnModel model = init_model(config, classes, mix_seed(seed, 0));
  Rng rng(mix_seed(seed, 1));
  Nadam opt(model.params.size());

  CnnTrainResult result;
  result.model = model;
  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  int wait = 0;

  const std::size_t n = train_ids.size();
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<int>> batch_ids;
  std::vector<int> batch_labels;
  std::vector<double> batch_weights, grad;
  std::vector<ForwardCache> caches;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      batch_ids.clear();
      batch_labels.clear();
      batch_weights.clear();
      for (std::size_t k = start; k < stop; ++k) {
        batch_ids.push_back(train_ids[order[k]]);
        batch_labels.push_back(train_labels[order[k]]);
        batch_weights.push_back(example_weight[order[k]]);
      }
      detail::PassOptions po;
      po.batch_stats = true;
      po.dropout_rng = &rng;
      po.weights = batch_weights;
      auto pass = detail::batch_pass(model, batch_ids, batch_labels, po, caches, &grad);
      if (!std::isfinite(pass.loss)) {
        fail(ErrorCode::kDiverged, "training loss became non-finite in epoch " + std::to_string(epoch));
      }
      epoch_loss += pass.loss * static_cast<double>(stop - start);
      if (config.batch_norm) {
        // Moving variance uses the unbiased batch estimate.
        const std::size_t nb = stop - start;
        for (const auto& blk : model.layout.convs) {
          const double count = static_cast<double>(nb) * model.layout.positions(blk);
          const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
          for (int f = 0; f < blk.filters; ++f) {
            const std::size_t col = blk.pooled_offset + static_cast<std::size_t>(f);
            model.running_mean[col] = detail::kBnMomentum * model.running_mean[col] +
                                      (1.0 - detail::kBnMomentum) * pass.batch_mean[col];
            model.running_var[col] = detail::kBnMomentum * model.running_var[col] +
                                     (1.0 - detail::kBnMomentum) * pass.batch_var[col] * unbias;
          }
        }
      }
      opt.step(model.params, grad, lr);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(n);
    rec.val_loss = mean_loss(model, val_ids, val_labels);
    rec.learning_rate = lr;
    if (!std::isfinite(rec.val_loss)) {
      fail(ErrorCode::kDiverged, "validation loss became non-finite in epoch " + std::to_string(epoch));
    }
    if (rec.val_loss < best) {
      best = rec.val_loss;
      wait = 0;
      rec.checkpoint = true;
      result.model = model;
    } else if (++wait >= config.patience) {
      if (lr > config.min_learning_rate) lr = std::max(lr * config.plateau_factor, config.min_learning_rate);
      wait = 0;
    }
    result.history.epochs.push_back(rec);
  }
  return result;
}

}  // namespace namecraft::cnn
