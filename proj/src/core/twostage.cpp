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

#include "core/twostage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/error.hpp"
#include "core/linear.hpp"

namespace namecraft::twostage {

namespace {

constexpr const char* kNames[kPoolSize] = {"p1",      "p2",      "log_p1",      "log_p2",     "p1_p2",
                                           "max_p",   "p1_log_p2", "p2_log_p1", "max_log_p"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const char* feature_name(int index) {
  require(index >= 0 && index < kPoolSize, ErrorCode::kInvalidArgument, "feature index out of range");
  return kNames[index];
}

FeatureMask full_mask() {
  FeatureMask m;
  m.fill(true);
  return m;
}

int active_count(const FeatureMask& mask) {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

std::vector<double> stage_features(double p1, double p2, const FeatureMask& mask) {
  const double c1 = std::clamp(p1, kLogClamp, 1.0);
  const double c2 = std::clamp(p2, kLogClamp, 1.0);
  const double l1 = std::log(c1);
  const double l2 = std::log(c2);
  const double all[kPoolSize] = {p1, p2, l1, l2, p1 * p2, std::max(p1, p2), p1 * l2, p2 * l1, std::max(l1, l2)};
  std::vector<double> out;
  for (int i = 0; i < kPoolSize; ++i) {
    if (mask[static_cast<std::size_t>(i)]) out.push_back(all[i]);
  }
  return out;
}

double StageTwoModel::score(double p1, double p2) const {
  const auto f = stage_features(p1, p2, mask);
  double s = bias;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights[i] * f[i];
  return s;
}

void StageTwoModel::validate() const {
  require(active_count(mask) >= 1, ErrorCode::kModelMismatch, "stage-2 mask selects no feature");
  require(weights.size() == static_cast<std::size_t>(active_count(mask)), ErrorCode::kModelMismatch,
          "stage-2 weight count differs from the active feature count");
  for (double w : weights) require(std::isfinite(w), ErrorCode::kModelMismatch, "non-finite stage-2 weight");
  require(std::isfinite(bias), ErrorCode::kModelMismatch, "non-finite stage-2 bias");
}

StageTwoModel train_stage2(std::span<const ProbPair> pairs, std::span<const int> labels, double c,
                           const FeatureMask& mask) {
  require(pairs.size() == labels.size(), ErrorCode::kLengthMismatch, "one label per probability pair");
  require(active_count(mask) >= 1, ErrorCode::kInvalidArgument, "feature mask is empty");
  std::size_t pos = 0;
  for (int y : labels) {
    require(y == 0 || y == 1, ErrorCode::kLabel, "stage-2 labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  require(pos > 0 && pos < labels.size(), ErrorCode::kInvalidArgument,
          "stage-2 training needs both classes");

  const std::size_t d = static_cast<std::size_t>(active_count(mask));
  std::vector<std::vector<double>> raw(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) raw[i] = stage_features(pairs[i].first, pairs[i].second, mask);

  // The pool mixes probabilities in [0, 1] with logs down to -20.7; fitting
  // on standardized columns keeps coordinate descent well conditioned.
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (const auto& f : raw) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += f[j];
  }
  for (auto& m : mean) m /= static_cast<double>(raw.size());
  for (const auto& f : raw) {
    for (std::size_t j = 0; j < d; ++j) scale[j] += (f[j] - mean[j]) * (f[j] - mean[j]);
  }
  for (auto& v : scale) {
    v = std::sqrt(v / static_cast<double>(raw.size()));
    if (!(v > 1e-12)) v = 1.0;  // constant column
  }

  std::vector<featurizer::SparseVector> x(pairs.size());
  std::vector<double> y(pairs.size()), cost(pairs.size());
  const double n = static_cast<double>(labels.size());
  const double w_pos = n / (2.0 * static_cast<double>(pos));
  const double w_neg = n / (2.0 * static_cast<double>(labels.size() - pos));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double v = (raw[i][j] - mean[j]) / scale[j];
      if (v != 0.0) x[i].entries.push_back({static_cast<std::int32_t>(j), v});
    }
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    cost[i] = c * (labels[i] == 1 ? w_pos : w_neg);
  }
  // Saturated pairs make the margin set nearly collinear; coordinate descent
  // crawls there, so the dense interior-point solver is used.
  linear::SolverOptions opt;
  opt.tolerance = 1e-9;
  opt.max_iterations = 200;
  const linear::BinaryProblem problem{x, y, cost, d};
  const auto fit = linear::fit_svm_dense(problem, opt);

  StageTwoModel m;
  m.mask = mask;
  m.weights.resize(d);
  m.importance.resize(d);
  m.bias = fit.b;
  for (std::size_t j = 0; j < d; ++j) {
    m.weights[j] = fit.w[j] / scale[j];
    m.bias -= fit.w[j] * mean[j] / scale[j];
    m.importance[j] = std::abs(fit.w[j]);
  }
  m.c = c;
  return m;
}

double binary_macro_recall(std::span<const int> predicted, std::span<const int> truth) {
  require(predicted.size() == truth.size(), ErrorCode::kLengthMismatch, "prediction/truth length mismatch");
  double hit[2] = {0, 0}, total[2] = {0, 0};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    total[t] += 1.0;
    if (predicted[i] == truth[i]) hit[t] += 1.0;
  }
  double sum = 0.0;
  for (int k = 0; k < 2; ++k) sum += total[k] > 0.0 ? hit[k] / total[k] : 0.0;
  return sum / 2.0;
}

RfeResult rfe_select(const FeatureMask& pool, std::span<const ProbPair> train_pairs,
                     std::span<const int> train_labels, std::span<const ProbPair> val_pairs,
                     std::span<const int> val_labels, double c) {
  require(active_count(pool) >= 1, ErrorCode::kInvalidArgument, "feature pool is empty");
  RfeResult res;
  FeatureMask mask = pool;
  std::vector<int> predicted(val_pairs.size());
  while (true) {
    const StageTwoModel m = train_stage2(train_pairs, train_labels, c, mask);
    for (std::size_t i = 0; i < val_pairs.size(); ++i) {
      predicted[i] = m.positive(val_pairs[i].first, val_pairs[i].second) ? 1 : 0;
    }
    res.path.push_back({mask, binary_macro_recall(predicted, val_labels)});
    if (active_count(mask) == 1) break;
    // Smallest standardized |w| goes; the first such feature in pool order on ties.
    int drop = -1;
    double smallest = 0.0;
    std::size_t w = 0;
    for (int i = 0; i < kPoolSize; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      const double a = m.importance[w++];
      if (drop < 0 || a < smallest) {
        drop = i;
        smallest = a;
      }
    }
    mask[static_cast<std::size_t>(drop)] = false;
  }
  // The path shrinks, so scanning forward with >= prefers fewer features.
  const RfeStep* best = &res.path.front();
  for (const auto& step : res.path) {
    if (step.val_macro_recall >= best->val_macro_recall) best = &step;
  }
  res.mask = best->mask;
  return res;
}

std::string export_boundary(const StageTwoModel& model, int resolution) {
  require(resolution >= 2, ErrorCode::kInvalidArgument, "grid resolution must be at least 2");
  std::string out = "p1,p2,score,class\n";
  const double step = 1.0 / (resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const double p1 = i * step;
      const double p2 = j * step;
      const double s = model.score(p1, p2);
      out += fmt(p1) + ',' + fmt(p2) + ',' + fmt(s) + ',' +
             (s > 0.0 ? model.positive_class : model.negative_class) + '\n';
    }
  }
  return out;
}

}  // namespace namecraft::twostage
