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

#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "json.hpp"

namespace namecraft::eval {

namespace {

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

long ConfusionMatrix::classified() const {
  long s = 0;
  for (long c : counts) s += c;
  return s;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth, int k) {
  require(predicted.size() == truth.size(), ErrorCode::kLengthMismatch,
          "predictions and truth differ in length");
  require(k >= 1, ErrorCode::kInvalidArgument, "need at least one class");
  ConfusionMatrix cm;
  cm.k = k;
  cm.counts.assign(static_cast<std::size_t>(k * k), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < k, ErrorCode::kLabel, "true label out of range");
    const int p = predicted[i];
    if (p == kUnclassified) {
      ++cm.unclassified;
    } else if (p == kAmbiguous) {
      ++cm.ambiguous;
    } else {
      require(p >= 0 && p < k, ErrorCode::kLabel, "predicted label out of range");
      ++cm.counts[static_cast<std::size_t>(truth[i] * k + p)];
    }
  }
  return cm;
}

Metrics prf(const ConfusionMatrix& cm) {
  Metrics m;
  const int k = cm.k;
  m.per_class.resize(static_cast<std::size_t>(k));
  long correct = 0;
  for (int c = 0; c < k; ++c) {
    long col = 0, row = 0;
    for (int r = 0; r < k; ++r) {
      col += cm.at(r, c);
      row += cm.at(c, r);
    }
    auto& pc = m.per_class[static_cast<std::size_t>(c)];
    const long tp = cm.at(c, c);
    correct += tp;
    pc.support = row;
    pc.precision_undefined = col == 0;
    pc.recall_undefined = row == 0;
    pc.precision = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    pc.recall = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    const double denom = pc.precision + pc.recall;
    pc.f1 = denom > 0.0 ? 2.0 * pc.precision * pc.recall / denom : 0.0;
    m.macro_f1 += pc.f1;
    m.macro_recall += pc.recall;
  }
  m.macro_f1 /= k;
  m.macro_recall /= k;
  m.classified = cm.classified();
  m.n = cm.evaluated();
  m.accuracy = m.classified ? static_cast<double>(correct) / static_cast<double>(m.classified) : 0.0;
  m.coverage = m.n ? static_cast<double>(m.classified) / static_cast<double>(m.n) : 0.0;
  return m;
}

StandardErrors bootstrap_se(std::span<const int> predicted, std::span<const int> truth, int k,
                            int resamples, std::uint64_t seed) {
  require(resamples >= 100, ErrorCode::kInvalidArgument, "bootstrap needs at least 100 resamples");
  require(predicted.size() == truth.size(), ErrorCode::kLengthMismatch,
          "predictions and truth differ in length");
  const std::size_t n = truth.size();
  const auto ku = static_cast<std::size_t>(k);
  std::vector<std::vector<double>> prec(ku), rec(ku), f1(ku);
  std::vector<double> macro, acc, cov;
  std::vector<int> p(n), t(n);
  for (int b = 0; b < resamples && n > 0; ++b) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(b)));
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = rng.index(n);
      p[i] = predicted[j];
      t[i] = truth[j];
    }
    const Metrics m = prf(confusion(p, t, k));
    for (std::size_t c = 0; c < ku; ++c) {
      prec[c].push_back(m.per_class[c].precision);
      rec[c].push_back(m.per_class[c].recall);
      f1[c].push_back(m.per_class[c].f1);
    }
    macro.push_back(m.macro_f1);
    acc.push_back(m.accuracy);
    cov.push_back(m.coverage);
  }
  StandardErrors se;
  se.resamples = resamples;
  for (std::size_t c = 0; c < ku; ++c) {
    se.precision.push_back(sample_sd(prec[c]));
    se.recall.push_back(sample_sd(rec[c]));
    se.f1.push_back(sample_sd(f1[c]));
  }
  se.macro_f1 = sample_sd(macro);
  se.accuracy = sample_sd(acc);
  se.coverage = sample_sd(cov);
  return se;
}

double cohen_kappa(std::span<const int> a1, std::span<const int> a2) {
  require(a1.size() == a2.size(), ErrorCode::kLengthMismatch, "annotations differ in length");
  require(!a1.empty(), ErrorCode::kInvalidArgument, "no annotations");
  std::map<int, double> m1, m2;
  double agree = 0.0;
  for (std::size_t i = 0; i < a1.size(); ++i) {
    m1[a1[i]] += 1.0;
    m2[a2[i]] += 1.0;
    if (a1[i] == a2[i]) agree += 1.0;
  }
  const double n = static_cast<double>(a1.size());
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, c] : m1) {
    auto it = m2.find(label);
    if (it != m2.end()) pe += (c / n) * (it->second / n);
  }
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

CharProfile char_frequency_profile(const corpus::Dataset& ds) {
  const std::size_t k = ds.num_classes();
  std::vector<std::array<double, 26>> counts(k);
  std::vector<double> letters(k, 0.0);
  for (auto& row : counts) row.fill(0.0);
  for (const auto& rec : ds.records) {
    require(rec.label.has_value(), ErrorCode::kLabel, "character statistics need labeled records");
    const auto y = static_cast<std::size_t>(*rec.label);
    for (char c : rec.primary_name) {
      if (c >= 'A' && c <= 'Z') {
        counts[y][static_cast<std::size_t>(c - 'A')] += 1.0;
        letters[y] += 1.0;
      }
    }
  }
  CharProfile prof;
  prof.classes = ds.classes;
  prof.frequency.resize(k);
  // Both means share the class's record count, so the ratio of means is the
  // ratio of totals.
  for (std::size_t y = 0; y < k; ++y) {
    require(letters[y] > 0.0, ErrorCode::kEmptyClass, "class " + ds.classes[y].name + " has no names");
    for (std::size_t c = 0; c < 26; ++c) prof.frequency[y][c] = counts[y][c] / letters[y];
  }
  return prof;
}

std::string CharProfile::to_csv() const {
  std::string out = "class";
  for (char c = 'A'; c <= 'Z'; ++c) {
    out += ',';
    out += c;
  }
  out += '\n';
  for (std::size_t y = 0; y < classes.size(); ++y) {
    out += classes[y].name;
    for (double v : frequency[y]) {
      char buf[40];
      std::snprintf(buf, sizeof buf, ",%.10g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

MetricsReport evaluate(std::span<const int> predicted, std::span<const int> truth,
                       const std::vector<corpus::ClassLabel>& classes, const std::string& split,
                       int resamples, std::uint64_t seed) {
  MetricsReport r;
  r.split = split;
  r.classes = classes;
  r.confusion = confusion(predicted, truth, static_cast<int>(classes.size()));
  r.metrics = prf(r.confusion);
  r.se = bootstrap_se(predicted, truth, static_cast<int>(classes.size()), resamples, seed);
  return r;
}

std::string MetricsReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["split"] = split;
  j["n"] = metrics.n;
  j["classified"] = metrics.classified;
  j["coverage"] = metrics.coverage;
  j["accuracy"] = metrics.accuracy;
  j["macro_f1"] = metrics.macro_f1;
  j["macro_recall"] = metrics.macro_recall;
  ordered_json per = ordered_json::array();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& pc = metrics.per_class[c];
    ordered_json e;
    e["class"] = classes[c].name;
    e["precision"] = pc.precision;
    e["recall"] = pc.recall;
    e["f1"] = pc.f1;
    e["support"] = pc.support;
    e["precision_undefined"] = pc.precision_undefined;
    e["se_precision"] = se.precision.empty() ? 0.0 : se.precision[c];
    e["se_recall"] = se.recall.empty() ? 0.0 : se.recall[c];
    e["se_f1"] = se.f1.empty() ? 0.0 : se.f1[c];
    per.push_back(e);
  }
  j["per_class"] = per;
  j["se_macro_f1"] = se.macro_f1;
  j["se_accuracy"] = se.accuracy;
  j["bootstrap_resamples"] = se.resamples;
  ordered_json cm = ordered_json::array();
  for (int t = 0; t < confusion.k; ++t) {
    ordered_json row = ordered_json::array();
    for (int p = 0; p < confusion.k; ++p) row.push_back(confusion.at(t, p));
    cm.push_back(row);
  }
  j["confusion"] = cm;
  j["unclassified"] = confusion.unclassified;
  j["ambiguous"] = confusion.ambiguous;
  return j.dump(2);
}

std::string MetricsReport::to_table() const {
  std::size_t width = 9;
  for (const auto& c : classes) width = std::max(width, c.name.size());
  auto pad = [&](const std::string& s) { return s + std::string(width + 2 - s.size(), ' '); };
  auto cell = [](double v, double e) { return fixed(v, 4) + " (" + fixed(e, 4) + ")"; };
  std::string out = "[" + split + "]\n";
  out += pad("class") + "P                 R                 F1\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& pc = metrics.per_class[c];
    out += pad(classes[c].name) + cell(pc.precision, se.precision.empty() ? 0.0 : se.precision[c]) + "   " +
           cell(pc.recall, se.recall.empty() ? 0.0 : se.recall[c]) + "   " +
           cell(pc.f1, se.f1.empty() ? 0.0 : se.f1[c]) + (pc.precision_undefined ? "  *never predicted" : "") +
           "\n";
  }
  out += pad("macro-F1") + cell(metrics.macro_f1, se.macro_f1) + "\n";
  out += pad("accuracy") + cell(metrics.accuracy, se.accuracy) + "\n";
  out += "coverage = " + fixed(100.0 * metrics.coverage, 2) + "% of " + std::to_string(metrics.n) +
         " (unclassified " + std::to_string(confusion.unclassified) + ", ambiguous " +
         std::to_string(confusion.ambiguous) + ")\n";
  return out;
}

}  // namespace namecraft::eval
