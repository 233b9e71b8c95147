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

#include "core/lrp.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>

#include "core/cnn_internal.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"

namespace namecraft::lrp {

namespace {

double stabilize(double z, double eps) { return z + (z >= 0.0 ? eps : -eps); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void check_lengths(std::span<const std::string> names, std::span<const std::vector<double>> rel) {
  require(names.size() == rel.size(), ErrorCode::kLengthMismatch, "one relevance vector per name");
  for (std::size_t i = 0; i < names.size(); ++i) {
    require(rel[i].size() == names[i].size(), ErrorCode::kLengthMismatch,
            "relevance length differs from name length for '" + names[i] + "'");
  }
}

}  // namespace

double RelevanceMap::total() const { return std::accumulate(r.begin(), r.end(), 0.0); }

std::vector<double> epsilon_rule(std::span<const double> a, std::span<const double> w,
                                 std::span<const double> bias, std::span<const double> relevance_out,
                                 double eps, double* bias_share) {
  const std::size_t in = a.size();
  const std::size_t out = relevance_out.size();
  require(w.size() == in * out, ErrorCode::kShapeMismatch, "weight shape does not match");
  require(bias.empty() || bias.size() == out, ErrorCode::kShapeMismatch, "bias shape does not match");
  std::vector<double> z(out, 0.0);
  for (std::size_t j = 0; j < out; ++j) z[j] = bias.empty() ? 0.0 : bias[j];
  for (std::size_t i = 0; i < in; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < out; ++j) z[j] += a[i] * w[i * out + j];
  }
  std::vector<double> ratio(out);
  for (std::size_t j = 0; j < out; ++j) {
    ratio[j] = relevance_out[j] / stabilize(z[j], eps);
    if (bias_share && !bias.empty()) *bias_share += bias[j] * ratio[j];
  }
  std::vector<double> r(in, 0.0);
  for (std::size_t i = 0; i < in; ++i) {
    if (a[i] == 0.0) continue;
    double acc = 0.0;
    for (std::size_t j = 0; j < out; ++j) acc += w[i * out + j] * ratio[j];
    r[i] = a[i] * acc;
  }
  return r;
}

RelevanceMap lrp_relevance(const cnn::CnnModel& model, std::span<const int> ids, int target_class,
                           double eps) {
  const cnn::Layout& l = model.layout;
  require(target_class >= 0 && target_class < l.num_classes, ErrorCode::kModelMismatch,
          "target class out of range");
  require(static_cast<int>(ids.size()) == l.max_len, ErrorCode::kModelMismatch,
          "input length does not match the model");
  cnn::ForwardCache c;
  cnn::forward(model, ids, c);
  const double* P = model.params.data();
  const auto K = static_cast<std::size_t>(l.num_classes);
  const auto k = static_cast<std::size_t>(target_class);

  RelevanceMap map;
  map.target_class = target_class;
  map.logit = c.logits[k];
  map.positions = l.max_len;
  map.embed_dim = l.embed_dim;
  map.argmax = c.argmax;

  // Output layer, target column only.
  const std::vector<double>& out_in = l.dense_units > 0 ? c.hidden : c.pooled;
  const auto O = out_in.size();
  std::vector<double> w_col(O);
  for (std::size_t o = 0; o < O; ++o) w_col[o] = P[l.out_w + o * K + k];
  const double b_out = P[l.out_b + k];
  std::vector<double> r_out_in =
      epsilon_rule(out_in, w_col, std::span<const double>(&b_out, 1),
                   std::span<const double>(&map.logit, 1), eps, &map.bias_absorbed);

  // Dense layer; the sigmoid passes relevance through.
  std::vector<double> r_pooled;
  if (l.dense_units > 0) {
    const auto H = static_cast<std::size_t>(l.dense_units);
    r_pooled = epsilon_rule(c.pooled, std::span<const double>(P + l.dense_w, static_cast<std::size_t>(l.pooled) * H),
                            std::span<const double>(P + l.dense_b, H), r_out_in, eps, &map.bias_absorbed);
  } else {
    r_pooled = std::move(r_out_in);
  }

  // Pooling routes to the winner; conv (with folded batch-norm) spreads it
  // over the receptive field.
  const auto E = static_cast<std::size_t>(l.embed_dim);
  map.r.assign(static_cast<std::size_t>(l.max_len) * E, 0.0);
  map.conv_relevance.resize(l.convs.size());
  for (std::size_t b = 0; b < l.convs.size(); ++b) {
    const cnn::ConvBlock& blk = l.convs[b];
    const auto F = static_cast<std::size_t>(blk.filters);
    const auto T = static_cast<std::size_t>(l.positions(blk));
    auto& rc = map.conv_relevance[b];
    rc.assign(T * F, 0.0);
    for (std::size_t f = 0; f < F; ++f) {
      const std::size_t col = blk.pooled_offset + f;
      const auto t = static_cast<std::size_t>(c.argmax[col]);
      const double rf = r_pooled[col];
      rc[t * F + f] = rf;
      if (rf == 0.0) continue;
      double scale = 1.0, shift = 0.0;
      if (model.config.batch_norm) {
        scale = P[blk.gamma + f] / std::sqrt(model.running_var[col] + cnn::detail::kBnEpsilon);
        shift = P[blk.beta + f] - model.running_mean[col] * scale;
      }
      const double y = c.y[b][t * F + f];
      const double ratio = rf / stabilize(y, eps);
      map.bias_absorbed += (scale * P[blk.bias + f] + shift) * ratio;
      for (std::size_t j = 0; j < static_cast<std::size_t>(blk.width); ++j) {
        for (std::size_t e = 0; e < E; ++e) {
          const double xv = c.x[(t + j) * E + e];
          if (xv == 0.0) continue;
          map.r[(t + j) * E + e] += xv * scale * P[blk.weight + (j * E + e) * F + f] * ratio;
        }
      }
    }
  }
  return map;
}

std::vector<double> char_relevance(const RelevanceMap& map) {
  std::vector<double> out(static_cast<std::size_t>(map.positions), 0.0);
  const auto E = static_cast<std::size_t>(map.embed_dim);
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (std::size_t e = 0; e < E; ++e) out[t] += map.r[t * E + e];
  }
  return out;
}

bool conserves(const RelevanceMap& map) {
  return map.conservation_residual() <= std::max(1e-6, 1e-2 * std::abs(map.logit));
}

NgramReport ngram_report(std::span<const std::string> names,
                         std::span<const std::vector<double>> relevances, int n, long min_count) {
  require(n >= 1, ErrorCode::kInvalidArgument, "n must be positive");
  check_lengths(names, relevances);
  struct Acc {
    double sum = 0.0;
    long count = 0;
  };
  std::map<std::string, Acc> acc;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& s = names[i];
    for (std::size_t p = 0; p + un <= s.size(); ++p) {
      double r = 0.0;
      for (std::size_t q = p; q < p + un; ++q) r += relevances[i][q];
      auto& a = acc[s.substr(p, un)];
      a.sum += r;
      ++a.count;
    }
  }
  NgramReport rep;
  rep.n = n;
  rep.min_count = min_count;
  for (const auto& [gram, a] : acc) {
    if (a.count >= min_count) rep.rows.push_back({gram, a.sum / static_cast<double>(a.count), a.count});
  }
  std::stable_sort(rep.rows.begin(), rep.rows.end(), [](const NgramStat& x, const NgramStat& y) {
    return x.mean_relevance > y.mean_relevance;
  });
  return rep;
}

std::string NgramReport::to_csv() const {
  std::string out = "ngram,mean_relevance,count\n";
  for (const auto& r : rows) {
    out += csv_escape(r.ngram) + ',' + fmt(r.mean_relevance) + ',' + std::to_string(r.count) + '\n';
  }
  return out;
}

PositionalProfile positional_profile(std::span<const std::string> names,
                                     std::span<const std::vector<double>> relevances, int bins,
                                     const corpus::PreprocessConfig& cfg) {
  require(bins >= 2, ErrorCode::kInvalidArgument, "bins must be at least 2");
  check_lengths(names, relevances);
  struct Acc {
    double sum = 0.0;
    double sumsq = 0.0;
    long count = 0;
  };
  std::map<std::pair<int, int>, Acc> acc;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& s = names[i];
    int part = 0;
    for (std::size_t p = 0; p < s.size(); ++p) {
      if (s[p] != cfg.part_open) continue;
      ++part;
      std::size_t end = p + 1;
      while (end < s.size() && s[end] != cfg.part_close && !cfg.is_marker(s[end])) ++end;
      const std::size_t len = end - (p + 1);
      for (std::size_t q = 0; q < len; ++q) {
        const double pos = len == 1 ? 0.5 : static_cast<double>(q) / static_cast<double>(len - 1);
        const int bin = std::min(static_cast<int>(pos * bins), bins - 1);
        const double v = std::abs(relevances[i][p + 1 + q]);
        auto& a = acc[{part, bin}];
        a.sum += v;
        a.sumsq += v * v;
        ++a.count;
      }
      p = end;
    }
  }
  PositionalProfile prof;
  prof.bins = bins;
  for (const auto& [key, a] : acc) {
    ProfileBin row;
    row.part = key.first;
    row.bin = key.second;
    row.lo = static_cast<double>(key.second) / bins;
    row.hi = static_cast<double>(key.second + 1) / bins;
    row.count = a.count;
    row.mean_abs = a.sum / static_cast<double>(a.count);
    if (a.count > 1) {
      const double var = std::max(0.0, (a.sumsq - a.count * row.mean_abs * row.mean_abs) / (a.count - 1));
      row.ci95 = 1.96 * std::sqrt(var / static_cast<double>(a.count));
    }
    prof.rows.push_back(row);
  }
  return prof;
}

std::string PositionalProfile::to_csv() const {
  std::string out = "part,bin,bin_start,bin_end,mean_abs_relevance,count,ci95\n";
  for (const auto& r : rows) {
    out += std::to_string(r.part) + ',' + std::to_string(r.bin) + ',' + fmt(r.lo) + ',' + fmt(r.hi) + ',' +
           fmt(r.mean_abs) + ',' + std::to_string(r.count) + ',' + fmt(r.ci95) + '\n';
  }
  return out;
}

std::string render_heatmap(std::string_view name, std::span<const double> relevances) {
  require(name.size() == relevances.size(), ErrorCode::kLengthMismatch,
          "heatmap needs one relevance per character");
  double top = 0.0;
  for (double r : relevances) top = std::max(top, std::abs(r));
  auto escape = [](char ch) -> std::string {
    switch (ch) {
      case '&': return "&amp;";
      case '<': return "&lt;";
      case '>': return "&gt;";
      case '"': return "&quot;";
      default: return std::string(1, ch);
    }
  };
  std::string title;
  for (char ch : name) title += escape(ch);
  std::string html =
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>" + title +
      "</title>\n</head>\n<body>\n<div style=\"font-family:monospace;font-size:24px\">";
  for (std::size_t i = 0; i < name.size(); ++i) {
    const double r = relevances[i];
    double alpha = top > 0.0 ? std::abs(r) / top : 0.0;
    alpha = std::round(alpha * 1000.0) / 1000.0;
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - alpha)));
    int red = 255, green = 255, blue = 255;
    if (r > 0.0) {
      green = blue = fade;
    } else if (r < 0.0) {
      red = green = fade;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "<span style=\"background-color:rgb(%d,%d,%d)\" title=\"%s\">", red,
                  green, blue, fmt(r).c_str());
    html += buf;
    html += escape(name[i]);
    html += "</span>";
  }
  html += "</div>\n</body>\n</html>\n";
  return html;
}

}  // namespace namecraft::lrp
