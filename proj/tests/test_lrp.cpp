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
#include <string>
#include <vector>

#include "core/cnn.hpp"
#include "core/error.hpp"
#include "core/lrp.hpp"
#include "doctest.h"
#include "fd_check.hpp"

using namespace namecraft;
using namespace namecraft::lrp;

namespace {

double stab(double z, double eps) { return z + (z >= 0.0 ? eps : -eps); }

}  // namespace

TEST_CASE("char_relevance sums over the embedding") {
  RelevanceMap m;
  m.positions = 2;
  m.embed_dim = 2;
  m.r = {0.1, 0.2, 0.3, -0.1};
  const auto c = char_relevance(m);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == doctest::Approx(0.3));
  CHECK(c[1] == doctest::Approx(0.2));
}

TEST_CASE("epsilon rule on a 2x2 map") {
  const std::vector<double> a{1.0, 2.0}, w{1.0, 0.0, 1.0, 1.0}, b{0.5, 0.0}, rout{1.0, 1.0};
  double bias = 0.0;
  const auto r = epsilon_rule(a, w, b, rout, 0.0, &bias);
  CHECK(r[0] == doctest::Approx(1.0 / 3.5).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(2.0 / 3.5 + 1.0).epsilon(1e-14));
  CHECK(bias == doctest::Approx(0.5 / 3.5).epsilon(1e-14));
  CHECK(r[0] + r[1] + bias == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(epsilon_rule(a, std::vector<double>{1.0}, b, rout, 0.0), Error);
}

TEST_CASE("single-filter linear network matches the closed form") {
  // embed -> one width-w conv -> identity -> max pool -> output. The chain of
  // epsilon rules collapses to x * w_conv * v * y / (y + eps) * z / (z + eps) / y.
  oracle::Gen g(8);
  for (int t = 0; t < 50; ++t) {
    cnn::CnnConfig c;
    c.alphabet = "ABC{}";
    c.max_len = g.range(3, 6);
    c.embed_dim = g.range(1, 3);
    c.kernel_sizes = {g.range(1, 3)};
    c.filters = {1};
    c.dense_units = 0;
    c.activation = cnn::Activation::kIdentity;
    c.batch_norm = t % 2 == 0;
    auto m = cnn::init_model(c, {{0, "X"}, {1, "Y"}}, static_cast<std::uint64_t>(t));
    for (std::size_t i = static_cast<std::size_t>(c.embed_dim); i < m.params.size(); ++i) m.params[i] = g.normal();
    if (c.batch_norm) {
      m.running_mean[0] = 0.3 * g.normal();
      m.running_var[0] = g.uniform(0.5, 2.0);
    }
    const auto ids = harness::random_ids(g, c.max_len, m.layout.vocab);
    const int target = g.range(0, 1);
    const double eps = 1e-7;
    const auto map = lrp_relevance(m, ids, target, eps);

    cnn::ForwardCache fc;
    cnn::forward(m, ids, fc);
    const auto& l = m.layout;
    const auto& blk = l.convs[0];
    const auto E = static_cast<std::size_t>(l.embed_dim);
    const double v = m.params[l.out_w + static_cast<std::size_t>(target)];
    const double z = fc.logits[static_cast<std::size_t>(target)];
    const double pooled = fc.pooled[0];
    const double r_f = pooled * v * z / stab(z, eps);
    double scale = 1.0;
    if (c.batch_norm) scale = m.params[blk.gamma] / std::sqrt(m.running_var[0] + 1e-3);
    const auto t0 = static_cast<std::size_t>(fc.argmax[0]);
    std::vector<double> expect(static_cast<std::size_t>(c.max_len) * E, 0.0);
    for (std::size_t j = 0; j < static_cast<std::size_t>(blk.width); ++j) {
      for (std::size_t e = 0; e < E; ++e) {
        const double x = m.params[l.embedding + static_cast<std::size_t>(ids[t0 + j]) * E + e];
        expect[(t0 + j) * E + e] = x * scale * m.params[blk.weight + j * E + e] * r_f / stab(pooled, eps);
      }
    }
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(map.r[i] == doctest::Approx(expect[i]).epsilon(1e-9));
  }
}

TEST_CASE("relevance is conserved up to the absorbed biases") {
  oracle::Gen g(12);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto m = harness::tiny_model(g, t % 2 == 0, t % 3 == 0 ? cnn::Activation::kElu : cnn::Activation::kTanh,
                                       g.range(1, 3), t % 4 == 0 ? 0 : 3);
    const auto ids = harness::random_ids(g, m.layout.max_len, m.layout.vocab);
    const int target = g.range(0, static_cast<int>(m.num_classes()) - 1);
    const auto map = lrp_relevance(m, ids, target);
    CHECK(conserves(map));
    worst = std::max(worst, map.conservation_residual() / std::max(1.0, std::abs(map.logit)));

    // Pooling hands relevance only to the winning position.
    for (std::size_t b = 0; b < m.layout.convs.size(); ++b) {
      const auto& blk = m.layout.convs[b];
      const auto F = static_cast<std::size_t>(blk.filters);
      for (std::size_t f = 0; f < F; ++f) {
        const auto win = static_cast<std::size_t>(map.argmax[blk.pooled_offset + f]);
        for (std::size_t p = 0; p < static_cast<std::size_t>(m.layout.positions(blk)); ++p) {
          if (p != win) CHECK(map.conv_relevance[b][p * F + f] == 0.0);
        }
      }
    }
    // Padding carries no relevance.
    const auto chars = char_relevance(map);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (ids[p] == 0) CHECK(chars[p] == 0.0);
    }
  }
  MESSAGE("worst relative residual " << worst);
  CHECK(worst <= 1e-4);
}

TEST_CASE("bias-free network conserves exactly") {
  oracle::Gen g(13);
  for (int t = 0; t < 50; ++t) {
    auto m = harness::tiny_model(g, false, cnn::Activation::kTanh, 2, 0);
    for (const auto& b : m.layout.convs) {
      for (int f = 0; f < b.filters; ++f) m.params[b.bias + static_cast<std::size_t>(f)] = 0.0;
    }
    m.params[m.layout.out_b] = m.params[m.layout.out_b + 1] = 0.0;
    const auto ids = harness::random_ids(g, m.layout.max_len, m.layout.vocab);
    const auto map = lrp_relevance(m, ids, 1);
    CHECK(map.bias_absorbed == 0.0);
    CHECK(std::abs(map.total() - map.logit) <= 1e-5 * std::max(1.0, std::abs(map.logit)));
  }
}

TEST_CASE("bad target or length") {
  oracle::Gen g(1);
  const auto m = harness::tiny_model(g, false, cnn::Activation::kTanh, 2, 0);
  const auto ids = harness::random_ids(g, m.layout.max_len, m.layout.vocab);
  CHECK_THROWS_AS(lrp_relevance(m, ids, 2), Error);
  CHECK_THROWS_AS(lrp_relevance(m, std::vector<int>{1}, 0), Error);
}

TEST_CASE("n-gram report example") {
  const std::vector<std::string> names{"AB", "AB", "BA"};
  const std::vector<std::vector<double>> rel{{1, 2}, {3, 4}, {0.5, 0.5}};
  const auto uni = ngram_report(names, rel, 1, 1);
  REQUIRE(uni.rows.size() == 2);
  CHECK(uni.rows[0].ngram == "B");
  CHECK(uni.rows[0].mean_relevance == doctest::Approx(6.5 / 3));
  CHECK(uni.rows[1].mean_relevance == doctest::Approx(1.5));
  const auto bi = ngram_report(names, rel, 2, 2);
  REQUIRE(bi.rows.size() == 1);
  CHECK(bi.rows[0].ngram == "AB");
  CHECK(bi.rows[0].mean_relevance == doctest::Approx(5.0));
  CHECK(bi.rows[0].count == 2);
  CHECK(bi.to_csv() == "ngram,mean_relevance,count\nAB,5,2\n");
  // Ties keep n-gram order.
  const auto tie = ngram_report(std::vector<std::string>{"BA"}, std::vector<std::vector<double>>{{1, 1}}, 1, 1);
  CHECK(tie.rows[0].ngram == "A");
  CHECK_THROWS_AS(ngram_report(names, std::vector<std::vector<double>>{{1}}, 1, 1), Error);
}

TEST_CASE("positional profile example") {
  const std::vector<std::string> names{"{AB}{C}"};
  const std::vector<std::vector<double>> rel{{0, 1, -2, 0, 0, 3, 0}};
  const auto p = positional_profile(names, rel, 2);
  REQUIRE(p.rows.size() == 3);
  CHECK(p.rows[0].part == 1);
  CHECK(p.rows[0].bin == 0);
  CHECK(p.rows[0].mean_abs == 1.0);
  CHECK(p.rows[1].bin == 1);
  CHECK(p.rows[1].mean_abs == 2.0);
  CHECK(p.rows[2].part == 2);
  CHECK(p.rows[2].bin == 1);  // a one-letter part sits at 0.5
  CHECK(p.rows[2].mean_abs == 3.0);
  CHECK(p.rows[2].ci95 == 0.0);
  CHECK_THROWS_AS(positional_profile(names, rel, 1), Error);
}

TEST_CASE("heatmap markup") {
  const std::vector<double> r{1.0, -1.0, 0.0};
  const auto html = render_heatmap("{A}", r);
  CHECK(html.find("rgb(255,0,0)") != std::string::npos);
  CHECK(html.find("rgb(0,0,255)") != std::string::npos);
  CHECK(html.find("rgb(255,255,255)") != std::string::npos);
  std::size_t spans = 0;
  for (std::size_t p = html.find("<span"); p != std::string::npos; p = html.find("<span", p + 1)) ++spans;
  CHECK(spans == 3);
  CHECK(render_heatmap("<", std::vector<double>{0.0}).find("&lt;") != std::string::npos);
  CHECK_THROWS_AS(render_heatmap("AB", r), Error);
}
