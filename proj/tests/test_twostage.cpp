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
#include <sstream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/twostage.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace namecraft;
using namespace namecraft::twostage;

namespace {

struct Grid {
  std::vector<ProbPair> pairs;
  std::vector<int> labels;
};

// 41 x 41 grid without the p = 0.5 lines; OR of the two thresholds.
Grid or_grid() {
  Grid g;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      if (i == 20 || j == 20) continue;
      const double p1 = i / 40.0, p2 = j / 40.0;
      g.pairs.push_back({p1, p2});
      g.labels.push_back(p1 > 0.5 || p2 > 0.5 ? 1 : 0);
    }
  }
  return g;
}

}  // namespace

TEST_CASE("feature pool examples") {
  auto f = stage_features(1.0, 1.0);
  const std::vector<double> ones{1, 1, 0, 0, 1, 1, 0, 0, 0};
  CHECK(f == ones);
  f = stage_features(0.5, 0.5);
  CHECK(f[4] == 0.25);
  CHECK(f[2] == doctest::Approx(-0.6931471805599453).epsilon(1e-15));
  CHECK(f[6] == doctest::Approx(-0.34657359027997264).epsilon(1e-15));
  CHECK(f[8] == f[2]);
  // Zero is clamped before the log.
  f = stage_features(0.0, 0.2);
  CHECK(f[2] == doctest::Approx(std::log(1e-9)));
  CHECK(f[7] == doctest::Approx(0.2 * std::log(1e-9)));
  FeatureMask m{};
  m[1] = m[4] = true;
  CHECK(stage_features(0.3, 0.4, m) == std::vector<double>{0.4, 0.3 * 0.4});
  CHECK(std::string(feature_name(6)) == "p1_log_p2");
  CHECK_THROWS_AS(feature_name(9), Error);
}

TEST_CASE("OR boundary is learned") {
  const auto g = or_grid();
  const auto m = train_stage2(g.pairs, g.labels, 1.0);
  int hit = 0;
  for (std::size_t i = 0; i < g.pairs.size(); ++i) hit += (m.positive(g.pairs[i].first, g.pairs[i].second) ? 1 : 0) == g.labels[i];
  const double acc = static_cast<double>(hit) / static_cast<double>(g.pairs.size());
  CAPTURE(acc);
  CHECK(acc >= 0.98);
  CHECK(m.positive(0.0, 0.99));
  CHECK(m.positive(0.99, 0.0));
  CHECK_FALSE(m.positive(0.21, 0.09));
  // Symmetric data gives a near-symmetric rule.
  for (double a : {0.1, 0.3, 0.7, 0.9}) {
    for (double b : {0.05, 0.4, 0.8}) CHECK(m.positive(a, b) == m.positive(b, a));
  }
  m.validate();
}

TEST_CASE("OR decisions are monotone off the threshold lines and the negative region is connected") {
  const auto g = or_grid();
  const auto m = train_stage2(g.pairs, g.labels, 1.0);
  // The raw score is not monotone (clamped log terms dominate near p = 0),
  // so the check is on decisions, away from the unlabeled p = 0.5 lines.
  auto on_line = [](int i) { return i == 20; };
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      if (on_line(i) || on_line(j) || on_line(j + 1)) continue;
      if (m.positive(i / 40.0, j / 40.0)) CHECK(m.positive(i / 40.0, (j + 1) / 40.0));
      if (m.positive(j / 40.0, i / 40.0)) CHECK(m.positive((j + 1) / 40.0, i / 40.0));
    }
  }
  // Flood fill the negative cells of a 51 x 51 export from (0, 0).
  const int res = 51;
  std::vector<int> state(res * res, 0);  // 0 positive, 1 negative, 2 reached
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) state[i * res + j] = m.positive(i / 50.0, j / 50.0) ? 0 : 1;
  }
  REQUIRE(state[0] == 1);
  std::vector<int> stack{0};
  state[0] = 2;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    const int i = c / res, j = c % res;
    for (auto [di, dj] : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
      const int a = i + di, b = j + dj;
      if (a < 0 || b < 0 || a >= res || b >= res || state[a * res + b] != 1) continue;
      state[a * res + b] = 2;
      stack.push_back(a * res + b);
    }
  }
  CHECK(std::count(state.begin(), state.end(), 1) == 0);
  CHECK(m.positive(1.0, 1.0));
  CHECK_FALSE(m.positive(0.0, 0.0));
}

TEST_CASE("export_boundary grid") {
  const auto g = or_grid();
  auto m = train_stage2(g.pairs, g.labels, 1.0);
  m.positive_class = "Muslim";
  m.negative_class = "NonMuslim";
  const auto csv = export_boundary(m, 3);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "p1,p2,score,class");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 9);
  CHECK(csv.find("\n0,0,") != std::string::npos);
  CHECK(csv.find(",NonMuslim\n") != std::string::npos);
  CHECK(csv.find("\n1,1,") != std::string::npos);
  CHECK_THROWS_AS(export_boundary(m, 1), Error);
}

TEST_CASE("training errors") {
  const std::vector<ProbPair> p{{0.1, 0.2}, {0.3, 0.4}};
  try {
    train_stage2(p, std::vector<int>{1, 1}, 1.0);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
  CHECK_THROWS_AS(train_stage2(p, std::vector<int>{1}, 1.0), Error);
  CHECK_THROWS_AS(train_stage2(p, std::vector<int>{0, 2}, 1.0), Error);
  CHECK_THROWS_AS(train_stage2(p, std::vector<int>{0, 1}, 1.0, FeatureMask{}), Error);
}

TEST_CASE("macro recall") {
  CHECK(binary_macro_recall(std::vector<int>{1, 0, 0, 0}, std::vector<int>{1, 1, 0, 0}) == 0.75);
}

TEST_CASE("RFE drops useless features first and keeps a useful one") {
  // Label depends on p1 only; p2 is noise.
  oracle::Gen g(4);
  std::vector<ProbPair> tp, vp;
  std::vector<int> tl, vl;
  for (int i = 0; i < 600; ++i) {
    const double p1 = g.uniform(0.0, 1.0), p2 = g.uniform(0.0, 1.0);
    (i < 400 ? tp : vp).push_back({p1, p2});
    (i < 400 ? tl : vl).push_back(p1 > 0.6 ? 1 : 0);
  }
  const auto r = rfe_select(full_mask(), tp, tl, vp, vl, 1.0);
  REQUIRE(r.path.size() == kPoolSize);
  for (std::size_t s = 0; s < r.path.size(); ++s) CHECK(active_count(r.path[s].mask) == kPoolSize - static_cast<int>(s));
  // The last survivor depends on p1 alone.
  const auto& last = r.path.back().mask;
  CHECK((last[0] || last[2]));
  double best = 0.0;
  for (const auto& s : r.path) best = std::max(best, s.val_macro_recall);
  CHECK(best >= 0.97);
  // The chosen mask is the smallest among the best.
  for (const auto& s : r.path) {
    if (s.val_macro_recall == best) CHECK(active_count(r.mask) <= active_count(s.mask));
  }
}
