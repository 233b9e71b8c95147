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


#include <cmath>

#include "core/error.hpp"
#include "core/linear.hpp"
#include "doctest.h"
#include "harness.hpp"

using namespace namecraft;
using namespace namecraft::linear;

namespace {

std::vector<corpus::ClassLabel> classes(int k) {
  std::vector<corpus::ClassLabel> out;
  for (int c = 0; c < k; ++c) out.push_back({c, "C" + std::to_string(c)});
  return out;
}

SparseVector sv(std::initializer_list<std::pair<int, double>> entries) {
  SparseVector v;
  for (const auto& [c, x] : entries) v.entries.push_back({c, x});
  return v;
}

LinearModel hand_model(int k, std::size_t dim, std::vector<double> w, std::vector<double> b) {
  LinearModel m;
  m.kind = LinearKind::kLogistic;
  m.dim = dim;
  m.classes = classes(k);
  m.weights = std::move(w);
  m.bias = std::move(b);
  return m;
}

double minority_recall(const LinearModel& m, const std::vector<SparseVector>& x, const std::vector<int>& y) {
  double hit = 0, total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] != 1) continue;
    ++total;
    hit += predict(m, x[i]) == 1;
  }
  return hit / total;
}

}  // namespace

TEST_CASE("separable pair is classified correctly") {
  const std::vector<SparseVector> x{sv({{0, 1.0}}), sv({{0, -1.0}})};
  const std::vector<int> y{0, 1};
  const std::vector<double> w{1.0, 1.0};
  for (auto kind : {LinearKind::kLogistic, LinearKind::kSvm}) {
    const auto m = train_linear(kind, x, y, classes(2), 100.0, w, 1, 0, 1);
    CHECK(predict(m, x[0]) == 0);
    CHECK(predict(m, x[1]) == 1);
  }
}

TEST_CASE("training rejects degenerate input") {
  const std::vector<SparseVector> x{sv({{0, 1.0}}), sv({{0, -1.0}})};
  const std::vector<double> w{1.0, 1.0};
  CHECK_THROWS_AS(train_linear(LinearKind::kSvm, x, std::vector<int>{0, 0}, classes(2), 1.0, w, 1, 0, 1), Error);
  CHECK_THROWS_AS(train_linear(LinearKind::kSvm, x, std::vector<int>{0, 0}, classes(1), 1.0,
                               std::vector<double>{1.0}, 1, 0, 1),
                  Error);
  CHECK_THROWS_AS(train_linear(LinearKind::kLogistic, x, std::vector<int>{0, 1}, classes(2), -1.0, w, 1, 0, 1),
                  Error);
  const std::vector<SparseVector> wide{sv({{5, 1.0}}), sv({{0, -1.0}})};
  try {
    train_linear(LinearKind::kLogistic, wide, std::vector<int>{0, 1}, classes(2), 1.0, w, 2, 0, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("solvers match the reference solvers") {
  oracle::Gen g(101);
  for (int t = 0; t < 25; ++t) {
    // Narrow instances go to the interior-point SVM, wide ones to coordinate descent.
    const bool wide = t % 2 == 1;
    const int n = g.range(2, 60);
    const int d = wide ? g.range(65, 150) : g.range(1, 30);
    const auto p = harness::random_problem(g, n, d);
    const auto x = harness::to_sparse(p);
    const BinaryProblem bp{x, p.y, p.cost, static_cast<std::size_t>(d)};
    CAPTURE(t);
    CAPTURE(n);
    CAPTURE(d);
    const auto lr = fit_binary(LinearKind::kLogistic, bp, {}, 1);
    CHECK(harness::relative_gap(oracle::lr_objective(p, lr.w, lr.b), oracle::lr_reference(p, static_cast<std::size_t>(d))) <=
          1e-6);
    const auto svm = fit_binary(LinearKind::kSvm, bp, {}, 1);
    const auto ref = oracle::svm_reference(p, static_cast<std::size_t>(d));
    REQUIRE(ref.primal - ref.dual <= 1e-9 * std::max(1.0, ref.primal));
    CHECK(harness::relative_gap(oracle::svm_objective(p, svm.w, svm.b), ref.primal) <= 1e-6);
    for (auto* fit : {&lr, &svm}) {
      for (std::size_t i = 1; i < fit->trajectory.size(); ++i) CHECK(fit->trajectory[i] <= fit->trajectory[i - 1]);
    }
  }
}

TEST_CASE("binary_objective agrees with the dense formula") {
  oracle::Gen g(8);
  const auto p = harness::random_problem(g, 20, 6);
  const auto x = harness::to_sparse(p);
  const BinaryProblem bp{x, p.y, p.cost, 6};
  std::vector<double> w(6);
  for (auto& v : w) v = g.normal();
  CHECK(binary_objective(LinearKind::kLogistic, bp, w, 0.3) == doctest::Approx(oracle::lr_objective(p, w, 0.3)).epsilon(1e-12));
  CHECK(binary_objective(LinearKind::kSvm, bp, w, -0.2) == doctest::Approx(oracle::svm_objective(p, w, -0.2)).epsilon(1e-12));
}

TEST_CASE("optimal_hinge_bias is the brute-force minimizer") {
  oracle::Gen g(4);
  for (int t = 0; t < 200; ++t) {
    const int n = g.range(1, 25);
    std::vector<double> z(n), y(n), c(n);
    for (int i = 0; i < n; ++i) {
      z[i] = g.normal();
      y[i] = g.coin() ? 1.0 : -1.0;
      c[i] = g.uniform(0.1, 3.0);
    }
    auto f = [&](double b) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += c[i] * std::max(0.0, 1.0 - y[i] * (z[i] + b));
      return s;
    };
    double best = f(0.0);
    for (int i = 0; i < n; ++i) best = std::min(best, f(y[i] - z[i]));
    CHECK(f(optimal_hinge_bias(z, y, c)) <= best + 1e-12 * std::max(1.0, best));
  }
}

TEST_CASE("balanced weights do not lower minority recall on a 9:1 instance") {
  // Separable at x1 = 0.3 with majority mass pressing on the boundary; a small
  // C lets the regularizer trade minority errors for a smaller norm.
  oracle::Gen g(33);
  std::vector<SparseVector> x;
  std::vector<int> y;
  for (int i = 0; i < 900; ++i) x.push_back(sv({{0, g.uniform(0.0, 0.25)}, {1, 1.0}})), y.push_back(0);
  for (int i = 0; i < 100; ++i) x.push_back(sv({{0, g.uniform(0.35, 1.0)}, {1, 1.0}})), y.push_back(1);
  for (auto kind : {LinearKind::kLogistic, LinearKind::kSvm}) {
    const auto flat = train_linear(kind, x, y, classes(2), 0.05, std::vector<double>{1.0, 1.0}, 2, 0, 1);
    const auto bal = train_linear(kind, x, y, classes(2), 0.05, corpus::class_weights(y, 2), 2, 0, 1);
    const double r_flat = minority_recall(flat, x, y);
    const double r_bal = minority_recall(bal, x, y);
    CAPTURE(r_flat);
    CAPTURE(r_bal);
    CHECK(r_bal >= r_flat);
    CHECK(r_flat < 1.0);  // the construction actually bites
  }
}

TEST_CASE("decision_scores examples") {
  const auto zero = hand_model(2, 2, {0, 0, 0, 0}, {0, 0});
  CHECK(decision_scores(zero, sv({{0, 1.0}})) == std::vector<double>{0.0, 0.0});
  const auto m = hand_model(2, 2, {1, 2, 3, 4}, {0.5, -0.5});
  CHECK(decision_scores(m, SparseVector{}) == std::vector<double>{0.5, -0.5});
  CHECK(decision_scores(m, sv({{1, 1.0}})) == std::vector<double>{2.5, 3.5});
  CHECK(decision_scores(m, sv({{0, 1.0}})) == std::vector<double>{1.5, 2.5});
  CHECK_THROWS_AS(decision_scores(m, sv({{2, 1.0}})), Error);
}

TEST_CASE("predict_proba examples") {
  auto p = scores_to_proba(std::vector<double>{0.7, 0.7, 0.7});
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  p = scores_to_proba(std::vector<double>{40.0, -40.0});
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[1] < 1e-12);
  p = scores_to_proba(std::vector<double>{0.0, 0.0});
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);
  p = scores_to_proba(std::vector<double>{-800.0, -900.0});
  CHECK(std::isfinite(p[0]));
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict ties go to the lowest id") {
  CHECK(argmax(std::vector<double>{0.0, 2.0, 1.0, 2.0}) == 1);
  const auto zero = hand_model(3, 1, {0, 0, 0}, {0, 0, 0});
  CHECK(predict(zero, sv({{0, 1.0}})) == 0);
  const auto dom = hand_model(3, 1, {0, 0, 5}, {0, 0, 0});
  CHECK(predict(dom, sv({{0, 1.0}})) == 2);
}

TEST_CASE("predict agrees with the argmax of predict_proba") {
  oracle::Gen g(77);
  for (int t = 0; t < 300; ++t) {
    const int k = g.range(2, 6);
    const std::size_t d = 5;
    std::vector<double> w(static_cast<std::size_t>(k) * d), b(static_cast<std::size_t>(k));
    for (auto& v : w) v = 3.0 * g.normal();
    for (auto& v : b) v = g.normal();
    const auto m = hand_model(k, d, w, b);
    SparseVector x;
    for (int j = 0; j < 5; ++j) {
      if (g.coin()) x.entries.push_back({j, g.normal()});
    }
    const auto p = predict_proba(m, x);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(argmax(p) == predict(m, x));
  }
}
