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


// Test-side reference implementations and random generators. Nothing here
// calls into the library, so agreement with it is evidence rather than echo.

#ifndef NAMECRAFT_TESTS_ORACLES_HPP_
#define NAMECRAFT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return eng_; }

  // "{AB}{C}"-style canonical name over the first `letters` letters.
  std::string canonical_name(int max_parts, int max_part_len, int letters = 26) {
    std::string s;
    const int parts = range(1, max_parts);
    for (int p = 0; p < parts; ++p) {
      s += '{';
      const int len = range(1, max_part_len);
      for (int i = 0; i < len; ++i) s += static_cast<char>('A' + range(0, letters - 1));
      s += '}';
    }
    return s;
  }

 private:
  std::mt19937_64 eng_;
};

// ---- TF-IDF, written from the definition with ordered maps.

struct NaiveSpace {
  int max_n = 1;
  std::map<std::string, double> idf;
};

inline std::vector<std::string> all_ngrams(const std::string& doc, int max_n) {
  std::vector<std::string> out;
  for (int n = 1; n <= max_n; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= doc.size(); ++i) out.push_back(doc.substr(i, n));
  }
  return out;
}

inline NaiveSpace naive_fit(const std::vector<std::string>& corpus, int max_n) {
  std::map<std::string, std::set<std::size_t>> seen;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& g : all_ngrams(corpus[d], max_n)) seen[g].insert(d);
  }
  NaiveSpace s;
  s.max_n = max_n;
  const double n = static_cast<double>(corpus.size());
  for (const auto& [tok, docs] : seen) {
    s.idf[tok] = std::log((1.0 + n) / (1.0 + static_cast<double>(docs.size()))) + 1.0;
  }
  return s;
}

inline std::map<std::string, double> naive_tfidf(const std::string& doc, const NaiveSpace& s) {
  const auto grams = all_ngrams(doc, s.max_n);
  std::map<std::string, double> counts;
  for (const auto& g : grams) counts[g] += 1.0;
  std::map<std::string, double> v;
  double norm = 0.0;
  for (const auto& [g, c] : counts) {
    auto it = s.idf.find(g);
    if (it == s.idf.end()) continue;
    const double x = c / static_cast<double>(grams.size()) * it->second;
    v[g] = x;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& [g, x] : v) x /= norm;
  return v;
}

// ---- Binary linear problems in dense form.

struct DenseProblem {
  std::vector<std::vector<double>> x;
  std::vector<double> y;  // +1 / -1
  std::vector<double> cost;
};

inline double dense_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double lr_objective(const DenseProblem& p, const std::vector<double>& w, double b) {
  double f = 0.5 * dense_dot(w, w);
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    const double m = p.y[i] * (dense_dot(w, p.x[i]) + b);
    f += p.cost[i] * (m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)));
  }
  return f;
}

inline double svm_objective(const DenseProblem& p, const std::vector<double>& w, double b) {
  double f = 0.5 * dense_dot(w, w);
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    f += p.cost[i] * std::max(0.0, 1.0 - p.y[i] * (dense_dot(w, p.x[i]) + b));
  }
  return f;
}

// Solves A x = r by Gaussian elimination with partial pivoting (A is small).
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i) {
      if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
    }
    std::swap(a[c], a[piv]);
    std::swap(r[c], r[piv]);
    for (std::size_t i = c + 1; i < n; ++i) {
      const double f = a[i][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[i][k] -= f * a[c][k];
      r[i] -= f * r[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = r[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Full Newton with backtracking on (w, b).
inline double lr_reference(const DenseProblem& p, std::size_t d) {
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> g(d + 1, 0.0);
    std::vector<std::vector<double>> h(d + 1, std::vector<double>(d + 1, 0.0));
    for (std::size_t j = 0; j < d; ++j) {
      g[j] = w[j];
      h[j][j] = 1.0;
    }
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      const double m = p.y[i] * (dense_dot(w, p.x[i]) + b);
      const double sig = 1.0 / (1.0 + std::exp(m));  // sigma(-m)
      const double gi = -p.cost[i] * p.y[i] * sig;
      const double hi = p.cost[i] * sig * (1.0 - sig);
      for (std::size_t j = 0; j <= d; ++j) {
        const double xj = j < d ? p.x[i][j] : 1.0;
        g[j] += gi * xj;
        for (std::size_t k = 0; k <= d; ++k) h[j][k] += hi * xj * (k < d ? p.x[i][k] : 1.0);
      }
    }
    double gn = 0.0;
    for (double v : g) gn = std::max(gn, std::abs(v));
    if (gn < 1e-13) break;
    for (std::size_t j = 0; j <= d; ++j) h[j][j] += 1e-300;
    auto step = gauss_solve(h, g);
    const double f0 = lr_objective(p, w, b);
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      std::vector<double> w2(d);
      for (std::size_t j = 0; j < d; ++j) w2[j] = w[j] - t * step[j];
      const double b2 = b - t * step[d];
      if (lr_objective(p, w2, b2) <= f0) {
        w = w2;
        b = b2;
        break;
      }
      t *= 0.5;
    }
  }
  return lr_objective(p, w, b);
}

// Best bias for fixed w: the hinge sum is convex piecewise linear in b, so a
// breakpoint minimizes it. O(n^2), fine at test sizes.
inline double best_hinge_objective(const DenseProblem& p, const std::vector<double>& w) {
  double best = svm_objective(p, w, 0.0);
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    best = std::min(best, svm_objective(p, w, p.y[i] - dense_dot(w, p.x[i])));
  }
  return best;
}

struct SvmReference {
  double primal = 0.0;  // objective of the recovered (w, b)
  double dual = 0.0;    // lower bound on the optimum
};

// SMO on the dual
//   min 1/2 a'Qa - sum(a),  Q_ij = y_i y_j x_i.x_j,  0 <= a <= cost,  y'a = 0,
// stepping along the maximal violating pair until the KKT violation is below
// `kkt_tol`. The certificate is primal(w, best b) - dual(a).
inline SvmReference svm_reference(const DenseProblem& p, std::size_t d, double kkt_tol = 1e-13,
                                  long max_iter = 50000000) {
  const std::size_t n = p.x.size();
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q[i][j] = p.y[i] * p.y[j] * dense_dot(p.x[i], p.x[j]);
  }
  std::vector<double> a(n, 0.0), g(n, -1.0);
  for (long it = 0; it < max_iter; ++it) {
    // i maximizes -y G over the "up" set, j minimizes it over the "low" set.
    long bi = -1, bj = -1;
    double up = -HUGE_VAL, low = HUGE_VAL;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -p.y[t] * g[t];
      const bool can_up = p.y[t] > 0 ? a[t] < p.cost[t] : a[t] > 0.0;
      const bool can_low = p.y[t] > 0 ? a[t] > 0.0 : a[t] < p.cost[t];
      if (can_up && v > up) { up = v; bi = static_cast<long>(t); }
      if (can_low && v < low) { low = v; bj = static_cast<long>(t); }
    }
    if (bi < 0 || bj < 0 || up - low <= kkt_tol) break;
    const auto i = static_cast<std::size_t>(bi), j = static_cast<std::size_t>(bj);
    // Direction u = y_i e_i - y_j e_j keeps y'a fixed.
    const double slope = p.y[i] * g[i] - p.y[j] * g[j];  // < 0
    const double curv = q[i][i] + q[j][j] - 2.0 * p.y[i] * p.y[j] * q[i][j];
    double t = curv > 1e-300 ? -slope / curv : HUGE_VAL;
    t = std::min(t, p.y[i] > 0 ? p.cost[i] - a[i] : a[i]);
    t = std::min(t, p.y[j] > 0 ? a[j] : p.cost[j] - a[j]);
    if (!(t > 0.0)) break;
    a[i] += t * p.y[i];
    a[j] -= t * p.y[j];
    a[i] = std::clamp(a[i], 0.0, p.cost[i]);
    a[j] = std::clamp(a[j], 0.0, p.cost[j]);
    for (std::size_t k = 0; k < n; ++k) g[k] += t * (p.y[i] * q[k][i] - p.y[j] * q[k][j]);
  }
  std::vector<double> w(d, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += a[i];
    for (std::size_t k = 0; k < d; ++k) w[k] += a[i] * p.y[i] * p.x[i][k];
  }
  SvmReference ref;
  ref.dual = sum - 0.5 * dense_dot(w, w);
  ref.primal = best_hinge_objective(p, w);
  return ref;
}

}  // namespace oracle

#endif  // NAMECRAFT_TESTS_ORACLES_HPP_
