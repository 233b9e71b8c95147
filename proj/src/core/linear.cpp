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

#include "core/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace namecraft::linear {

namespace {

// log(1 + exp(-s)) without overflow.
double logistic_loss(double s) {
  return s > 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const SparseVector& x, std::span<double> y) {
  for (const auto& e : x.entries) y[static_cast<std::size_t>(e.column)] += alpha * e.value;
}

void check_problem(const BinaryProblem& p) {
  require(p.x.size() == p.y.size() && p.x.size() == p.cost.size(), ErrorCode::kDimensionMismatch,
          "x, y and cost must have equal length");
  require(!p.x.empty(), ErrorCode::kInvalidArgument, "empty training set");
  for (const auto& row : p.x) {
    if (!row.entries.empty()) {
      require(row.entries.back().column >= 0 &&
                  static_cast<std::size_t>(row.entries.back().column) < p.dim,
              ErrorCode::kDimensionMismatch, "feature column outside model dimension");
    }
  }
  for (std::size_t i = 0; i < p.y.size(); ++i) {
    require(p.y[i] == 1.0 || p.y[i] == -1.0, ErrorCode::kInvalidArgument, "labels must be +1/-1");
    require(p.cost[i] > 0.0 && std::isfinite(p.cost[i]), ErrorCode::kInvalidArgument,
            "example costs must be positive");
  }
}

// Truncated Newton with conjugate gradients and Armijo backtracking.
BinaryFit fit_logistic(const BinaryProblem& p, const SolverOptions& opt) {
  const std::size_t n = p.x.size();
  const std::size_t d = p.dim;
  BinaryFit fit;
  fit.w.assign(d, 0.0);
  std::vector<double> z(n, 0.0), coef(n), curv(n), g(d), dir(d), r(d), q(d), hq(d), xd(n);

  auto objective_at = [&](double t, double db, double w_sq, double wd, double dd) {
    double f = 0.5 * (w_sq + 2.0 * t * wd + t * t * dd);
    for (std::size_t i = 0; i < n; ++i) f += p.cost[i] * logistic_loss(p.y[i] * (z[i] + t * (xd[i] + db)));
    return f;
  };

  double f = objective_at(0.0, 0.0, 0.0, 0.0, 0.0);
  fit.trajectory.push_back(f);
  double g0 = -1.0;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    std::fill(g.begin(), g.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = sigmoid(p.y[i] * z[i]);
      coef[i] = p.cost[i] * (s - 1.0) * p.y[i];
      curv[i] = p.cost[i] * s * (1.0 - s);
      axpy(coef[i], p.x[i], g);
      gb += coef[i];
    }
    for (std::size_t j = 0; j < d; ++j) g[j] += fit.w[j];
    const double gnorm = std::sqrt(dot(g, g) + gb * gb);
    if (g0 < 0.0) g0 = std::max(gnorm, std::numeric_limits<double>::min());
    if (gnorm <= opt.tolerance * g0) {
      fit.iterations = iter;
      return fit;
    }

    // Solve H [dir; db] = -[g; gb] by CG, H = I_w + X^T D X with the bias
    // as an unpenalized extra coordinate.
    std::fill(dir.begin(), dir.end(), 0.0);
    double db = 0.0;
    for (std::size_t j = 0; j < d; ++j) r[j] = -g[j];
    double rb = -gb;
    q = r;
    double qb = rb;
    double rr = dot(r, r) + rb * rb;
    const double cg_tol = std::min(0.1, std::sqrt(gnorm / g0)) * gnorm;
    const int cg_max = static_cast<int>(std::min<std::size_t>(d + 1, 1000));
    for (int k = 0; k < cg_max && std::sqrt(rr) > cg_tol; ++k) {
      std::fill(hq.begin(), hq.end(), 0.0);
      double hqb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = curv[i] * (p.x[i].dot(q) + qb);
        axpy(v, p.x[i], hq);
        hqb += v;
      }
      for (std::size_t j = 0; j < d; ++j) hq[j] += q[j];
      const double qhq = dot(q, hq) + qb * hqb;
      if (!(qhq > 0.0)) break;
      const double alpha = rr / qhq;
      for (std::size_t j = 0; j < d; ++j) {
        dir[j] += alpha * q[j];
        r[j] -= alpha * hq[j];
      }
      db += alpha * qb;
      rb -= alpha * hqb;
      const double rr_new = dot(r, r) + rb * rb;
      const double beta = rr_new / rr;
      for (std::size_t j = 0; j < d; ++j) q[j] = r[j] + beta * q[j];
      qb = rb + beta * qb;
      rr = rr_new;
    }
    double slope = dot(g, dir) + gb * db;
    if (!(slope < 0.0)) {
      for (std::size_t j = 0; j < d; ++j) dir[j] = -g[j];
      db = -gb;
      slope = -(gnorm * gnorm);
    }

    for (std::size_t i = 0; i < n; ++i) xd[i] = p.x[i].dot(dir);
    const double w_sq = dot(fit.w, fit.w), wd = dot(fit.w, dir), dd = dot(dir, dir);
    double t = 1.0;
    double f_new = objective_at(t, db, w_sq, wd, dd);
    int backtracks = 0;
    while (f_new > f + 1e-4 * t * slope && backtracks < 60) {
      t *= 0.5;
      f_new = objective_at(t, db, w_sq, wd, dd);
      ++backtracks;
    }
    if (!(f - f_new > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(f))) {
      // No decrease beyond rounding left along a descent direction: the
      // iterate is optimal to working precision.
      fit.iterations = iter;
      if (gnorm <= 1e-6 * g0) return fit;
      fail(ErrorCode::kNotConverged, "logistic solver stalled at relative gradient " +
                                         std::to_string(gnorm / g0));
    }
    for (std::size_t j = 0; j < d; ++j) fit.w[j] += t * dir[j];
    fit.b += t * db;
    for (std::size_t i = 0; i < n; ++i) z[i] += t * (xd[i] + db);
    f = f_new;
    fit.trajectory.push_back(f);
  }
  fail(ErrorCode::kNotConverged,
       "logistic solver did not converge in " + std::to_string(opt.max_iterations) + " iterations");
}

// Dual coordinate descent on the box-constrained SVM dual. The equality
// constraint sum_i alpha_i y_i = 0 that an unpenalized bias induces is
// handled by the method of multipliers; the multiplier is the bias.
// For a fixed bias b the problem is a bias-free SVM, solved by dual
// coordinate descent (warm-started). With alpha(b) its solution,
// s(b) = sum_i alpha_i y_i is minus the derivative of the optimal value in b
// and is non-increasing, so the best bias is the root of s, found by
// bracketing and regula falsi (Illinois variant).
BinaryFit fit_svm(const BinaryProblem& p, const SolverOptions& opt, std::uint64_t seed) {
  const std::size_t n = p.x.size();
  const std::size_t d = p.dim;
  std::vector<double> alpha(n, 0.0), q_diag(n), w(d, 0.0), z(n);
  for (std::size_t i = 0; i < n; ++i) q_diag[i] = p.x[i].squared_norm();
  double total_cost = 0.0;
  for (double c : p.cost) total_cost += c;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);

  BinaryFit fit;
  fit.w = w;
  fit.b = optimal_hinge_bias(std::vector<double>(n, 0.0), p.y, p.cost);
  double best = binary_objective(LinearKind::kSvm, p, w, fit.b);
  fit.trajectory.push_back(best);

  auto solve = [&](double b) {
    for (int epoch = 0; epoch < opt.max_inner_epochs; ++epoch) {
      rng.shuffle(order);
      double worst = 0.0;
      for (std::size_t i : order) {
        if (q_diag[i] == 0.0) continue;  // alpha_i has no effect on w
        const double g = p.y[i] * (p.x[i].dot(w) + b) - 1.0;
        const double upper = p.cost[i];
        double pg = g;
        if (alpha[i] <= 0.0) {
          pg = std::min(g, 0.0);
        } else if (alpha[i] >= upper) {
          pg = std::max(g, 0.0);
        }
        worst = std::max(worst, std::abs(pg));
        if (pg == 0.0) continue;
        const double updated = std::clamp(alpha[i] - g / q_diag[i], 0.0, upper);
        const double delta = updated - alpha[i];
        if (delta == 0.0) continue;
        alpha[i] = updated;
        axpy(delta * p.y[i], p.x[i], w);
      }
      bool converged = worst <= opt.tolerance;
      if (!converged) {
        // On ill-conditioned free sets the iterates crawl long after the
        // objective has settled; the duality gap catches that case.
        double primal = 0.5 * dot(w, w), dual = -0.5 * dot(w, w);
        for (std::size_t i = 0; i < n; ++i) {
          const double a = q_diag[i] == 0.0 ? (p.y[i] * b < 1.0 ? p.cost[i] : 0.0) : alpha[i];
          primal += p.cost[i] * std::max(0.0, 1.0 - p.y[i] * (p.x[i].dot(w) + b));
          dual += a * (1.0 - p.y[i] * b);
        }
        converged = primal - dual <= opt.tolerance * std::max(1.0, std::abs(primal));
      }
      if (converged) {
        // Examples with x = 0 only see the bias: their alpha is at a bound
        // determined by the sign of y b - 1.
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (q_diag[i] == 0.0) alpha[i] = p.y[i] * b < 1.0 ? p.cost[i] : 0.0;
          s += alpha[i] * p.y[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = p.x[i].dot(w);
        const double bias = optimal_hinge_bias(z, p.y, p.cost);
        const double obj = binary_objective(LinearKind::kSvm, p, w, bias);
        if (obj < best) {
          best = obj;
          fit.w = w;
          fit.b = bias;
        }
        fit.trajectory.push_back(best);
        ++fit.iterations;
        return s;
      }
    }
    fail(ErrorCode::kNotConverged, "SVM coordinate descent did not converge in " +
                                       std::to_string(opt.max_inner_epochs) + " epochs");
  };

  const double s_tol = opt.tolerance * std::max(1.0, total_cost);
  int budget = opt.max_iterations;
  double lo = fit.b, s_lo = solve(lo);
  if (std::abs(s_lo) <= s_tol) return fit;
  // s is non-increasing in b: move toward the sign of s until it flips.
  const double dir = s_lo > 0.0 ? 1.0 : -1.0;
  double step = 0.5;
  double hi = lo + dir * step, s_hi = solve(hi);
  while (s_hi * dir > 0.0) {
    require(--budget > 0, ErrorCode::kNotConverged, "SVM bias search did not bracket the optimum");
    lo = hi;
    s_lo = s_hi;
    step *= 2.0;
    hi = lo + dir * step;
    s_hi = solve(hi);
  }
  if (std::abs(s_hi) <= s_tol) return fit;
  if (dir < 0.0) {
    std::swap(lo, hi);
    std::swap(s_lo, s_hi);
  }
  // Now s_lo > 0 > s_hi with lo < hi.
  int side = 0;
  while (true) {
    double mid = (lo * (-s_hi) + hi * s_lo) / (s_lo - s_hi);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double s_mid = solve(mid);
    if (std::abs(s_mid) <= s_tol) return fit;
    if (s_mid > 0.0) {
      lo = mid;
      s_lo = s_mid;
      if (side == -1) s_hi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      s_hi = s_mid;
      if (side == 1) s_lo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi))) return fit;
    require(--budget > 0, ErrorCode::kNotConverged,
            "SVM solver did not converge in " + std::to_string(opt.max_iterations) + " bias updates");
  }
}

// Cholesky solve of a small SPD system in place; a is n x n row-major.
void cholesky_solve(std::vector<long double>& a, std::vector<long double>& rhs, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    long double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    require(diag > 0.0L, ErrorCode::kNotConverged, "interior-point system lost definiteness");
    const long double l = std::sqrt(diag);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      long double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) rhs[i] -= a[i * n + k] * rhs[k];
    rhs[i] /= a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) rhs[i] -= a[k * n + i] * rhs[k];
    rhs[i] /= a[i * n + i];
  }
}

}  // namespace

const char* kind_name(LinearKind kind) { return kind == LinearKind::kLogistic ? "lr" : "svm"; }

double binary_objective(LinearKind kind, const BinaryProblem& p, std::span<const double> w, double b) {
  double f = 0.5 * dot(w, w);
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    const double m = p.y[i] * (p.x[i].dot(w) + b);
    f += p.cost[i] * (kind == LinearKind::kLogistic ? logistic_loss(m) : std::max(0.0, 1.0 - m));
  }
  return f;
}

double optimal_hinge_bias(std::span<const double> z, std::span<const double> y,
                          std::span<const double> cost) {
  // Each positive example contributes slope -cost for b < y - z, each
  // negative one +cost for b > y - z. The minimum sits at the breakpoint
  // where the running slope first becomes non-negative.
  struct Break {
    double at;
    double cost;
    bool positive;
  };
  std::vector<Break> breaks;
  breaks.reserve(z.size());
  double slope = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const bool pos = y[i] > 0.0;
    breaks.push_back({y[i] - z[i], cost[i], pos});
    if (pos) slope -= cost[i];
  }
  std::sort(breaks.begin(), breaks.end(), [](const Break& a, const Break& b) { return a.at < b.at; });
  if (breaks.empty()) return 0.0;
  if (slope >= 0.0) return breaks.front().at;
  for (std::size_t i = 0; i < breaks.size();) {
    const double at = breaks[i].at;
    // Crossing `at`: positives stop contributing, negatives start.
    for (; i < breaks.size() && breaks[i].at == at; ++i) {
      slope += breaks[i].cost;
    }
    if (slope >= 0.0) return at;
  }
  return breaks.back().at;
}

BinaryFit fit_binary(LinearKind kind, const BinaryProblem& problem, const SolverOptions& options,
                     std::uint64_t seed) {
  check_problem(problem);
  if (kind == LinearKind::kLogistic) return fit_logistic(problem, options);
  // With few columns the margin set fills the dimension and, for a fixed
  // bias near the optimum, coordinate descent wanders along a flat valley.
  if (problem.dim <= kDenseSvmMaxDim) return fit_svm_dense(problem, options);
  return fit_svm(problem, options, seed);
}

BinaryFit fit_svm_dense(const BinaryProblem& p, const SolverOptions& opt) {
  check_problem(p);
  const std::size_t n = p.x.size();
  const std::size_t d = p.dim;
  // Rows of Z = diag(y) X, dense.
  std::vector<double> zr(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : p.x[i].entries) zr[i * d + static_cast<std::size_t>(e.column)] = p.y[i] * e.value;
  }
  std::vector<double> scores(n);
  BinaryFit fit;
  fit.w.assign(d, 0.0);
  fit.b = optimal_hinge_bias(std::vector<double>(n, 0.0), p.y, p.cost);
  double best = binary_objective(LinearKind::kSvm, p, fit.w, fit.b);
  fit.trajectory.push_back(best);
  const bool both = std::any_of(p.y.begin(), p.y.end(), [](double v) { return v > 0.0; }) &&
                    std::any_of(p.y.begin(), p.y.end(), [](double v) { return v < 0.0; });
  if (!both) return fit;  // sum alpha_i y_i = 0 forces alpha = 0

  // Primal-dual Mehrotra iteration on the dual QP
  //   min 1/2 a'Qa - e'a  s.t.  y'a = 0, 0 <= a <= cost,  Q = Z Z'.
  // Multipliers: beta (equality, equals the bias), s for a >= 0, u for a <= cost.
  std::vector<double> a(n), t(n), s(n, 1.0), u(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) a[i] = t[i] = 0.5 * p.cost[i];
  double beta = 0.0;
  std::vector<double> w(d), rd(n), dinv(n), r(n), tmp(n), da(n), ds(n), du(n), da_aff(n), ds_aff(n),
      du_aff(n);
  std::vector<long double> small(d * d), rhs(d);
  double cmax = 0.0;
  for (double c : p.cost) cmax = std::max(cmax, c);

  auto apply_q = [&](std::span<const double> v, std::span<double> out) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) w[j] += zr[i * d + j] * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += zr[i * d + j] * w[j];
      out[i] = acc;
    }
  };
  // x = (D + Z Z')^{-1} v by Woodbury; needs dinv and the factored small matrix.
  auto solve_m = [&](std::span<const double> v, std::span<double> x) {
    std::vector<long double> z(d, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) z[j] += static_cast<long double>(zr[i * d + j]) * dinv[i] * v[i];
    }
    // forward/back substitution with the stored factor
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < i; ++k) z[i] -= small[i * d + k] * z[k];
      z[i] /= small[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
      for (std::size_t k = i + 1; k < d; ++k) z[i] -= small[k * d + i] * z[k];
      z[i] /= small[i * d + i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      long double acc = 0.0L;
      for (std::size_t j = 0; j < d; ++j) acc += zr[i * d + j] * z[j];
      x[i] = static_cast<double>(dinv[i] * (v[i] - acc));
    }
  };
  auto max_step = [&](std::span<const double> v, std::span<const double> dv, double cap) {
    for (std::size_t i = 0; i < n; ++i) {
      if (dv[i] < 0.0) cap = std::min(cap, -v[i] / dv[i]);
    }
    return cap;
  };

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    apply_q(a, rd);
    double rp = 0.0, gap = 0.0, quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      quad += a[i] * rd[i];
      lin += a[i];
      rd[i] += -1.0 + beta * p.y[i] - s[i] + u[i];
      rp += p.y[i] * a[i];
      gap += a[i] * s[i] + t[i] * u[i];
    }
    // Track the primal objective of the current w with its best bias.
    for (std::size_t i = 0; i < n; ++i) scores[i] = p.x[i].dot(w);
    const double bias = optimal_hinge_bias(scores, p.y, p.cost);
    const double obj = binary_objective(LinearKind::kSvm, p, w, bias);
    if (obj < best) {
      best = obj;
      fit.w = w;
      fit.b = bias;
    }
    fit.trajectory.push_back(best);
    fit.iterations = iter + 1;
    const double dual_obj = lin - 0.5 * quad;
    // best - dual_obj certifies the objective once y'a = 0 holds.
    if (std::abs(rp) <= opt.tolerance * std::max(1.0, cmax) &&
        best - dual_obj <= opt.tolerance * std::max(1.0, std::abs(best))) {
      return fit;
    }

    const double mu = gap / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) dinv[i] = 1.0 / (s[i] / a[i] + u[i] / t[i]);
    std::fill(small.begin(), small.end(), 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const long double zj = static_cast<long double>(zr[i * d + j]) * dinv[i];
        for (std::size_t k = 0; k <= j; ++k) small[j * d + k] += zj * zr[i * d + k];
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      small[j * d + j] += 1.0L;
      for (std::size_t k = 0; k < j; ++k) small[k * d + j] = small[j * d + k];
    }
    std::fill(rhs.begin(), rhs.end(), 0.0L);
    cholesky_solve(small, rhs, d);  // factor only; rhs stays zero
    std::vector<double> my(n);
    solve_m(p.y, my);
    double ymy = 0.0;
    for (std::size_t i = 0; i < n; ++i) ymy += p.y[i] * my[i];

    // comp1 = target for a*s, comp2 = target for t*u (already minus current products).
    auto direction = [&](double sigma_mu, bool corrector) {
      for (std::size_t i = 0; i < n; ++i) {
        double c1 = sigma_mu - a[i] * s[i];
        double c2 = sigma_mu - t[i] * u[i];
        if (corrector) {
          c1 -= da_aff[i] * ds_aff[i];
          c2 -= (-da_aff[i]) * du_aff[i];
        }
        r[i] = -rd[i] + c1 / a[i] - c2 / t[i];
        tmp[i] = c1;
        ds[i] = c2;  // stash
      }
      std::vector<double> mr(n);
      solve_m(r, mr);
      double ymr = 0.0;
      for (std::size_t i = 0; i < n; ++i) ymr += p.y[i] * mr[i];
      const double dbeta = (ymr + rp) / ymy;
      for (std::size_t i = 0; i < n; ++i) {
        da[i] = mr[i] - dbeta * my[i];
        const double c1 = tmp[i], c2 = ds[i];
        ds[i] = (c1 - s[i] * da[i]) / a[i];
        du[i] = (c2 + u[i] * da[i]) / t[i];
      }
      return dbeta;
    };

    direction(0.0, false);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = -da[i];
    double step_p = max_step(a, da, 1.0);
    step_p = max_step(t, tmp, step_p);
    double step_d = max_step(s, ds, 1.0);
    step_d = max_step(u, du, step_d);
    double gap_aff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gap_aff += (a[i] + step_p * da[i]) * (s[i] + step_d * ds[i]) +
                 (t[i] - step_p * da[i]) * (u[i] + step_d * du[i]);
    }
    const double sigma = std::pow(gap_aff / gap, 3.0);
    da_aff = da;
    ds_aff = ds;
    du_aff = du;
    const double dbeta = direction(sigma * mu, true);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = -da[i];
    step_p = max_step(a, da, 1.0);
    step_p = max_step(t, tmp, step_p);
    step_d = max_step(s, ds, 1.0);
    step_d = max_step(u, du, step_d);
    // One step length for both: the equality residual enters the dual side.
    const double step = std::min(1.0, 0.995 * std::min(step_p, step_d));
    for (std::size_t i = 0; i < n; ++i) {
      a[i] += step * da[i];
      t[i] = p.cost[i] - a[i];
      if (!(t[i] > 0.0)) t[i] = std::max(t[i], 1e-300);  // roundoff near the upper bound
      s[i] += step * ds[i];
      u[i] += step * du[i];
    }
    beta += step * dbeta;
  }
  fail(ErrorCode::kNotConverged,
       "SVM interior-point solver did not converge in " + std::to_string(opt.max_iterations) + " iterations");
}

void LinearModel::validate() const {
  require(!classes.empty() && weights.size() == classes.size() * dim && bias.size() == classes.size(),
          ErrorCode::kModelMismatch, "linear model shapes are inconsistent");
  for (double v : weights) require(std::isfinite(v), ErrorCode::kModelMismatch, "non-finite weight");
  for (double v : bias) require(std::isfinite(v), ErrorCode::kModelMismatch, "non-finite bias");
}

LinearModel train_linear(LinearKind kind, std::span<const SparseVector> x, std::span<const int> y,
                         const std::vector<corpus::ClassLabel>& classes, double c,
                         std::span<const double> class_weights, std::size_t dim,
                         std::uint64_t feature_space_id, std::uint64_t seed,
                         const SolverOptions& options, TrainLog* log) {
  const std::size_t k = classes.size();
  require(k >= 2, ErrorCode::kInvalidArgument, "at least two classes are required");
  require(x.size() == y.size(), ErrorCode::kDimensionMismatch, "x and y lengths differ");
  require(x.size() >= k, ErrorCode::kInvalidArgument, "fewer examples than classes");
  require(c > 0.0 && std::isfinite(c), ErrorCode::kInvalidArgument, "C must be positive");
  require(class_weights.size() == k, ErrorCode::kDimensionMismatch, "one class weight per class");
  std::vector<std::size_t> seen(k, 0);
  for (int label : y) {
    require(label >= 0 && static_cast<std::size_t>(label) < k, ErrorCode::kLabel, "label out of range");
    ++seen[static_cast<std::size_t>(label)];
  }
  for (std::size_t cls = 0; cls < k; ++cls) {
    require(seen[cls] > 0, ErrorCode::kInvalidArgument,
            "class " + classes[cls].name + " has no training examples");
  }

  LinearModel model;
  model.kind = kind;
  model.dim = dim;
  model.classes = classes;
  model.feature_space_id = feature_space_id;
  model.c = c;
  model.weights.assign(k * dim, 0.0);
  model.bias.assign(k, 0.0);

  std::vector<double> cost(x.size()), sign(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cost[i] = c * class_weights[static_cast<std::size_t>(y[i])];
  }
  if (log) log->trajectories.assign(k, {});
  for (std::size_t cls = 0; cls < k; ++cls) {
    for (std::size_t i = 0; i < x.size(); ++i) sign[i] = static_cast<std::size_t>(y[i]) == cls ? 1.0 : -1.0;
    const BinaryProblem problem{x, sign, cost, dim};
    BinaryFit fit = fit_binary(kind, problem, options, mix_seed(seed, cls));
    std::copy(fit.w.begin(), fit.w.end(), model.weights.begin() + static_cast<std::ptrdiff_t>(cls * dim));
    model.bias[cls] = fit.b;
    if (log) log->trajectories[cls] = std::move(fit.trajectory);
  }
  return model;
}

std::vector<double> decision_scores(const LinearModel& model, const SparseVector& x) {
  if (!x.entries.empty()) {
    require(x.entries.back().column >= 0 && static_cast<std::size_t>(x.entries.back().column) < model.dim,
            ErrorCode::kDimensionMismatch, "feature column outside model dimension");
  }
  std::vector<double> scores(model.num_classes());
  for (std::size_t k = 0; k < scores.size(); ++k) scores[k] = x.dot(model.row(k)) + model.bias[k];
  return scores;
}

std::vector<double> scores_to_proba(std::span<const double> scores) {
  // log sigma(s) = -log(1 + exp(-s)); normalize with a max shift.
  std::vector<double> logp(scores.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scores.size(); ++k) {
    logp[k] = -logistic_loss(scores[k]);
    top = std::max(top, logp[k]);
  }
  double sum = 0.0;
  for (auto& v : logp) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : logp) v /= sum;
  return logp;
}

std::vector<double> predict_proba(const LinearModel& model, const SparseVector& x) {
  return scores_to_proba(decision_scores(model, x));
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

int predict(const LinearModel& model, const SparseVector& x) {
  return argmax(decision_scores(model, x));
}

}  // namespace namecraft::linear
