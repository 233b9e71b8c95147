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

// One-vs-rest L2-regularized logistic regression and linear SVM.
//
// For each class c the solver minimizes
//
//   1/2 ||w_c||^2 + C * sum_i m_i * loss(y_i * (w_c . x_i + b_c))
//
// with y_i = +1 for examples of class c and -1 otherwise, m_i the weight of
// example i's true class, loss(s) = log(1 + exp(-s)) for LR and
// max(0, 1 - s) for the SVM. The bias is not penalized.

#ifndef NAMECRAFT_CORE_LINEAR_HPP_
#define NAMECRAFT_CORE_LINEAR_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "core/corpus.hpp"
#include "core/featurizer.hpp"

namespace namecraft::linear {

using featurizer::SparseVector;

enum class LinearKind { kLogistic, kSvm };

const char* kind_name(LinearKind kind);

struct SolverOptions {
  // Newton iterations (LR), bias updates (SVM) or interior-point steps
  // (small SVM).
  int max_iterations = 300;
  // Coordinate-descent epochs per bias update (SVM, wide problems).
  int max_inner_epochs = 2000;
  // LR: relative gradient norm. SVM: projected-gradient violation or
  // relative duality gap for the current bias, whichever is met first.
  double tolerance = 1e-9;
};

// One binary subproblem. `cost[i]` is C * m_i.
struct BinaryProblem {
  std::span<const SparseVector> x;
  std::span<const double> y;
  std::span<const double> cost;
  std::size_t dim = 0;
};

struct BinaryFit {
  std::vector<double> w;
  double b = 0.0;
  // Objective after each solver iteration; never increases.
  std::vector<double> trajectory;
  int iterations = 0;
};

double binary_objective(LinearKind kind, const BinaryProblem& problem, std::span<const double> w,
                        double b);

// SVMs with at most this many columns go to fit_svm_dense.
inline constexpr std::size_t kDenseSvmMaxDim = 64;

// Throws Error(kNotConverged) when the tolerance is not met in time.
BinaryFit fit_binary(LinearKind kind, const BinaryProblem& problem, const SolverOptions& options,
                     std::uint64_t seed);

// SVM for small dense problems (a few dozen columns at most): interior-point
// iteration on the dual with O(n dim^2) work per step. Unlike coordinate
// descent it does not stall when the margin examples are nearly collinear.
// `options.tolerance` bounds the relative duality gap, `max_iterations` the
// number of steps.
BinaryFit fit_svm_dense(const BinaryProblem& problem, const SolverOptions& options);

// For fixed scores z_i = w . x_i, the bias minimizing
// sum_i cost_i * max(0, 1 - y_i (z_i + b)) (exact, by a breakpoint sweep).
double optimal_hinge_bias(std::span<const double> z, std::span<const double> y,
                          std::span<const double> cost);

struct LinearModel {
  LinearKind kind = LinearKind::kLogistic;
  std::size_t dim = 0;
  std::vector<double> weights;  // num_classes x dim, row-major
  std::vector<double> bias;
  std::vector<corpus::ClassLabel> classes;
  std::uint64_t feature_space_id = 0;
  double c = 1.0;

  std::size_t num_classes() const { return classes.size(); }
  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(weights).subspan(k * dim, dim);
  }
  // Throws Error(kModelMismatch) on inconsistent shapes or non-finite entries.
  void validate() const;
};

struct TrainLog {
  std::vector<std::vector<double>> trajectories;  // one per class
};

LinearModel train_linear(LinearKind kind, std::span<const SparseVector> x, std::span<const int> y,
                         const std::vector<corpus::ClassLabel>& classes, double c,
                         std::span<const double> class_weights, std::size_t dim,
                         std::uint64_t feature_space_id, std::uint64_t seed,
                         const SolverOptions& options = {}, TrainLog* log = nullptr);

std::vector<double> decision_scores(const LinearModel& model, const SparseVector& x);

// Per-class sigmoid renormalized over classes, computed in the log domain.
std::vector<double> scores_to_proba(std::span<const double> scores);
std::vector<double> predict_proba(const LinearModel& model, const SparseVector& x);

// Argmax with ties to the lowest index.
int argmax(std::span<const double> values);
int predict(const LinearModel& model, const SparseVector& x);

}  // namespace namecraft::linear

#endif  // NAMECRAFT_CORE_LINEAR_HPP_
