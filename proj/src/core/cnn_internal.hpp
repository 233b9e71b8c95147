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

// Batched forward/backward shared by training and the gradient checks.

#ifndef NAMECRAFT_CORE_CNN_INTERNAL_HPP_
#define NAMECRAFT_CORE_CNN_INTERNAL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "core/cnn.hpp"
#include "core/rng.hpp"

namespace namecraft::cnn::detail {

inline constexpr double kBnEpsilon = 1e-3;
inline constexpr double kBnMomentum = 0.99;

struct PassOptions {
  bool batch_stats = false;  // batch-norm from the batch instead of running stats
  Rng* dropout_rng = nullptr;  // null disables dropout
  std::span<const double> weights;  // per-example loss weights; empty = 1
};

struct PassResult {
  double loss = 0.0;  // mean over the batch
  std::uint64_t argmax_signature = 0;
  std::vector<double> batch_mean;  // filled when batch_stats
  std::vector<double> batch_var;   // biased
};

// Runs the batch forward; when `gradient` is non-null it is resized to the
// parameter count and receives the gradient of the mean loss.
PassResult batch_pass(const CnnModel& model, std::span<const std::vector<int>> ids,
                      std::span<const int> labels, const PassOptions& options,
                      std::vector<ForwardCache>& caches, std::vector<double>* gradient);

}  // namespace namecraft::cnn::detail

#endif  // NAMECRAFT_CORE_CNN_INTERNAL_HPP_
