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

// A trained classifier of any kind plus the metadata needed to apply it.

#ifndef NAMECRAFT_CORE_MODEL_HPP_
#define NAMECRAFT_CORE_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "core/cnn.hpp"
#include "core/corpus.hpp"
#include "core/featurizer.hpp"
#include "core/linear.hpp"
#include "core/n2c.hpp"
#include "core/twostage.hpp"
#include "json.hpp"

namespace namecraft {

enum class ModelKind { kLogistic, kSvm, kCnn, kN2c, kTwoStage };

// "lr", "svm", "cnn", "n2c", "two_stage".
const char* model_kind_name(ModelKind kind);
// Accepts the names above and "two-stage". Throws Error(kInvalidArgument).
ModelKind parse_model_kind(std::string_view s);

const char* load_mode_name(corpus::LoadMode mode);
corpus::LoadMode parse_load_mode(std::string_view s);

struct Model {
  ModelKind kind = ModelKind::kLogistic;
  corpus::LoadMode mode = corpus::LoadMode::kSingle;
  std::vector<corpus::ClassLabel> classes;
  corpus::PreprocessConfig preprocess;
  std::uint64_t seed = 0;
  nlohmann::json training_config = nlohmann::json::object();

  // lr / svm
  featurizer::FeatureSpace features;
  linear::LinearModel linear;
  // cnn
  cnn::CnnModel cnn;
  // n2c
  n2c::ReferenceList reference;
  bool majority_tiebreak = false;
  // two_stage
  std::shared_ptr<const Model> stage1;
  twostage::StageTwoModel stage2;
  int positive_class = 0;

  std::size_t num_classes() const { return classes.size(); }
};

}  // namespace namecraft

#endif  // NAMECRAFT_CORE_MODEL_HPP_
