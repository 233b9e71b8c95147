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

// Model files: a JSON envelope
//
//   {"format": "namecraft-model", "format_version": 1, "model_kind": ...,
//    "mode": ..., "classes": [...], "preprocess": {...}, "seed": ...,
//    "training_config": {...}, "payload": {...}}
//
// with real tensors stored as {"dtype": "<f8", "shape": [...], "data": base64}
// of little-endian IEEE doubles. Keys are emitted in sorted order, so a
// save -> load -> save cycle reproduces the file byte for byte.

#ifndef NAMECRAFT_CORE_MODEL_FILE_HPP_
#define NAMECRAFT_CORE_MODEL_FILE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/model.hpp"

namespace namecraft {

inline constexpr int kModelFormatVersion = 1;

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws Error(kSchema) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

nlohmann::json tensor_to_json(std::span<const double> values, const std::vector<int>& shape);
std::vector<double> tensor_from_json(const nlohmann::json& j, const std::vector<int>& expected_shape);

nlohmann::json cnn_config_to_json(const cnn::CnnConfig& config);
cnn::CnnConfig cnn_config_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const Model& model);
// Throws Error(kVersion) for another format version, Error(kSchema) for
// malformed documents and Error(kModelMismatch) for inconsistent payloads.
Model model_from_json(const nlohmann::json& j);

std::string serialize_model(const Model& model);
Model deserialize_model(std::string_view text);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace namecraft

#endif  // NAMECRAFT_CORE_MODEL_FILE_HPP_
