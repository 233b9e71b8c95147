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

#include "core/model_file.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace namecraft {

using nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json preprocess_to_json(const corpus::PreprocessConfig& p) {
  return json{{"part_open", std::string(1, p.part_open)},
              {"part_close", std::string(1, p.part_close)},
              {"name_separator", std::string(1, p.name_separator)}};
}

char single_char(const json& j, const char* key) {
  const auto s = j.at(key).get<std::string>();
  require(s.size() == 1, ErrorCode::kSchema, std::string(key) + " must be one character");
  return s[0];
}

corpus::PreprocessConfig preprocess_from_json(const json& j) {
  corpus::PreprocessConfig p;
  p.part_open = single_char(j, "part_open");
  p.part_close = single_char(j, "part_close");
  p.name_separator = single_char(j, "name_separator");
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kSchema, e.what());
  }
  return p;
}

json linear_payload(const Model& m) {
  const auto& fs = m.features;
  const auto& lm = m.linear;
  const int k = static_cast<int>(lm.num_classes());
  const int dim = static_cast<int>(lm.dim);
  return json{{"feature_space",
               {{"max_n", fs.max_n()},
                {"n_docs", fs.n_docs()},
                {"tokens", fs.tokens()},
                {"df", fs.df()},
                {"idf", tensor_to_json(fs.idf(), {static_cast<int>(fs.size())})},
                {"fingerprint", hex64(fs.fingerprint())}}},
              {"c", lm.c},
              {"weights", tensor_to_json(lm.weights, {k, dim})},
              {"bias", tensor_to_json(lm.bias, {k})}};
}

void linear_from_payload(const json& p, Model& m) {
  const auto& f = p.at("feature_space");
  m.features = featurizer::FeatureSpace::from_parts(
      f.at("max_n").get<int>(), f.at("n_docs").get<std::int64_t>(),
      f.at("tokens").get<std::vector<std::string>>(), f.at("df").get<std::vector<std::int64_t>>());
  const auto idf = tensor_from_json(f.at("idf"), {static_cast<int>(m.features.size())});
  require(std::memcmp(idf.data(), m.features.idf().data(), idf.size() * sizeof(double)) == 0,
          ErrorCode::kModelMismatch, "stored idf does not match the document frequencies");
  require(f.at("fingerprint").get<std::string>() == hex64(m.features.fingerprint()),
          ErrorCode::kModelMismatch, "feature space fingerprint mismatch");
  auto& lm = m.linear;
  lm.kind = m.kind == ModelKind::kSvm ? linear::LinearKind::kSvm : linear::LinearKind::kLogistic;
  lm.dim = m.features.size();
  lm.classes = m.classes;
  lm.feature_space_id = m.features.fingerprint();
  lm.c = p.at("c").get<double>();
  const int k = static_cast<int>(m.classes.size());
  lm.weights = tensor_from_json(p.at("weights"), {k, static_cast<int>(lm.dim)});
  lm.bias = tensor_from_json(p.at("bias"), {k});
  lm.validate();
}

json cnn_payload(const Model& m) {
  const auto& c = m.cnn;
  json tensors = json::array();
  for (const auto& s : cnn::tensor_slices(c.layout)) {
    json t = tensor_to_json(std::span<const double>(c.params).subspan(s.offset, s.size), s.shape);
    t["name"] = s.name;
    tensors.push_back(std::move(t));
  }
  return json{{"config", cnn_config_to_json(c.config)},
              {"tensors", tensors},
              {"running_mean", tensor_to_json(c.running_mean, {c.layout.pooled})},
              {"running_var", tensor_to_json(c.running_var, {c.layout.pooled})}};
}

void cnn_from_payload(const json& p, Model& m) {
  m.cnn = cnn::CnnModel::zeros(cnn_config_from_json(p.at("config")), m.classes);
  const auto slices = cnn::tensor_slices(m.cnn.layout);
  const auto& tensors = p.at("tensors");
  require(tensors.is_array() && tensors.size() == slices.size(), ErrorCode::kModelMismatch,
          "CNN tensor list does not match the configuration");
  for (std::size_t i = 0; i < slices.size(); ++i) {
    require(tensors[i].at("name").get<std::string>() == slices[i].name, ErrorCode::kModelMismatch,
            "unexpected CNN tensor " + tensors[i].at("name").get<std::string>());
    const auto v = tensor_from_json(tensors[i], slices[i].shape);
    std::copy(v.begin(), v.end(), m.cnn.params.begin() + static_cast<std::ptrdiff_t>(slices[i].offset));
  }
  m.cnn.running_mean = tensor_from_json(p.at("running_mean"), {m.cnn.layout.pooled});
  m.cnn.running_var = tensor_from_json(p.at("running_var"), {m.cnn.layout.pooled});
  m.cnn.validate();
}

json stage2_payload(const Model& m) {
  json mask = json::array();
  for (int i = 0; i < twostage::kPoolSize; ++i) {
    if (m.stage2.mask[static_cast<std::size_t>(i)]) mask.push_back(twostage::feature_name(i));
  }
  const double bias = m.stage2.bias;
  return json{{"stage1", model_to_json(*m.stage1)},
              {"stage2",
               {{"features", mask},
                {"weights", tensor_to_json(m.stage2.weights, {static_cast<int>(m.stage2.weights.size())})},
                {"bias", tensor_to_json(std::span<const double>(&bias, 1), {1})},
                {"c", m.stage2.c}}},
              {"positive_class", m.classes[static_cast<std::size_t>(m.positive_class)].name}};
}

void stage2_from_payload(const json& p, Model& m) {
  auto stage1 = std::make_shared<Model>(model_from_json(p.at("stage1")));
  require(stage1->kind != ModelKind::kTwoStage && stage1->kind != ModelKind::kN2c,
          ErrorCode::kModelMismatch, "stage one must be a probabilistic single-name model");
  require(stage1->classes == m.classes, ErrorCode::kModelMismatch, "stage one classes differ");
  m.stage1 = std::move(stage1);
  const auto& s2 = p.at("stage2");
  twostage::FeatureMask mask{};
  for (const auto& f : s2.at("features")) {
    const auto name = f.get<std::string>();
    bool found = false;
    for (int i = 0; i < twostage::kPoolSize; ++i) {
      if (name == twostage::feature_name(i)) {
        mask[static_cast<std::size_t>(i)] = true;
        found = true;
      }
    }
    require(found, ErrorCode::kSchema, "unknown stage-2 feature " + name);
  }
  m.stage2.mask = mask;
  m.stage2.weights = tensor_from_json(s2.at("weights"), {twostage::active_count(mask)});
  m.stage2.bias = tensor_from_json(s2.at("bias"), {1})[0];
  m.stage2.c = s2.at("c").get<double>();
  const auto pos = p.at("positive_class").get<std::string>();
  m.positive_class = -1;
  for (const auto& c : m.classes) {
    if (c.name == pos) m.positive_class = c.id;
  }
  require(m.positive_class >= 0 && m.classes.size() == 2, ErrorCode::kModelMismatch,
          "two-stage models need two classes and a known positive class");
  m.stage2.positive_class = pos;
  m.stage2.negative_class = m.classes[static_cast<std::size_t>(1 - m.positive_class)].name;
  m.stage2.validate();
}

}  // namespace

json cnn_config_to_json(const cnn::CnnConfig& c) {
  return json{{"alphabet", c.alphabet},
              {"max_len", c.max_len},
              {"embed_dim", c.embed_dim},
              {"kernel_sizes", c.kernel_sizes},
              {"filters", c.filters},
              {"activation", cnn::activation_name(c.activation)},
              {"dense_units", c.dense_units},
              {"dropout_embed", c.dropout_embed},
              {"dropout", c.dropout},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"min_learning_rate", c.min_learning_rate},
              {"plateau_factor", c.plateau_factor},
              {"patience", c.patience},
              {"init", cnn::init_name(c.init)},
              {"batch_norm", c.batch_norm}};
}

cnn::CnnConfig cnn_config_from_json(const json& j) {
  cnn::CnnConfig c;
  c.alphabet = j.at("alphabet").get<std::string>();
  c.max_len = j.at("max_len").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.kernel_sizes = j.at("kernel_sizes").get<std::vector<int>>();
  c.filters = j.at("filters").get<std::vector<int>>();
  c.activation = cnn::parse_activation(j.at("activation").get<std::string>());
  c.dense_units = j.at("dense_units").get<int>();
  c.dropout_embed = j.at("dropout_embed").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.min_learning_rate = j.at("min_learning_rate").get<double>();
  c.plateau_factor = j.at("plateau_factor").get<double>();
  c.patience = j.at("patience").get<int>();
  c.init = cnn::parse_init(j.at("init").get<std::string>());
  c.batch_norm = j.at("batch_norm").get<bool>();
  return c;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  require(text.size() % 4 == 0, ErrorCode::kSchema, "base64 length must be a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=' && last && j >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = decode_char(c);
      require(d >= 0 && pad == 0, ErrorCode::kSchema, "invalid base64 data");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

json tensor_to_json(std::span<const double> values, const std::vector<int>& shape) {
  std::vector<std::uint8_t> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return json{{"dtype", "<f8"}, {"shape", shape}, {"data", base64_encode(bytes)}};
}

std::vector<double> tensor_from_json(const json& j, const std::vector<int>& expected_shape) {
  require(j.at("dtype").get<std::string>() == "<f8", ErrorCode::kSchema, "tensors must be <f8");
  const auto shape = j.at("shape").get<std::vector<int>>();
  require(shape == expected_shape, ErrorCode::kModelMismatch, "tensor shape does not match the model");
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  const auto bytes = base64_decode(j.at("data").get<std::string>());
  require(bytes.size() == n * 8, ErrorCode::kModelMismatch, "tensor data length does not match its shape");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic: return "lr";
    case ModelKind::kSvm: return "svm";
    case ModelKind::kCnn: return "cnn";
    case ModelKind::kN2c: return "n2c";
    case ModelKind::kTwoStage: return "two_stage";
  }
  return "lr";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "lr") return ModelKind::kLogistic;
  if (s == "svm") return ModelKind::kSvm;
  if (s == "cnn") return ModelKind::kCnn;
  if (s == "n2c") return ModelKind::kN2c;
  if (s == "two_stage" || s == "two-stage") return ModelKind::kTwoStage;
  fail(ErrorCode::kInvalidArgument, "unknown model kind '" + std::string(s) + "'");
}

const char* load_mode_name(corpus::LoadMode mode) {
  return mode == corpus::LoadMode::kConcat ? "concat" : "single";
}

corpus::LoadMode parse_load_mode(std::string_view s) {
  if (s == "single") return corpus::LoadMode::kSingle;
  if (s == "concat") return corpus::LoadMode::kConcat;
  fail(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(s) + "'");
}

json model_to_json(const Model& m) {
  json classes = json::array();
  for (const auto& c : m.classes) classes.push_back(c.name);
  json payload;
  switch (m.kind) {
    case ModelKind::kLogistic:
    case ModelKind::kSvm: payload = linear_payload(m); break;
    case ModelKind::kCnn: payload = cnn_payload(m); break;
    case ModelKind::kN2c:
      payload = json{{"reference", json::parse(m.reference.to_json())},
                     {"majority_tiebreak", m.majority_tiebreak}};
      break;
    case ModelKind::kTwoStage: payload = stage2_payload(m); break;
  }
  return json{{"format", "namecraft-model"},
              {"format_version", kModelFormatVersion},
              {"model_kind", model_kind_name(m.kind)},
              {"mode", load_mode_name(m.mode)},
              {"classes", classes},
              {"preprocess", preprocess_to_json(m.preprocess)},
              {"seed", m.seed},
              {"training_config", m.training_config},
              {"payload", payload}};
}

Model model_from_json(const json& j) {
  try {
    require(j.is_object() && j.value("format", std::string()) == "namecraft-model", ErrorCode::kSchema,
            "not a namecraft model file");
    const int version = j.at("format_version").get<int>();
    require(version == kModelFormatVersion, ErrorCode::kVersion,
            "model format version " + std::to_string(version) + " is not supported (expected " +
                std::to_string(kModelFormatVersion) + ")");
    Model m;
    m.kind = parse_model_kind(j.at("model_kind").get<std::string>());
    m.mode = parse_load_mode(j.at("mode").get<std::string>());
    const auto names = j.at("classes").get<std::vector<std::string>>();
    require(!names.empty(), ErrorCode::kSchema, "model has no classes");
    for (std::size_t i = 0; i < names.size(); ++i) m.classes.push_back({static_cast<int>(i), names[i]});
    m.preprocess = preprocess_from_json(j.at("preprocess"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.training_config = j.at("training_config");
    const auto& p = j.at("payload");
    switch (m.kind) {
      case ModelKind::kLogistic:
      case ModelKind::kSvm: linear_from_payload(p, m); break;
      case ModelKind::kCnn: cnn_from_payload(p, m); break;
      case ModelKind::kN2c:
        m.reference = n2c::ReferenceList::from_json(p.at("reference").dump());
        m.majority_tiebreak = p.at("majority_tiebreak").get<bool>();
        require(m.reference.classes == m.classes, ErrorCode::kModelMismatch,
                "reference list classes differ from the model classes");
        break;
      case ModelKind::kTwoStage: stage2_from_payload(p, m); break;
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, std::string("malformed model file: ") + e.what());
  }
}

std::string serialize_model(const Model& model) { return model_to_json(model).dump(1) + "\n"; }

Model deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

void save_model(const Model& model, const std::string& path) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize_model(ss.str());
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

}  // namespace namecraft
