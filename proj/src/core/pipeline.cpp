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

#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/model_file.hpp"
#include "core/rng.hpp"
#include "core/synthetic.hpp"

namespace namecraft::pipeline {

using nlohmann::json;

namespace {

enum class ValueType { kInt, kDouble, kBool, kIntList, kDoubleList, kText };

const std::vector<std::pair<std::string, ValueType>>& key_table() {
  static const std::vector<std::pair<std::string, ValueType>> table = {
      {"c", ValueType::kDouble},
      {"max_n", ValueType::kInt},
      {"max_iter", ValueType::kInt},
      {"tol", ValueType::kDouble},
      {"split", ValueType::kDoubleList},
      {"classes", ValueType::kText},
      {"bootstrap", ValueType::kInt},
      {"max_len", ValueType::kInt},
      {"embed_dim", ValueType::kInt},
      {"kernel_sizes", ValueType::kIntList},
      {"filters", ValueType::kIntList},
      {"dense_units", ValueType::kInt},
      {"activation", ValueType::kText},
      {"init", ValueType::kText},
      {"dropout_embed", ValueType::kDouble},
      {"dropout", ValueType::kDouble},
      {"batch_size", ValueType::kInt},
      {"epochs", ValueType::kInt},
      {"learning_rate", ValueType::kDouble},
      {"min_learning_rate", ValueType::kDouble},
      {"plateau_factor", ValueType::kDouble},
      {"patience", ValueType::kInt},
      {"batch_norm", ValueType::kBool},
      {"majority_tiebreak", ValueType::kBool},
      {"stage1", ValueType::kText},
      {"positive_class", ValueType::kText},
      {"stage2_c", ValueType::kDouble},
      {"rfe", ValueType::kBool},
  };
  return table;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

long long parse_int(std::string_view key, std::string_view v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  require(!t.empty() && end == t.c_str() + t.size() && errno == 0, ErrorCode::kInvalidArgument,
          std::string(key) + ": not an integer: " + t);
  return x;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  require(!t.empty() && end == t.c_str() + t.size() && std::isfinite(x), ErrorCode::kInvalidArgument,
          std::string(key) + ": not a number: " + t);
  return x;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  fail(ErrorCode::kInvalidArgument, std::string(key) + ": expected true or false, got " + t);
}

std::vector<int> parse_int_list(std::string_view key, std::string_view v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<int>(parse_int(key, item)));
  return out;
}

std::vector<double> parse_double_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
  return out;
}

double opt_double(const TrainOptions& o, const std::string& key, double fallback) {
  return o.has(key) ? parse_double(key, o.get(key)) : fallback;
}

int opt_int(const TrainOptions& o, const std::string& key, int fallback) {
  return o.has(key) ? static_cast<int>(parse_int(key, o.get(key))) : fallback;
}

bool opt_bool(const TrainOptions& o, const std::string& key, bool fallback) {
  return o.has(key) ? parse_bool(key, o.get(key)) : fallback;
}

std::vector<std::string> primary_names(const corpus::Dataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) out.push_back(r.primary_name);
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Table 5 defaults.
double default_c(ModelKind kind, corpus::LoadMode mode) {
  const bool single = mode == corpus::LoadMode::kSingle;
  if (kind == ModelKind::kSvm) return single ? 79.53 : 8.47;
  return single ? 64.49 : 33.39;
}

int default_max_n(ModelKind kind, corpus::LoadMode mode) {
  if (mode == corpus::LoadMode::kConcat) return 10;
  return kind == ModelKind::kSvm ? 11 : 12;
}

cnn::CnnConfig resolve_cnn_config(const TrainOptions& o, corpus::LoadMode mode) {
  cnn::CnnConfig c = mode == corpus::LoadMode::kConcat ? cnn::CnnConfig::concat_defaults()
                                                       : cnn::CnnConfig::single_defaults();
  c.max_len = opt_int(o, "max_len", c.max_len);
  c.embed_dim = opt_int(o, "embed_dim", c.embed_dim);
  if (o.has("kernel_sizes")) c.kernel_sizes = parse_int_list("kernel_sizes", o.get("kernel_sizes"));
  if (o.has("filters")) {
    c.filters = parse_int_list("filters", o.get("filters"));
    // One count for every kernel size.
    if (c.filters.size() == 1 && c.kernel_sizes.size() > 1) c.filters.resize(c.kernel_sizes.size(), c.filters[0]);
  } else if (o.has("kernel_sizes") && c.filters.size() != c.kernel_sizes.size()) {
    c.filters.resize(c.kernel_sizes.size(), c.filters.back());
  }
  c.dense_units = opt_int(o, "dense_units", c.dense_units);
  if (o.has("activation")) c.activation = cnn::parse_activation(o.get("activation"));
  if (o.has("init")) c.init = cnn::parse_init(o.get("init"));
  c.dropout_embed = opt_double(o, "dropout_embed", c.dropout_embed);
  c.dropout = opt_double(o, "dropout", c.dropout);
  c.batch_size = opt_int(o, "batch_size", c.batch_size);
  c.epochs = opt_int(o, "epochs", c.epochs);
  c.learning_rate = opt_double(o, "learning_rate", c.learning_rate);
  c.min_learning_rate = opt_double(o, "min_learning_rate", c.min_learning_rate);
  c.plateau_factor = opt_double(o, "plateau_factor", c.plateau_factor);
  c.patience = opt_int(o, "patience", c.patience);
  c.batch_norm = opt_bool(o, "batch_norm", c.batch_norm);
  c.validate();
  return c;
}

linear::SolverOptions resolve_solver(const TrainOptions& o) {
  linear::SolverOptions s;
  s.max_iterations = opt_int(o, "max_iter", s.max_iterations);
  s.tolerance = opt_double(o, "tol", s.tolerance);
  require(s.max_iterations > 0 && s.tolerance > 0.0, ErrorCode::kInvalidArgument,
          "max_iter and tol must be positive");
  return s;
}

// Trains one single-stage model on `train` (augmented in single mode); `val`
// drives CNN checkpointing.
Model fit_model(ModelKind kind, corpus::LoadMode mode, const corpus::Dataset& train_split,
                const corpus::Dataset& val_split, const TrainOptions& o, json& cfg,
                std::string* history_csv) {
  const corpus::Dataset tr = mode == corpus::LoadMode::kSingle ? corpus::augment_single(train_split) : train_split;
  const auto labels = tr.labels();
  const int k = static_cast<int>(tr.num_classes());
  const auto weights = corpus::class_weights(labels, k);

  Model m;
  m.kind = kind;
  m.mode = mode;
  m.classes = tr.classes;
  m.seed = o.seed;
  cfg["model"] = model_kind_name(kind);
  cfg["mode"] = load_mode_name(mode);
  cfg["train_records"] = tr.size();

  switch (kind) {
    case ModelKind::kLogistic:
    case ModelKind::kSvm: {
      const double c = opt_double(o, "c", default_c(kind, mode));
      const int max_n = opt_int(o, "max_n", default_max_n(kind, mode));
      require(c > 0.0, ErrorCode::kInvalidArgument, "c must be positive");
      const auto solver = resolve_solver(o);
      const auto names = primary_names(tr);
      m.features = featurizer::fit_vocab(names, max_n);
      std::vector<featurizer::SparseVector> x;
      x.reserve(names.size());
      for (const auto& n : names) x.push_back(featurizer::tfidf_vector(n, m.features));
      const auto lk = kind == ModelKind::kSvm ? linear::LinearKind::kSvm : linear::LinearKind::kLogistic;
      m.linear = linear::train_linear(lk, x, labels, m.classes, c, weights, m.features.size(),
                                      m.features.fingerprint(), o.seed, solver);
      cfg["c"] = c;
      cfg["max_n"] = max_n;
      cfg["max_iter"] = solver.max_iterations;
      cfg["tol"] = solver.tolerance;
      cfg["vocabulary"] = m.features.size();
      break;
    }
    case ModelKind::kCnn: {
      const auto config = resolve_cnn_config(o, mode);
      const auto names = primary_names(tr);
      const auto val_names = primary_names(val_split);
      const auto val_labels = val_split.labels();
      auto res = cnn::train_cnn(config, m.classes, names, labels, val_names, val_labels, weights, o.seed);
      m.cnn = std::move(res.model);
      if (history_csv) *history_csv = res.history.to_csv();
      cfg["cnn"] = cnn_config_to_json(m.cnn.config);
      break;
    }
    case ModelKind::kN2c: {
      m.reference = n2c::build_reference(tr);
      m.majority_tiebreak = opt_bool(o, "majority_tiebreak", false);
      cfg["majority_tiebreak"] = m.majority_tiebreak;
      cfg["q_s"] = m.reference.q_s;
      cfg["q_p"] = m.reference.q_p;
      break;
    }
    case ModelKind::kTwoStage:
      fail(ErrorCode::kInternal, "two-stage models are trained by train()");
  }
  return m;
}

std::vector<twostage::ProbPair> stage1_pairs(const Model& stage1, const corpus::Dataset& ds, int positive) {
  std::vector<twostage::ProbPair> pairs(ds.size());
  parallel_for(ds.size(), resolve_threads(0), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& r = ds.records[i];
      const double p1 = class_probabilities(stage1, r.primary_name)[static_cast<std::size_t>(positive)];
      const double p2 = r.relative_name
                            ? class_probabilities(stage1, *r.relative_name)[static_cast<std::size_t>(positive)]
                            : p1;
      pairs[i] = {p1, p2};
    }
  });
  return pairs;
}

std::vector<int> binary_labels(const corpus::Dataset& ds, int positive) {
  std::vector<int> out;
  out.reserve(ds.size());
  for (int y : ds.labels()) out.push_back(y == positive ? 1 : 0);
  return out;
}

json mask_json(const twostage::FeatureMask& mask) {
  json out = json::array();
  for (int i = 0; i < twostage::kPoolSize; ++i) {
    if (mask[static_cast<std::size_t>(i)]) out.push_back(twostage::feature_name(i));
  }
  return out;
}

int pick_positive_class(const TrainOptions& o, const corpus::Dataset& ds, const corpus::Dataset& train_split) {
  if (o.has("positive_class")) {
    const int id = ds.class_id(o.get("positive_class"));
    require(id >= 0, ErrorCode::kInvalidArgument, "unknown positive class " + o.get("positive_class"));
    return id;
  }
  const int muslim = ds.class_id("Muslim");
  if (muslim >= 0) return muslim;
  std::vector<long> counts(ds.num_classes(), 0);
  for (int y : train_split.labels()) ++counts[static_cast<std::size_t>(y)];
  return static_cast<int>(std::min_element(counts.begin(), counts.end()) - counts.begin());
}

eval::MetricsReport report_for(const Model& m, const corpus::Dataset& ds, const std::string& split,
                               int resamples, std::uint64_t seed) {
  const auto pred = predict_dataset(m, ds, resolve_threads(0));
  return eval::evaluate(pred, ds.labels(), m.classes, split, resamples, seed);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed: " + path.string());
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, rank == 0 ? 0 : rank - 1)];
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("NAMECRAFT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<long>(n, cap);
  }
  return n;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
  if (workers <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = n * w / workers, e = n * (w + 1) / workers;
    pool.emplace_back([&, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

const std::vector<std::string>& known_train_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"model", "mode", "data", "seed"};
    for (const auto& [name, type] : key_table()) k.push_back(name);
    return k;
  }();
  return keys;
}

void TrainOptions::set(std::string_view key, std::string_view value) {
  if (key == "model") {
    kind = parse_model_kind(trim(value));
    return;
  }
  if (key == "mode") {
    mode = parse_load_mode(trim(value));
    return;
  }
  if (key == "data") {
    data = std::string(value);
    return;
  }
  if (key == "seed") {
    const auto s = parse_int(key, value);
    require(s >= 0, ErrorCode::kInvalidArgument, "seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
    return;
  }
  const auto& table = key_table();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
  require(it != table.end(), ErrorCode::kInvalidArgument, "unknown training option " + std::string(key));
  switch (it->second) {
    case ValueType::kInt: parse_int(key, value); break;
    case ValueType::kDouble: parse_double(key, value); break;
    case ValueType::kBool: parse_bool(key, value); break;
    case ValueType::kIntList: parse_int_list(key, value); break;
    case ValueType::kDoubleList: parse_double_list(key, value); break;
    case ValueType::kText:
      if (key == "activation") cnn::parse_activation(trim(value));
      if (key == "init") cnn::parse_init(trim(value));
      if (key == "stage1") parse_model_kind(trim(value));
      break;
  }
  values_[std::string(key)] = std::string(value);
}

TrainResult train(const TrainOptions& o) {
  require(!o.data.empty(), ErrorCode::kInvalidArgument, "no training data given");
  const bool two_stage = o.kind == ModelKind::kTwoStage;
  if (two_stage) {
    require(o.mode == corpus::LoadMode::kSingle, ErrorCode::kInvalidArgument,
            "the two-stage model scores each name separately; use --mode single");
  }

  corpus::LoadOptions lo;
  lo.mode = o.mode;
  if (o.has("classes")) lo.class_names = split_list(o.get("classes"));
  const corpus::Dataset ds = corpus::load_dataset(o.data, lo);
  require(ds.num_classes() >= 2, ErrorCode::kInvalidArgument, "training needs at least two classes");

  corpus::SplitRatios ratios = two_stage ? corpus::SplitRatios{0.8, 0.1, 0.1} : corpus::SplitRatios{};
  if (o.has("split")) {
    const auto v = parse_double_list("split", o.get("split"));
    require(v.size() == 3, ErrorCode::kInvalidArgument, "split needs three ratios");
    ratios = {v[0], v[1], v[2]};
  }
  const auto sp = corpus::split_dataset(ds, ratios, o.seed);
  require(!sp.train.records.empty() && !sp.validation.records.empty() && !sp.test.records.empty(),
          ErrorCode::kEmptyDataset, "a split is empty; the data set is too small");
  const int resamples = opt_int(o, "bootstrap", 1000);

  TrainResult r;
  json cfg = json::object();
  cfg["split"] = {ratios.train, ratios.validation, ratios.test};
  cfg["bootstrap"] = resamples;
  if (o.has("classes")) cfg["classes"] = o.get("classes");
  r.details["records"] = {{"total", ds.size()},
                          {"train", sp.train.size()},
                          {"validation", sp.validation.size()},
                          {"test", sp.test.size()}};

  if (!two_stage) {
    r.model = fit_model(o.kind, o.mode, sp.train, sp.validation, o, cfg, &r.history_csv);
    r.model.training_config = cfg;
  } else {
    require(ds.num_classes() == 2, ErrorCode::kInvalidArgument, "the two-stage model needs exactly two classes");
    const ModelKind k1 = o.has("stage1") ? parse_model_kind(trim(o.get("stage1"))) : ModelKind::kLogistic;
    require(k1 == ModelKind::kLogistic || k1 == ModelKind::kSvm || k1 == ModelKind::kCnn,
            ErrorCode::kInvalidArgument, "stage one must be lr, svm or cnn");
    const int pos = pick_positive_class(o, ds, sp.train);
    json cfg1 = json::object();
    auto stage1 = std::make_shared<Model>(
        fit_model(k1, corpus::LoadMode::kSingle, sp.train, sp.validation, o, cfg1, &r.history_csv));
    stage1->training_config = cfg1;

    const auto pairs = stage1_pairs(*stage1, sp.validation, pos);
    const auto labels = binary_labels(sp.validation, pos);
    const double c2 = opt_double(o, "stage2_c", 1.0);
    require(c2 > 0.0, ErrorCode::kInvalidArgument, "stage2_c must be positive");
    const bool use_rfe = opt_bool(o, "rfe", true);

    twostage::FeatureMask mask = twostage::full_mask();
    if (use_rfe) {
      // Fit on one half of the validation split, select on the other.
      std::vector<std::size_t> idx(pairs.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      Rng rng(mix_seed(o.seed, 77));
      rng.shuffle(idx);
      const std::size_t half = idx.size() / 2;
      std::vector<twostage::ProbPair> tp, vp;
      std::vector<int> tl, vl;
      for (std::size_t j = 0; j < idx.size(); ++j) {
        (j < half ? tp : vp).push_back(pairs[idx[j]]);
        (j < half ? tl : vl).push_back(labels[idx[j]]);
      }
      auto both = [](const std::vector<int>& v) {
        return std::count(v.begin(), v.end(), 1) > 0 && std::count(v.begin(), v.end(), 0) > 0;
      };
      if (both(tl) && both(vl)) {
        const auto sel = twostage::rfe_select(twostage::full_mask(), tp, tl, vp, vl, c2);
        mask = sel.mask;
        json path = json::array();
        for (const auto& step : sel.path) {
          path.push_back({{"features", mask_json(step.mask)}, {"val_macro_recall", step.val_macro_recall}});
        }
        r.details["rfe_path"] = path;
      } else {
        r.details["rfe_skipped"] = "a validation half lacks one of the classes";
      }
    }
    auto stage2 = twostage::train_stage2(pairs, labels, c2, mask);
    stage2.positive_class = ds.classes[static_cast<std::size_t>(pos)].name;
    stage2.negative_class = ds.classes[static_cast<std::size_t>(1 - pos)].name;

    Model& m = r.model;
    m.kind = ModelKind::kTwoStage;
    m.mode = corpus::LoadMode::kSingle;
    m.classes = ds.classes;
    m.seed = o.seed;
    m.stage1 = stage1;
    m.stage2 = std::move(stage2);
    m.positive_class = pos;
    cfg["model"] = model_kind_name(ModelKind::kTwoStage);
    cfg["mode"] = load_mode_name(corpus::LoadMode::kSingle);
    cfg["stage1"] = cfg1;
    cfg["stage2_c"] = c2;
    cfg["rfe"] = use_rfe;
    cfg["positive_class"] = ds.classes[static_cast<std::size_t>(pos)].name;
    cfg["stage2_features"] = mask_json(m.stage2.mask);
    m.training_config = cfg;
    r.stage1_test = report_for(*stage1, sp.test, "test (stage one)", resamples, mix_seed(o.seed, 1003));
  }

  r.validation = report_for(r.model, sp.validation, "validation", resamples, mix_seed(o.seed, 1001));
  r.test = report_for(r.model, sp.test, "test", resamples, mix_seed(o.seed, 1002));
  return r;
}

std::string TrainResult::summary_text() const {
  std::string out = std::string("model ") + model_kind_name(model.kind) + " (" + load_mode_name(model.mode) +
                    "), records train/validation/test = " + details["records"]["train"].dump() + "/" +
                    details["records"]["validation"].dump() + "/" + details["records"]["test"].dump() + "\n";
  out += validation.to_table();
  out += test.to_table();
  if (stage1_test) out += stage1_test->to_table();
  return out;
}

std::string TrainResult::summary_json() const {
  nlohmann::ordered_json j;
  j["model"] = model_kind_name(model.kind);
  j["mode"] = load_mode_name(model.mode);
  j["seed"] = model.seed;
  j["details"] = details;
  j["validation"] = nlohmann::ordered_json::parse(validation.to_json());
  j["test"] = nlohmann::ordered_json::parse(test.to_json());
  if (stage1_test) j["stage1_test"] = nlohmann::ordered_json::parse(stage1_test->to_json());
  return j.dump(2);
}

std::vector<std::string> score_columns(const Model& m) {
  std::vector<std::string> cols;
  switch (m.kind) {
    case ModelKind::kTwoStage: return {"p1", "p2", "score"};
    case ModelKind::kN2c:
      for (const auto& c : m.classes) cols.push_back("certainty_" + c.name);
      return cols;
    default:
      for (const auto& c : m.classes) cols.push_back("p_" + c.name);
      return cols;
  }
}

std::vector<double> class_probabilities(const Model& m, std::string_view canonical) {
  switch (m.kind) {
    case ModelKind::kLogistic:
    case ModelKind::kSvm:
      return linear::predict_proba(m.linear, featurizer::tfidf_vector(canonical, m.features));
    case ModelKind::kCnn: return cnn::predict_proba(m.cnn, canonical);
    default: fail(ErrorCode::kModelMismatch, "class probabilities need an lr, svm or cnn model");
  }
}

Prediction predict_canonical(const Model& m, std::string_view primary, std::string_view relative) {
  Prediction p;
  std::string joined;
  std::string_view doc = primary;
  if (m.mode == corpus::LoadMode::kConcat && !relative.empty()) {
    joined = corpus::concat_names(primary, relative, m.preprocess);
    doc = joined;
  }
  switch (m.kind) {
    case ModelKind::kLogistic:
    case ModelKind::kSvm: {
      const auto scores = linear::decision_scores(m.linear, featurizer::tfidf_vector(doc, m.features));
      p.label = linear::argmax(scores);
      p.scores = linear::scores_to_proba(scores);
      break;
    }
    case ModelKind::kCnn:
      p.scores = cnn::predict_proba(m.cnn, doc, &p.truncated);
      p.label = linear::argmax(p.scores);
      break;
    case ModelKind::kN2c: {
      auto c = n2c::classify(doc, m.reference, m.majority_tiebreak, m.preprocess);
      p.label = c.label;
      p.scores = std::move(c.certainty);
      break;
    }
    case ModelKind::kTwoStage: {
      const auto pos = static_cast<std::size_t>(m.positive_class);
      bool t1 = false, t2 = false;
      double p1, p2;
      if (m.stage1->kind == ModelKind::kCnn) {
        p1 = cnn::predict_proba(m.stage1->cnn, primary, &t1)[pos];
        p2 = relative.empty() ? p1 : cnn::predict_proba(m.stage1->cnn, relative, &t2)[pos];
      } else {
        p1 = class_probabilities(*m.stage1, primary)[pos];
        p2 = relative.empty() ? p1 : class_probabilities(*m.stage1, relative)[pos];
      }
      const double s = m.stage2.score(p1, p2);
      p.label = s > 0.0 ? m.positive_class : 1 - m.positive_class;
      p.scores = {p1, p2, s};
      p.truncated = t1 || t2;
      break;
    }
  }
  return p;
}

Prediction predict_raw(const Model& m, std::string_view name, std::string_view relative) {
  const std::string primary = corpus::preprocess_name(name, m.preprocess);
  std::string rel;
  if (!trim(relative).empty()) rel = corpus::preprocess_name(relative, m.preprocess);
  return predict_canonical(m, primary, rel);
}

std::vector<int> predict_dataset(const Model& m, const corpus::Dataset& ds, int threads) {
  std::vector<int> out(ds.size());
  const bool pairs = m.kind == ModelKind::kTwoStage;
  parallel_for(ds.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& r = ds.records[i];
      const std::string_view rel = pairs && r.relative_name ? std::string_view(*r.relative_name) : std::string_view();
      out[i] = predict_canonical(m, r.primary_name, rel).label;
    }
  });
  return out;
}

std::string label_text(const Model& m, int label) {
  if (label == eval::kUnclassified) return "UNCLASSIFIED";
  if (label == eval::kAmbiguous) return "AMBIGUOUS";
  return m.classes.at(static_cast<std::size_t>(label)).name;
}

PredictSummary predict_stream(const Model& m, const std::string& path, std::ostream& out,
                              const PredictOptions& options) {
  NameCsvReader reader(path, true);
  const bool with_relative = reader.columns() >= 2;
  const int threads = resolve_threads(options.threads);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_rows);

  out << "name";
  if (with_relative) out << ",relative_name";
  out << ",predicted_class";
  if (options.proba) {
    for (const auto& c : score_columns(m)) out << ',' << csv_escape(c);
  }
  out << '\n';

  PredictSummary summary;
  std::vector<NameCsvReader::Row> rows;
  std::vector<std::string> lines;
  std::vector<int> labels;
  std::vector<char> truncated;
  bool done = false;
  while (!done) {
    rows.clear();
    NameCsvReader::Row row;
    while (rows.size() < chunk) {
      if (!reader.next(row)) {
        done = true;
        break;
      }
      rows.push_back(std::move(row));
    }
    lines.assign(rows.size(), std::string());
    labels.assign(rows.size(), 0);
    truncated.assign(rows.size(), 0);
    std::vector<std::size_t> first_error(static_cast<std::size_t>(threads), rows.size());
    std::vector<std::string> messages(static_cast<std::size_t>(threads));
    std::vector<ErrorCode> codes(static_cast<std::size_t>(threads), ErrorCode::kInternal);
    std::atomic<int> slot{0};
    parallel_for(rows.size(), threads, [&](std::size_t b, std::size_t e) {
      const auto me = static_cast<std::size_t>(slot.fetch_add(1));
      for (std::size_t i = b; i < e; ++i) {
        const auto& r = rows[i];
        try {
          const auto p = predict_raw(m, r.name, r.relative_name);
          std::string line = csv_escape(r.name);
          if (with_relative) line += ',' + csv_escape(r.relative_name);
          line += ',' + csv_escape(label_text(m, p.label));
          if (options.proba) {
            for (double v : p.scores) line += fmt(",%.10g", v);
          }
          line += '\n';
          lines[i] = std::move(line);
          labels[i] = p.label;
          truncated[i] = p.truncated;
        } catch (const Error& err) {
          first_error[me] = i;
          codes[me] = err.code();
          messages[me] = path + ": line " + std::to_string(r.line) + ": " + err.what();
          return;
        }
      }
    });
    std::size_t stop = rows.size();
    std::size_t which = 0;
    for (std::size_t t = 0; t < first_error.size(); ++t) {
      if (first_error[t] < stop) {
        stop = first_error[t];
        which = t;
      }
    }
    for (std::size_t i = 0; i < stop; ++i) {
      out << lines[i];
      ++summary.rows;
      if (labels[i] == eval::kUnclassified) ++summary.unclassified;
      if (labels[i] == eval::kAmbiguous) ++summary.ambiguous;
      if (truncated[i]) ++summary.truncated;
    }
    if (stop < rows.size()) {
      out.flush();
      fail(codes[which], messages[which]);
    }
  }
  out.flush();
  return summary;
}

NameRelevance explain_name(const Model& m, std::string_view canonical, int target) {
  require(m.kind == ModelKind::kCnn, ErrorCode::kModelMismatch, "LRP requires the neural model");
  const auto& c = m.cnn;
  bool truncated = false;
  const auto ids = cnn::encode_truncating(canonical, c.config.alphabet, c.layout.max_len, &truncated);
  const auto map = lrp::lrp_relevance(c, ids, target);
  const auto per_char = lrp::char_relevance(map);
  const std::size_t len = std::min<std::size_t>(canonical.size(), static_cast<std::size_t>(c.layout.max_len));
  NameRelevance nr;
  nr.name = std::string(canonical.substr(0, len));
  nr.relevance.assign(per_char.begin(), per_char.begin() + static_cast<std::ptrdiff_t>(len));
  nr.logit = map.logit;
  nr.bias_absorbed = map.bias_absorbed;
  nr.residual = map.conservation_residual();
  return nr;
}

ExplainSummary explain(const Model& m, const std::string& data_path, const std::string& out_dir,
                       const ExplainOptions& options) {
  require(m.kind == ModelKind::kCnn, ErrorCode::kModelMismatch, "LRP requires the neural model");
  corpus::Dataset lookup;
  lookup.classes = m.classes;
  const int target = lookup.class_id(trim(options.target_class));
  require(target >= 0, ErrorCode::kInvalidArgument, "unknown target class " + options.target_class);
  require(options.bins > 0, ErrorCode::kInvalidArgument, "bins must be positive");
  for (int n : options.ngram_sizes) require(n >= 1, ErrorCode::kInvalidArgument, "n-gram sizes must be positive");

  corpus::LoadOptions lo;
  lo.mode = m.mode;
  lo.preprocess = m.preprocess;
  lo.require_labels = false;
  for (const auto& c : m.classes) lo.class_names.push_back(c.name);
  const auto ds = corpus::load_dataset(data_path, lo);

  const std::size_t n = ds.size();
  std::vector<NameRelevance> rel(n);
  std::vector<int> predicted(n);
  parallel_for(n, resolve_threads(0), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& name = ds.records[i].primary_name;
      rel[i] = explain_name(m, name, target);
      predicted[i] = linear::argmax(cnn::predict_proba(m.cnn, name));
    }
  });

  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), ErrorCode::kIo, "cannot create directory " + out_dir);

  ExplainSummary s;
  s.names = n;
  std::vector<std::string> names;
  std::vector<std::vector<double>> relevances;
  for (std::size_t i = 0; i < n; ++i) {
    s.max_conservation_residual = std::max(s.max_conservation_residual, rel[i].residual);
    s.max_abs_bias_absorbed = std::max(s.max_abs_bias_absorbed, std::abs(rel[i].bias_absorbed));
    if (options.heatmaps) {
      char file[32];
      std::snprintf(file, sizeof file, "heatmap_%05zu.html", i + 1);
      write_file(dir / file, lrp::render_heatmap(rel[i].name, rel[i].relevance));
    }
    const auto& label = ds.records[i].label;
    if (predicted[i] == target && (!label || *label == target)) {
      names.push_back(rel[i].name);
      relevances.push_back(rel[i].relevance);
    }
  }
  s.aggregated = names.size();
  for (int size : options.ngram_sizes) {
    s.ngrams.push_back(lrp::ngram_report(names, relevances, size, options.min_count));
    write_file(dir / ("ngrams_" + std::to_string(size) + ".csv"), s.ngrams.back().to_csv());
  }
  s.profile = lrp::positional_profile(names, relevances, options.bins, m.preprocess);
  write_file(dir / "positional_profile.csv", s.profile.to_csv());
  return s;
}

BenchReport bench_rows(const Model& m, const std::vector<std::pair<std::string, std::string>>& rows,
                       const BenchOptions& options) {
  require(options.repeat >= 1, ErrorCode::kInvalidArgument, "repeat must be at least 1");
  using clock = std::chrono::steady_clock;
  const auto wall0 = clock::now();
  BenchReport r;
  r.model_kind = model_kind_name(m.kind);
  r.rows = rows.size();
  r.threads = resolve_threads(options.threads);

  std::vector<long> sink(static_cast<std::size_t>(r.threads) + 1, 0);
  auto run = [&](std::size_t b, std::size_t e, long& acc) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        acc += predict_raw(m, rows[i].first, rows[i].second).label;
      } catch (const Error&) {
        acc -= 7;
      }
    }
  };

  // Warm-up.
  run(0, std::min<std::size_t>(rows.size(), 2000), sink.back());

  for (int rep = 0; rep < options.repeat; ++rep) {
    std::atomic<int> slot{0};
    const auto t0 = clock::now();
    parallel_for(rows.size(), r.threads, [&](std::size_t b, std::size_t e) {
      run(b, e, sink[static_cast<std::size_t>(slot.fetch_add(1))]);
    });
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    r.repeat_seconds.push_back(secs);
    r.repeat_names_per_second.push_back(secs > 0.0 ? static_cast<double>(rows.size()) / secs : 0.0);
  }
  r.median_names_per_second = median(r.repeat_names_per_second);

  std::vector<double> lat;
  const std::size_t samples = std::min<std::size_t>(rows.size(), 10000);
  lat.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto t0 = clock::now();
    run(i, i + 1, sink.back());
    lat.push_back(std::chrono::duration<double, std::micro>(clock::now() - t0).count());
  }
  r.latency_p50_us = percentile(lat, 0.50);
  r.latency_p90_us = percentile(lat, 0.90);
  r.latency_p99_us = percentile(lat, 0.99);
  r.wall_seconds = std::chrono::duration<double>(clock::now() - wall0).count();
  volatile long keep = 0;
  for (long v : sink) keep = keep + v;
  (void)keep;
  return r;
}

BenchReport bench(const Model& m, const std::string& data_path, const BenchOptions& options) {
  NameCsvReader reader(data_path, true);
  std::vector<std::pair<std::string, std::string>> rows;
  NameCsvReader::Row row;
  while ((options.max_rows == 0 || rows.size() < options.max_rows) && reader.next(row)) {
    rows.emplace_back(std::move(row.name), std::move(row.relative_name));
  }
  require(!rows.empty(), ErrorCode::kEmptyDataset, data_path + " has no rows");
  return bench_rows(m, rows, options);
}

std::string BenchReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model_kind;
  j["rows"] = rows;
  j["threads"] = threads;
  j["repeat_seconds"] = repeat_seconds;
  j["repeat_names_per_second"] = repeat_names_per_second;
  j["median_names_per_second"] = median_names_per_second;
  j["wall_seconds"] = wall_seconds;
  j["latency_us"] = {{"p50", latency_p50_us}, {"p90", latency_p90_us}, {"p99", latency_p99_us}};
  return j.dump(2);
}

std::string BenchReport::to_text() const {
  std::string out = "model " + model_kind + ", " + std::to_string(rows) + " rows, " + std::to_string(threads) +
                    (threads == 1 ? " thread\n" : " threads\n");
  for (std::size_t i = 0; i < repeat_seconds.size(); ++i) {
    out += "  repeat " + std::to_string(i + 1) + ": " + fmt("%.4f s", repeat_seconds[i]) + ", " +
           fmt("%.0f names/s", repeat_names_per_second[i]) + "\n";
  }
  out += "median throughput: " + fmt("%.0f names/s", median_names_per_second) + "\n";
  out += "latency per name: p50 " + fmt("%.2f", latency_p50_us) + " us, p90 " + fmt("%.2f", latency_p90_us) +
         " us, p99 " + fmt("%.2f", latency_p99_us) + " us\n";
  out += "wall time: " + fmt("%.3f s", wall_seconds) + "\n";
  return out;
}

std::string char_frequency_csv(const std::string& data_path) {
  corpus::LoadOptions lo;
  return eval::char_frequency_profile(corpus::load_dataset(data_path, lo)).to_csv();
}

void generate(const std::string& profile, std::size_t n, std::uint64_t seed, const std::string& out_path) {
  corpus::SyntheticProfile p;
  if (profile == "letter-asymmetry" || profile == "household") {
    p = corpus::builtin_profile(profile);
  } else {
    std::ifstream in(profile, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::kIo, "cannot open profile " + profile);
    std::ostringstream buf;
    buf << in.rdbuf();
    p = corpus::SyntheticProfile::from_json(buf.str());
  }
  corpus::write_dataset_csv(corpus::generate_synthetic(p, n, seed), out_path);
}

}  // namespace namecraft::pipeline
