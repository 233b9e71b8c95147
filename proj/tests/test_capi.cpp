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


// Exercises libnamecraft through its C header only.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "namecraft/namecraft.h"

namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const char* env = std::getenv("NAMECRAFT_TEST_TMP");
  fs::path p = env && *env ? fs::path(env) : fs::temp_directory_path() / "namecraft_capi";
  fs::create_directories(p);
  return p;
}

std::string data_file() {
  static const std::string path = [] {
    const auto p = (tmp_dir() / "la.csv").string();
    REQUIRE(nc_generate("letter-asymmetry", 1000, 11, p.c_str()) == NC_OK);
    return p;
  }();
  return path;
}

nc_model* train(const char* kind, std::vector<std::pair<const char*, const char*>> extra = {}) {
  nc_train_config* cfg = nullptr;
  REQUIRE(nc_train_config_new(&cfg) == NC_OK);
  REQUIRE(nc_train_config_set(cfg, "model", kind) == NC_OK);
  REQUIRE(nc_train_config_set(cfg, "data", data_file().c_str()) == NC_OK);
  REQUIRE(nc_train_config_set(cfg, "bootstrap", "100") == NC_OK);
  for (auto [k, v] : extra) REQUIRE(nc_train_config_set(cfg, k, v) == NC_OK);
  nc_model* m = nullptr;
  char* text = nullptr;
  const nc_status s = nc_train(cfg, &m, &text, nullptr, nullptr);
  nc_train_config_free(cfg);
  INFO(nc_last_error());
  REQUIRE(s == NC_OK);
  CHECK(std::string(text).find("macro") != std::string::npos);
  nc_free_string(text);
  return m;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::string(nc_status_string(NC_OK)) == "ok");
  CHECK(std::string(nc_status_string(NC_ERR_TOO_LONG)).size() > 0);
  CHECK(std::string(nc_version()).size() > 0);
}

TEST_CASE("preprocess through the C API") {
  char* out = nullptr;
  REQUIRE(nc_preprocess("Abdul  Karim!", &out) == NC_OK);
  CHECK(std::string(out) == "{ABDUL}{KARIM}");
  nc_free_string(out);
  CHECK(nc_preprocess("123", &out) == NC_ERR_EMPTY_NAME);
  CHECK(std::string(nc_last_error()).size() > 0);
  CHECK(nc_preprocess(nullptr, &out) == NC_ERR_INVALID_ARGUMENT);
  CHECK(nc_preprocess("x", nullptr) == NC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("configuration keys") {
  nc_train_config* cfg = nullptr;
  REQUIRE(nc_train_config_new(&cfg) == NC_OK);
  CHECK(nc_train_config_set(cfg, "bogus", "1") == NC_ERR_INVALID_ARGUMENT);
  CHECK(nc_train_config_set(cfg, "epochs", "ten") == NC_ERR_INVALID_ARGUMENT);
  CHECK(nc_train_config_set(cfg, "epochs", "10") == NC_OK);
  nc_train_config_free(cfg);
  std::size_t n = 0;
  while (nc_train_config_key(n)) ++n;
  CHECK(n > 20);
  CHECK(std::string(nc_train_config_key(0)) == "model");
}

TEST_CASE("train, predict, save and reload") {
  nc_model* m = train("lr");
  CHECK(std::string(nc_model_kind(m)) == "lr");
  CHECK(std::string(nc_model_mode(m)) == "single");
  REQUIRE(nc_model_num_classes(m) == 2);
  CHECK(nc_model_class_name(m, 2) == nullptr);
  REQUIRE(nc_model_num_scores(m) == 2);

  const char* names[] = {"Qazi Faruq Zafar", "Vipin Pawar Vivek"};
  int labels[2];
  double scores[4];
  REQUIRE(nc_predict(m, names, nullptr, 2, 2, labels, scores, nullptr) == NC_OK);
  CHECK(std::string(nc_model_class_name(m, static_cast<size_t>(labels[0]))) == "Muslim");
  CHECK(std::string(nc_model_class_name(m, static_cast<size_t>(labels[1]))) == "NonMuslim");
  CHECK(scores[0] + scores[1] == doctest::Approx(1.0));

  const char* bad[] = {"Ali", "!!!"};
  CHECK(nc_predict(m, bad, nullptr, 2, 1, labels, nullptr, nullptr) == NC_ERR_EMPTY_NAME);
  CHECK(std::string(nc_last_error()).find("name 1") != std::string::npos);

  const auto path = (tmp_dir() / "lr.json").string();
  REQUIRE(nc_model_save(m, path.c_str()) == NC_OK);
  nc_model* back = nullptr;
  REQUIRE(nc_model_load(path.c_str(), &back) == NC_OK);
  char *a = nullptr, *b = nullptr;
  REQUIRE(nc_model_serialize(m, &a) == NC_OK);
  REQUIRE(nc_model_serialize(back, &b) == NC_OK);
  CHECK(std::string(a) == std::string(b));
  nc_free_string(a);
  nc_free_string(b);

  // Explanations need the CNN.
  char* canon = nullptr;
  double* rel = nullptr;
  size_t len = 0;
  CHECK(nc_explain_name(m, "Ali", "Muslim", &canon, &rel, &len) != NC_OK);

  char* text = nullptr;
  REQUIRE(nc_bench(m, data_file().c_str(), 1, 1, 100, &text, nullptr) == NC_OK);
  CHECK(std::string(text).find("names/s") != std::string::npos);
  nc_free_string(text);

  const auto out = (tmp_dir() / "pred.csv").string();
  nc_predict_summary s{};
  REQUIRE(nc_predict_file(m, data_file().c_str(), out.c_str(), 1, 1, &s) == NC_OK);
  CHECK(s.rows == 1000);
  nc_model_free(back);
  nc_model_free(m);
}

TEST_CASE("CNN explanations through the C API") {
  nc_model* m = train("cnn", {{"embed_dim", "4"}, {"kernel_sizes", "1,2"}, {"filters", "4,4"},
                              {"dense_units", "0"}, {"epochs", "1"}, {"batch_size", "64"}});
  char* canon = nullptr;
  double* rel = nullptr;
  size_t len = 0;
  REQUIRE(nc_explain_name(m, "Qazi", "Muslim", &canon, &rel, &len) == NC_OK);
  CHECK(std::string(canon) == "{QAZI}");
  CHECK(len == 6);
  nc_free_string(canon);
  nc_free_doubles(rel);
  CHECK(nc_explain_name(m, "Qazi", "Nobody", &canon, &rel, &len) == NC_ERR_INVALID_ARGUMENT);
  nc_model_free(m);
}

TEST_CASE("load errors") {
  nc_model* m = nullptr;
  CHECK(nc_model_load("/nonexistent/x.json", &m) == NC_ERR_IO);
  const auto p = (tmp_dir() / "garbage.json").string();
  std::ofstream(p) << "not json";
  CHECK(nc_model_load(p.c_str(), &m) == NC_ERR_SCHEMA);
  CHECK(m == nullptr);
  CHECK(nc_model_kind(nullptr) == nullptr);
  nc_model_free(nullptr);
}

TEST_CASE("character statistics") {
  char* csv = nullptr;
  REQUIRE(nc_char_frequency(data_file().c_str(), &csv) == NC_OK);
  CHECK(std::string(csv).rfind("class,A,B", 0) == 0);
  nc_free_string(csv);
}
