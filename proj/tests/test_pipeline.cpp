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


#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/model_file.hpp"
#include "doctest.h"
#include "models.hpp"

using namespace namecraft;

TEST_CASE("thread count resolution") {
  ::setenv("NAMECRAFT_THREADS", "3", 1);
  CHECK(pipeline::resolve_threads(8) == 3);
  CHECK(pipeline::resolve_threads(2) == 2);
  ::setenv("NAMECRAFT_THREADS", "junk", 1);
  CHECK(pipeline::resolve_threads(5) == 5);
  ::unsetenv("NAMECRAFT_THREADS");
  CHECK(pipeline::resolve_threads(0) >= 1);
}

TEST_CASE("parallel_for covers the range once and rethrows the first failure") {
  std::vector<std::atomic<int>> hits(1000);
  pipeline::parallel_for(hits.size(), 4, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) hits[i]++;
  });
  for (auto& h : hits) CHECK(h.load() == 1);
  try {
    pipeline::parallel_for(100, 4, [](std::size_t b, std::size_t) {
      throw Error(ErrorCode::kIo, "slice " + std::to_string(b));
    });
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "slice 0");
  }
}

TEST_CASE("training options are checked on set") {
  pipeline::TrainOptions o;
  for (auto [k, v] : std::vector<std::pair<const char*, const char*>>{{"nope", "1"},
                                                                        {"c", "abc"},
                                                                        {"epochs", "1.5"},
                                                                        {"batch_norm", "maybe"},
                                                                        {"model", "tree"},
                                                                        {"mode", "double"},
                                                                        {"activation", "relu6"},
                                                                        {"seed", "-1"}}) {
    CAPTURE(k);
    try {
      o.set(k, v);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidArgument);
    }
  }
  o.set("kernel_sizes", "1,2,3");
  CHECK(o.get("kernel_sizes") == "1,2,3");
  CHECK(pipeline::known_train_keys().front() == "model");
}

TEST_CASE("linear models train, report and predict") {
  for (const char* kind : {"lr", "svm"}) {
    CAPTURE(kind);
    const auto r = harness::train_small(kind);
    CHECK(r.test.metrics.macro_f1 >= 0.9);
    CHECK(r.test.metrics.coverage == 1.0);
    CHECK(r.summary_text().find("test") != std::string::npos);
    const auto j = nlohmann::json::parse(r.summary_json());
    CHECK(j.contains("test"));
    const auto p = pipeline::predict_raw(r.model, "Qazi Faruq Zafar", "");
    CHECK(pipeline::label_text(r.model, p.label) == "Muslim");
    CHECK(pipeline::score_columns(r.model).size() == 2);
    try {
      pipeline::predict_raw(r.model, "123 !!", "");
      FAIL("expected EmptyName");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyName);
    }
  }
}

TEST_CASE("concat mode scores households") {
  const auto r = harness::train_small("lr", "concat");
  CHECK(r.model.mode == corpus::LoadMode::kConcat);
  const auto a = pipeline::predict_raw(r.model, "Qazi Faruq", "Zafar Aziz");
  CHECK(pipeline::label_text(r.model, a.label) == "Muslim");
}

TEST_CASE("n2c leaves unknown names unclassified") {
  const auto r = harness::train_small("n2c");
  CHECK(r.test.metrics.coverage < 1.0);
  const auto p = pipeline::predict_raw(r.model, "Xxxxxxxxxxxxx", "");
  CHECK(p.label == eval::kUnclassified);
  CHECK(pipeline::score_columns(r.model)[0].rfind("certainty_", 0) == 0);
}

TEST_CASE("two-stage reports both stages") {
  const auto r = harness::train_small("two-stage");
  REQUIRE(r.stage1_test.has_value());
  CHECK(r.model.stage1 != nullptr);
  CHECK(pipeline::score_columns(r.model) == std::vector<std::string>{"p1", "p2", "score"});
  const auto p = pipeline::predict_raw(r.model, "Qazi Faruq", "Zafar Aziz");
  CHECK(p.scores.size() == 3);
  pipeline::TrainOptions o;
  o.set("model", "two-stage");
  o.set("mode", "concat");
  o.set("data", harness::corpus_file("household", 1200, 3));
  CHECK_THROWS_AS(pipeline::train(o), Error);
}

TEST_CASE("prediction stream") {
  const auto r = harness::train_small("lr");
  const auto dir = harness::scratch("pipeline_predict");
  harness::write_file(dir / "in.csv", "name\nQazi Faruq\n\"Vipin, Pawar\"\n");
  std::ostringstream out;
  pipeline::PredictOptions po;
  po.proba = true;
  const auto s = pipeline::predict_stream(r.model, (dir / "in.csv").string(), out, po);
  CHECK(s.rows == 2);
  const auto text = out.str();
  CHECK(text.rfind("name,predicted_class,p_", 0) == 0);
  CHECK(text.find("\"Vipin, Pawar\",NonMuslim,") != std::string::npos);

  harness::write_file(dir / "bad.csv", "name\nAli\n42\n");
  std::ostringstream out2;
  try {
    pipeline::predict_stream(r.model, (dir / "bad.csv").string(), out2, po);
    FAIL("expected EmptyName");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyName);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(out2.str().find("Ali,") != std::string::npos);
}

TEST_CASE("explain writes reports for a CNN") {
  const auto r = harness::train_small("cnn");
  REQUIRE(r.model.kind == ModelKind::kCnn);
  CHECK(r.history_csv.rfind("epoch", 0) == 0);
  const auto nr = pipeline::explain_name(r.model, "{QAZI}", 1);
  CHECK(nr.relevance.size() == nr.name.size());
  CHECK(nr.residual <= std::max(1e-6, 1e-2 * std::abs(nr.logit)));
  const auto dir = harness::scratch("pipeline_explain");
  pipeline::ExplainOptions eo;
  eo.target_class = "Muslim";
  eo.min_count = 1;
  const auto s = pipeline::explain(r.model, harness::corpus_file("letter-asymmetry", 1200, 3), (dir / "out").string(), eo);
  CHECK(s.names == 1200);
  CHECK(std::filesystem::exists(dir / "out" / "ngrams_2.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "positional_profile.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "heatmap_00001.html"));
  eo.target_class = "Nobody";
  CHECK_THROWS_AS(pipeline::explain(r.model, harness::corpus_file("letter-asymmetry", 1200, 3), (dir / "o2").string(), eo), Error);
  const auto lr = harness::train_small("lr");
  eo.target_class = "Muslim";
  CHECK_THROWS_AS(pipeline::explain(lr.model, harness::corpus_file("letter-asymmetry", 1200, 3), (dir / "o3").string(), eo), Error);
}

TEST_CASE("bench and generate") {
  const auto r = harness::train_small("lr");
  std::vector<std::pair<std::string, std::string>> rows(500, {"Qazi Faruq", ""});
  pipeline::BenchOptions bo;
  bo.repeat = 2;
  const auto b = pipeline::bench_rows(r.model, rows, bo);
  CHECK(b.rows == 500);
  CHECK(b.repeat_seconds.size() == 2);
  CHECK(b.median_names_per_second > 0.0);
  CHECK(nlohmann::json::parse(b.to_json()).contains("median_names_per_second"));

  const auto dir = harness::scratch("pipeline_generate");
  const auto path = (dir / "g.csv").string();
  pipeline::generate("household", 50, 4, path);
  const auto first = harness::read_file(path);
  pipeline::generate("household", 50, 4, path);
  CHECK(harness::read_file(path) == first);
  CHECK(first.rfind("name,relative_name,label\n", 0) == 0);
  // Unknown names are read as profile files.
  try {
    pipeline::generate("nope", 10, 1, path);
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  harness::write_file(dir / "bad.json", R"({"styles": {}, "classes": [{"name": "A", "proportion": 0.5}]})");
  try {
    pipeline::generate((dir / "bad.json").string(), 10, 1, path);
    FAIL("expected BadProfile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadProfile);
  }
  CHECK(pipeline::char_frequency_csv(path).rfind("class,A,", 0) == 0);
}
