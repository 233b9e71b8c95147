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


#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/model_file.hpp"
#include "doctest.h"
#include "models.hpp"

using namespace namecraft;

TEST_CASE("base64 examples") {
  auto enc = [](const std::string& s) {
    return base64_encode(std::vector<std::uint8_t>(s.begin(), s.end()));
  };
  CHECK(enc("") == "");
  CHECK(enc("M") == "TQ==");
  CHECK(enc("Ma") == "TWE=");
  CHECK(enc("Man") == "TWFu");
  const auto back = base64_decode("TWFu");
  CHECK(std::string(back.begin(), back.end()) == "Man");
  for (const char* bad : {"TWF", "TW=u", "T$==", "TQ==TQ=="}) {
    try {
      base64_decode(bad);
      FAIL("expected Schema for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchema);
    }
  }
}

TEST_CASE("base64 round trip on random bytes") {
  oracle::Gen g(6);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint8_t> b(static_cast<std::size_t>(g.range(0, 40)));
    for (auto& v : b) v = static_cast<std::uint8_t>(g.range(0, 255));
    CHECK(base64_decode(base64_encode(b)) == b);
  }
}

TEST_CASE("tensors keep every bit") {
  const std::vector<double> v{0.1, -0.0, 1e-308, 5e-324, 1.7976931348623157e308, -3.25};
  const auto j = tensor_to_json(v, {2, 3});
  const auto back = tensor_from_json(j, {2, 3});
  REQUIRE(back.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::signbit(back[i]) == std::signbit(v[i]));
  CHECK(back == v);
  CHECK_THROWS_AS(tensor_from_json(j, {3, 2}), Error);
}

TEST_CASE("save, load and save again is byte-identical for every kind") {
  const auto dir = harness::scratch("model_file");
  for (const char* kind : {"lr", "svm", "n2c", "cnn", "two-stage"}) {
    CAPTURE(kind);
    const auto r = harness::train_small(kind);
    const std::string a = (dir / (std::string(kind) + "_a.json")).string();
    const std::string b = (dir / (std::string(kind) + "_b.json")).string();
    save_model(r.model, a);
    const Model loaded = load_model(a);
    save_model(loaded, b);
    CHECK(harness::read_file(a) == harness::read_file(b));
    // And the reloaded model predicts the same.
    for (const char* name : {"Qazi Faruq", "Vipin Pawar", "Z", "Ali"}) {
      const auto p = pipeline::predict_raw(r.model, name, "");
      const auto q = pipeline::predict_raw(loaded, name, "");
      CHECK(p.label == q.label);
      CHECK(p.scores == q.scores);
    }
  }
}

TEST_CASE("model file errors") {
  const auto r = harness::train_small("lr");
  auto j = nlohmann::json::parse(serialize_model(r.model));
  j["format_version"] = 2;
  try {
    deserialize_model(j.dump());
    FAIL("expected Version");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVersion);
  }
  try {
    deserialize_model("{\"format\": 3");
    FAIL("expected Schema");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSchema);
  }
  try {
    load_model("/nonexistent/model.json");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
