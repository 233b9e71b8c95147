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


#include <algorithm>
#include <map>
#include <numeric>

#include "core/corpus.hpp"
#include "core/error.hpp"
#include "core/synthetic.hpp"
#include "doctest.h"
#include "harness.hpp"

using namespace namecraft;
using namespace namecraft::corpus;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

Dataset labeled(const std::vector<std::pair<std::string, int>>& rows, int k = 2) {
  Dataset ds;
  for (int c = 0; c < k; ++c) ds.classes.push_back({c, "C" + std::to_string(c)});
  for (const auto& [name, label] : rows) ds.records.push_back({name, std::nullopt, label});
  return ds;
}

}  // namespace

TEST_CASE("preprocess_name examples") {
  CHECK(preprocess_name("Abdul  Karim!") == "{ABDUL}{KARIM}");
  CHECK(preprocess_name("ram kumar 2") == "{RAM}{KUMAR}");
  CHECK(code_of([] { preprocess_name("1234 --"); }) == ErrorCode::kEmptyName);
  CHECK(preprocess_name("  o'brien\tsmith ") == "{OBRIEN}{SMITH}");
}

TEST_CASE("preprocess_name honours custom markers") {
  PreprocessConfig cfg{'<', '>', '#'};
  CHECK(preprocess_name("ab cd", cfg) == "<AB><CD>");
  CHECK(concat_names("<AB>", "<C>", cfg) == "<AB>#<C>");
  PreprocessConfig bad{'{', '{', '|'};
  CHECK_THROWS_AS(bad.validate(), Error);
  PreprocessConfig letter{'A', '}', '|'};
  CHECK_THROWS_AS(letter.validate(), Error);
}

TEST_CASE("preprocess_name is idempotent on its letters") {
  oracle::Gen g(3);
  for (int t = 0; t < 500; ++t) {
    std::string raw;
    const int len = g.range(1, 30);
    for (int i = 0; i < len; ++i) {
      const char pool[] = "abcXYZ  -'1.\tq";
      raw += pool[g.range(0, static_cast<int>(sizeof(pool)) - 2)];
    }
    std::string canon;
    try {
      canon = preprocess_name(raw);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyName);
      continue;
    }
    CHECK(is_canonical(canon));
    std::string stripped;
    for (char c : canon) stripped += c == '{' || c == '}' ? ' ' : c;
    CHECK(preprocess_name(stripped) == canon);
  }
}

TEST_CASE("concat_names examples") {
  CHECK(concat_names("{RAM}", "{SITA}") == "{RAM}|{SITA}");
  CHECK(concat_names("{A}{B}", "{C}") == "{A}{B}|{C}");
  CHECK(concat_names("{X}", "{X}") == "{X}|{X}");
}

TEST_CASE("name_parts splits across separators") {
  const auto parts = name_parts("{AB}{C}|{DEF}");
  REQUIRE(parts.size() == 3);
  CHECK(parts[0] == "AB");
  CHECK(parts[1] == "C");
  CHECK(parts[2] == "DEF");
}

TEST_CASE("load_dataset") {
  const auto dir = harness::scratch("corpus_load");
  SUBCASE("3-row valid file") {
    harness::write_file(dir / "ok.csv",
                        "name,relative_name,label\nAbdul Karim,Fatima,Muslim\nRam Kumar,,Hindu\n"
                        "sita devi,ram,hindu\n");
    LoadOptions o;
    const auto ds = load_dataset((dir / "ok.csv").string(), o);
    REQUIRE(ds.size() == 3);
    REQUIRE(ds.num_classes() == 2);
    CHECK(ds.classes[0].name == "Hindu");
    CHECK(ds.classes[1].name == "Muslim");
    CHECK(ds.records[0].primary_name == "{ABDUL}{KARIM}");
    CHECK(ds.records[0].relative_name == std::optional<std::string>("{FATIMA}"));
    CHECK(!ds.records[1].relative_name.has_value());
    CHECK(ds.records[2].label == 0);

    o.mode = LoadMode::kConcat;
    const auto cc = load_dataset((dir / "ok.csv").string(), o);
    CHECK(cc.records[0].primary_name == "{ABDUL}{KARIM}|{FATIMA}");
    CHECK(cc.records[1].primary_name == "{RAM}{KUMAR}");
  }
  SUBCASE("unknown label") {
    harness::write_file(dir / "lab.csv", "name,relative_name,label\nA,,Muslim\nB,,Xyz\n");
    LoadOptions o;
    o.class_names = {"Muslim", "Hindu"};
    CHECK(code_of([&] { load_dataset((dir / "lab.csv").string(), o); }) == ErrorCode::kLabel);
    try {
      load_dataset((dir / "lab.csv").string(), o);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("empty name") {
    harness::write_file(dir / "empty.csv", "name,relative_name,label\nA,,M\n1234,,M\n");
    CHECK(code_of([&] { load_dataset((dir / "empty.csv").string(), {}); }) == ErrorCode::kEmptyName);
  }
  SUBCASE("bad header") {
    harness::write_file(dir / "hdr.csv", "nom,label\nA,M\n");
    CHECK(code_of([&] { load_dataset((dir / "hdr.csv").string(), {}); }) == ErrorCode::kSchema);
  }
  SUBCASE("missing file") {
    CHECK(code_of([&] { load_dataset((dir / "nope.csv").string(), {}); }) == ErrorCode::kIo);
  }
}

TEST_CASE("augment_single examples") {
  Dataset ds = labeled({{"{A}", 0}, {"{B}", 1}});
  CHECK(augment_single(ds).size() == 2);
  ds.records[0].relative_name = "{C}";
  ds.records[1].relative_name = "{D}";
  const auto four = augment_single(ds);
  REQUIRE(four.size() == 4);
  CHECK(four.records[2].primary_name == "{C}");
  CHECK(four.records[2].label == 0);
  CHECK(four.records[3].label == 1);
  Dataset three = labeled({{"{A}", 0}, {"{B}", 1}, {"{E}", 1}});
  three.records[1].relative_name = "{F}";
  CHECK(augment_single(three).size() == 4);
}

TEST_CASE("augment_single keeps labels and adds one record per relative") {
  oracle::Gen g(9);
  for (int t = 0; t < 50; ++t) {
    Dataset ds = labeled({}, 3);
    std::size_t rel = 0;
    for (int i = 0; i < g.range(0, 30); ++i) {
      NameRecord r{g.canonical_name(2, 4), std::nullopt, g.range(0, 2)};
      if (g.coin()) {
        r.relative_name = g.canonical_name(2, 4);
        ++rel;
      }
      ds.records.push_back(r);
    }
    const auto aug = augment_single(ds);
    REQUIRE(aug.size() == ds.size() + rel);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(aug.records[i] == ds.records[i]);
    std::size_t j = ds.size();
    for (const auto& r : ds.records) {
      if (r.relative_name) {
        CHECK(aug.records[j].primary_name == *r.relative_name);
        CHECK(aug.records[j].label == r.label);
        ++j;
      }
    }
  }
}

TEST_CASE("split_dataset examples") {
  std::vector<std::pair<std::string, int>> rows;
  for (int i = 0; i < 100; ++i) rows.push_back({"{N" + std::string(1, static_cast<char>('A' + i % 26)) + "}", 0});
  const auto s = split_dataset(labeled(rows, 1), {0.7, 0.15, 0.15}, 1);
  CHECK(s.train.size() == 70);
  CHECK(s.validation.size() == 15);
  CHECK(s.test.size() == 15);
  CHECK(code_of([&] { split_dataset(labeled(rows, 1), {0.5, 0.5, 0.1}, 1); }) == ErrorCode::kRatio);
  rows.resize(10);
  const auto t = split_dataset(labeled(rows, 1), {0.8, 0.1, 0.1}, 1);
  CHECK(t.train.size() == 8);
  CHECK(t.validation.size() == 1);
  CHECK(t.test.size() == 1);
}

TEST_CASE("split_dataset is a reproducible stratified partition") {
  oracle::Gen g(21);
  for (int t = 0; t < 30; ++t) {
    Dataset ds = labeled({}, 3);
    const int n = g.range(1, 200);
    for (int i = 0; i < n; ++i) ds.records.push_back({"{" + std::to_string(i) + "}", std::nullopt, g.range(0, 2)});
    const std::uint64_t seed = static_cast<std::uint64_t>(g.range(0, 1000));
    const auto a = split_dataset(ds, {0.7, 0.15, 0.15}, seed);
    const auto b = split_dataset(ds, {0.7, 0.15, 0.15}, seed);
    CHECK(a.train.records == b.train.records);
    CHECK(a.validation.records == b.validation.records);
    CHECK(a.test.records == b.test.records);
    std::multiset<std::string> all, parts;
    for (const auto& r : ds.records) all.insert(r.primary_name);
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
      for (const auto& r : part->records) parts.insert(r.primary_name);
    }
    CHECK(all == parts);
    // Per class: floor(ratio * n_c) for validation and test.
    for (int c = 0; c < 3; ++c) {
      const auto count = [c](const Dataset& d) {
        return std::count_if(d.records.begin(), d.records.end(), [c](const NameRecord& r) { return r.label == c; });
      };
      const long nc = count(ds);
      CHECK(count(a.validation) == static_cast<long>(std::floor(0.15 * nc + 1e-9)));
      CHECK(count(a.test) == static_cast<long>(std::floor(0.15 * nc + 1e-9)));
    }
  }
}

TEST_CASE("class_weights examples") {
  auto w = class_weights({0, 0, 0, 1}, 2);
  CHECK(w[0] == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(2.0).epsilon(1e-12));
  w = class_weights({0, 1, 0, 1}, 2);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 1.0);
  w = class_weights({0, 0, 1, 1, 1, 1, 1, 1}, 2);
  CHECK(w[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(8.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("class_weights reweight to the sample size") {
  oracle::Gen g(5);
  for (int t = 0; t < 200; ++t) {
    const int k = g.range(2, 6);
    std::vector<int> labels;
    for (int i = 0; i < g.range(k, 300); ++i) labels.push_back(g.range(0, k - 1));
    for (int c = 0; c < k; ++c) labels.push_back(c);
    const auto w = class_weights(labels, k);
    double total = 0.0;
    for (int l : labels) total += w[static_cast<std::size_t>(l)];
    CHECK(std::abs(total - static_cast<double>(labels.size())) <= 1e-9 * static_cast<double>(labels.size()));
  }
}

TEST_CASE("generate_synthetic examples") {
  const auto profile = letter_asymmetry_profile();
  const auto ds = generate_synthetic(profile, 1000, 4);
  std::map<int, int> per_class;
  for (const auto& r : ds.records) {
    ++per_class[*r.label];
    CHECK(is_canonical(r.primary_name));
  }
  CHECK(per_class[0] == 500);
  CHECK(per_class[1] == 500);
  CHECK(generate_synthetic(profile, 1000, 4).records == ds.records);

  SyntheticProfile q;
  NameStyle s;
  s.name = "q";
  s.letter_weights[static_cast<std::size_t>('Q' - 'A')] = 1.0;
  s.part_length_min = s.part_length_max = 3;
  s.part_count_min = s.part_count_max = 1;
  q.styles.push_back(s);
  q.classes.push_back({"OnlyQ", 1.0, {{0, 1.0}}, 0.0, {}});
  for (const auto& r : generate_synthetic(q, 50, 1).records) CHECK(r.primary_name == "{QQQ}");
}

TEST_CASE("synthetic profiles round-trip through JSON and reject bad input") {
  for (const auto& p : {letter_asymmetry_profile(), household_profile()}) {
    const auto again = SyntheticProfile::from_json(p.to_json());
    CHECK(again.to_json() == p.to_json());
  }
  CHECK(code_of([] { SyntheticProfile::from_json("{\"styles\": []}"); }) == ErrorCode::kBadProfile);
  CHECK(code_of([] { builtin_profile("nope"); }) == ErrorCode::kBadProfile);
}
