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

#include "core/n2c.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/error.hpp"
#include "json.hpp"

namespace namecraft::n2c {

namespace {

using nlohmann::json;

char digit_class(char c) {
  switch (c) {
    case 'B': case 'F': case 'P': case 'V': return '1';
    case 'C': case 'G': case 'K': case 'Q': case 'S': case 'X': case 'Z': return '2';
    case 'D': case 'T': return '3';
    case 'L': return '4';
    case 'M': case 'N': return '5';
    case 'R': return '6';
    default: return 0;
  }
}

bool is_vowel(char c) {
  return c == 'A' || c == 'E' || c == 'I' || c == 'O' || c == 'U' || c == 'Y';
}

std::string fold(std::string_view part) {
  std::string s;
  s.reserve(part.size());
  for (std::size_t i = 0; i < part.size(); ++i) {
    const char c = part[i];
    if (c == 'P' && i + 1 < part.size() && part[i + 1] == 'H') {
      s.push_back('F');
      ++i;
    } else if (c == 'W') {
      s.push_back('V');
    } else if (c == 'J') {
      s.push_back('Z');
    } else {
      s.push_back(c);
    }
  }
  return s;
}

std::vector<KeyCounts> to_sorted(std::map<std::string, std::vector<std::int64_t>>& m) {
  std::vector<KeyCounts> out;
  out.reserve(m.size());
  for (auto& [key, counts] : m) {
    KeyCounts kc;
    kc.key = key;
    kc.total = 0;
    for (auto v : counts) kc.total += v;
    kc.per_class = std::move(counts);
    out.push_back(std::move(kc));
  }
  return out;
}

const KeyCounts* scan(const std::vector<KeyCounts>& keys, std::string_view key) {
  for (const auto& kc : keys) {
    if (kc.key == key) return &kc;
  }
  return nullptr;
}

double miss_ratio(const KeyCounts* kc, int cls) {
  if (!kc || kc->total == 0) return 1.0;
  const auto in = kc->per_class[static_cast<std::size_t>(cls)];
  return static_cast<double>(kc->total - in) / static_cast<double>(kc->total);
}

double certainty_from(const KeyCounts* s, const KeyCounts* p, int cls, const ReferenceList& ref) {
  return ref.q_s * ref.q_p * (1.0 - miss_ratio(s, cls) * miss_ratio(p, cls));
}

void check_class(int cls, const ReferenceList& ref) {
  require(cls >= 0 && static_cast<std::size_t>(cls) < ref.classes.size(), ErrorCode::kLabel,
          "class id out of range");
}

std::vector<KeyCounts> keys_from_json(const json& obj, std::size_t k) {
  if (!obj.is_object()) fail(ErrorCode::kSchema, "reference counts must be an object");
  std::vector<KeyCounts> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    KeyCounts kc;
    kc.key = it.key();
    const auto& arr = it.value();
    if (!arr.is_array() || arr.size() != k) {
      fail(ErrorCode::kSchema, "counts for '" + kc.key + "' must list one value per class");
    }
    for (const auto& v : arr) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        fail(ErrorCode::kSchema, "counts for '" + kc.key + "' must be non-negative integers");
      }
      kc.per_class.push_back(v.get<std::int64_t>());
      kc.total += kc.per_class.back();
    }
    out.push_back(std::move(kc));
  }
  std::sort(out.begin(), out.end(), [](const KeyCounts& a, const KeyCounts& b) { return a.key < b.key; });
  return out;
}

}  // namespace

std::string soundex_code(std::string_view part) {
  require(!part.empty(), ErrorCode::kInvalidArgument, "empty name part");
  for (char c : part) {
    require(c >= 'A' && c <= 'Z', ErrorCode::kInvalidArgument, "name parts must be A-Z");
  }
  const std::string s = fold(part);
  std::string code(1, s[0]);
  char last = digit_class(s[0]);
  for (std::size_t i = 1; i < s.size() && code.size() < 4; ++i) {
    const char d = digit_class(s[i]);
    if (d) {
      if (d != last) code.push_back(d);
      last = d;
    } else if (is_vowel(s[i])) {
      last = 0;
    }
  }
  code.resize(4, '0');
  return code;
}

const KeyCounts* ReferenceList::find_spelling(std::string_view part) const { return scan(spelling, part); }

const KeyCounts* ReferenceList::find_phonetic(std::string_view code) const { return scan(phonetic, code); }

double unambiguous_fraction(const std::vector<KeyCounts>& keys) {
  if (keys.empty()) return 0.0;
  std::size_t clean = 0;
  for (const auto& kc : keys) {
    int nonzero = 0;
    for (auto v : kc.per_class) nonzero += v > 0 ? 1 : 0;
    if (nonzero == 1) ++clean;
  }
  return static_cast<double>(clean) / static_cast<double>(keys.size());
}

void ReferenceList::validate() const {
  require(!classes.empty(), ErrorCode::kModelMismatch, "reference list has no classes");
  require(q_s >= 0.0 && q_s <= 1.0 && q_p >= 0.0 && q_p <= 1.0, ErrorCode::kModelMismatch,
          "quality factors must be in [0, 1]");
  require(majority_class >= 0 && static_cast<std::size_t>(majority_class) < classes.size(),
          ErrorCode::kModelMismatch, "majority class out of range");
  for (const auto* list : {&spelling, &phonetic}) {
    for (std::size_t i = 0; i < list->size(); ++i) {
      const auto& kc = (*list)[i];
      require(kc.per_class.size() == classes.size(), ErrorCode::kModelMismatch,
              "per-class counts have the wrong length");
      std::int64_t sum = 0;
      for (auto v : kc.per_class) sum += v;
      require(sum == kc.total, ErrorCode::kModelMismatch, "total differs from the per-class sum");
      require(i == 0 || (*list)[i - 1].key < kc.key, ErrorCode::kModelMismatch,
              "reference keys must be sorted and unique");
    }
  }
}

std::string ReferenceList::to_json() const {
  json doc;
  doc["format"] = "namecraft-n2c-reference";
  json cls = json::array();
  for (const auto& c : classes) cls.push_back(c.name);
  doc["classes"] = cls;
  doc["q_s"] = q_s;
  doc["q_p"] = q_p;
  doc["majority_class"] = classes[static_cast<std::size_t>(majority_class)].name;
  for (const auto& [name, list] : {std::pair{"spelling", &spelling}, std::pair{"phonetic", &phonetic}}) {
    json obj = json::object();
    for (const auto& kc : *list) obj[kc.key] = kc.per_class;
    doc[name] = std::move(obj);
  }
  return doc.dump(1);
}

ReferenceList ReferenceList::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, std::string("reference list is not valid JSON: ") + e.what());
  }
  try {
    ReferenceList ref;
    const auto& names = doc.at("classes");
    for (std::size_t i = 0; i < names.size(); ++i) {
      ref.classes.push_back({static_cast<int>(i), names[i].get<std::string>()});
    }
    require(!ref.classes.empty(), ErrorCode::kSchema, "reference list has no classes");
    ref.spelling = keys_from_json(doc.at("spelling"), ref.classes.size());
    ref.phonetic = keys_from_json(doc.at("phonetic"), ref.classes.size());
    // External lists may omit the quality factors; derive them then.
    ref.q_s = doc.contains("q_s") ? doc["q_s"].get<double>() : unambiguous_fraction(ref.spelling);
    ref.q_p = doc.contains("q_p") ? doc["q_p"].get<double>() : unambiguous_fraction(ref.phonetic);
    ref.majority_class = 0;
    if (doc.contains("majority_class")) {
      const auto m = doc["majority_class"].get<std::string>();
      auto it = std::find_if(ref.classes.begin(), ref.classes.end(),
                             [&](const corpus::ClassLabel& c) { return c.name == m; });
      require(it != ref.classes.end(), ErrorCode::kSchema, "unknown majority class '" + m + "'");
      ref.majority_class = it->id;
    }
    try {
      ref.validate();
    } catch (const Error& e) {
      fail(ErrorCode::kSchema, e.what());
    }
    return ref;
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, std::string("malformed reference list: ") + e.what());
  }
}

ReferenceList build_reference(const corpus::Dataset& train) {
  const std::size_t k = train.num_classes();
  require(k >= 1, ErrorCode::kEmptyCorpus, "dataset has no classes");
  std::map<std::string, std::vector<std::int64_t>> spell, phon;
  std::vector<std::int64_t> records(k, 0);
  for (const auto& rec : train.records) {
    require(rec.label.has_value(), ErrorCode::kLabel, "reference records must be labeled");
    const auto y = static_cast<std::size_t>(*rec.label);
    ++records[y];
    for (auto part : corpus::name_parts(rec.primary_name)) {
      if (part.empty()) continue;
      auto& s = spell[std::string(part)];
      s.resize(k, 0);
      ++s[y];
      auto& p = phon[soundex_code(part)];
      p.resize(k, 0);
      ++p[y];
    }
  }
  require(!spell.empty(), ErrorCode::kEmptyCorpus, "no name parts to build a reference list from");
  ReferenceList ref;
  ref.classes = train.classes;
  ref.spelling = to_sorted(spell);
  ref.phonetic = to_sorted(phon);
  ref.q_s = unambiguous_fraction(ref.spelling);
  ref.q_p = unambiguous_fraction(ref.phonetic);
  ref.majority_class = static_cast<int>(std::max_element(records.begin(), records.end()) - records.begin());
  return ref;
}

double part_certainty(std::string_view part, int cls, const ReferenceList& ref) {
  check_class(cls, ref);
  const KeyCounts* s = ref.find_spelling(part);
  const KeyCounts* p = ref.find_phonetic(soundex_code(part));
  require(s || p, ErrorCode::kNoMatch, "name part '" + std::string(part) + "' has no match");
  return certainty_from(s, p, cls, ref);
}

double aggregate_certainty(std::span<const std::pair<double, double>> matches) {
  double prod = 1.0;
  for (const auto& [e, i] : matches) prod *= (e - i) / e;
  return 1.0 - prod;
}

double name_certainty(std::string_view canonical, int cls, const ReferenceList& ref,
                      const corpus::PreprocessConfig& cfg) {
  check_class(cls, ref);
  const auto c = classify(canonical, ref, false, cfg);
  require(c.matched_parts > 0, ErrorCode::kNoMatch, "no name part matches the reference list");
  return c.certainty[static_cast<std::size_t>(cls)];
}

Classification classify(std::string_view canonical, const ReferenceList& ref, bool majority_tiebreak,
                        const corpus::PreprocessConfig& cfg) {
  const std::size_t k = ref.classes.size();
  Classification out;
  out.certainty.assign(k, 0.0);
  std::vector<double> prod(k, 1.0);
  for (auto part : corpus::name_parts(canonical, cfg)) {
    if (part.empty()) continue;
    ++out.total_parts;
    const KeyCounts* s = ref.find_spelling(part);
    const KeyCounts* p = ref.find_phonetic(soundex_code(part));
    if (!s && !p) continue;
    ++out.matched_parts;
    const double e = static_cast<double>((s ? s->total : 0) + (p ? p->total : 0));
    for (std::size_t y = 0; y < k; ++y) {
      prod[y] *= (e - certainty_from(s, p, static_cast<int>(y), ref)) / e;
    }
  }
  if (out.matched_parts == 0) {
    out.label = majority_tiebreak ? ref.majority_class : kUnclassified;
    return out;
  }
  for (std::size_t y = 0; y < k; ++y) out.certainty[y] = 1.0 - prod[y];
  std::size_t best = 0;
  for (std::size_t y = 1; y < k; ++y) {
    if (out.certainty[y] > out.certainty[best]) best = y;
  }
  bool tie = false;
  for (std::size_t y = 0; y < k; ++y) {
    if (y != best && out.certainty[y] == out.certainty[best]) tie = true;
  }
  if (tie) {
    out.label = majority_tiebreak ? ref.majority_class : kAmbiguous;
  } else {
    out.label = static_cast<int>(best);
  }
  return out;
}

}  // namespace namecraft::n2c
