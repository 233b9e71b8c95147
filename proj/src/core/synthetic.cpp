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

#include "core/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace namecraft::corpus {

namespace {

using nlohmann::json;

constexpr double kNormTolerance = 1e-6;

void check_mix(const std::vector<std::pair<int, double>>& mix, std::size_t n_styles,
               const std::string& what) {
  require(!mix.empty(), ErrorCode::kBadProfile, what + ": empty style mixture");
  double sum = 0.0;
  for (const auto& [style, p] : mix) {
    require(style >= 0 && static_cast<std::size_t>(style) < n_styles, ErrorCode::kBadProfile,
            what + ": unknown style");
    require(p >= 0.0, ErrorCode::kBadProfile, what + ": negative probability");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= kNormTolerance, ErrorCode::kBadProfile,
          what + ": style mixture does not sum to 1");
}

int draw(Rng& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

std::vector<double> cumulate(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

NameStyle parse_style(const std::string& name, const json& j) {
  NameStyle s;
  s.name = name;
  require(j.contains("letter_weights") && j["letter_weights"].is_object(), ErrorCode::kBadProfile,
          "style " + name + ": letter_weights object required");
  for (const auto& [key, value] : j["letter_weights"].items()) {
    require(key.size() == 1 && key[0] >= 'A' && key[0] <= 'Z' && value.is_number(),
            ErrorCode::kBadProfile, "style " + name + ": bad letter weight '" + key + "'");
    s.letter_weights[static_cast<std::size_t>(key[0] - 'A')] = value.get<double>();
  }
  auto range = [&](const char* key, int& lo, int& hi) {
    if (!j.contains(key)) return;
    const auto& r = j[key];
    require(r.is_array() && r.size() == 2 && r[0].is_number_integer() && r[1].is_number_integer(),
            ErrorCode::kBadProfile, "style " + name + ": " + key + " must be [min, max]");
    lo = r[0].get<int>();
    hi = r[1].get<int>();
  };
  range("part_length", s.part_length_min, s.part_length_max);
  range("part_count", s.part_count_min, s.part_count_max);
  return s;
}

json style_json(const NameStyle& s) {
  json weights = json::object();
  for (std::size_t i = 0; i < 26; ++i) {
    if (s.letter_weights[i] != 0.0) weights[std::string(1, static_cast<char>('A' + i))] = s.letter_weights[i];
  }
  return json{{"letter_weights", weights},
              {"part_length", {s.part_length_min, s.part_length_max}},
              {"part_count", {s.part_count_min, s.part_count_max}}};
}

std::vector<std::pair<int, double>> parse_mix(const json& j, const SyntheticProfile& p,
                                              const std::string& what) {
  require(j.is_object(), ErrorCode::kBadProfile, what + ": style mixture must be an object");
  std::vector<std::pair<int, double>> mix;
  for (const auto& [key, value] : j.items()) {
    int idx = -1;
    for (std::size_t i = 0; i < p.styles.size(); ++i) {
      if (p.styles[i].name == key) idx = static_cast<int>(i);
    }
    require(idx >= 0, ErrorCode::kBadProfile, what + ": unknown style '" + key + "'");
    require(value.is_number(), ErrorCode::kBadProfile, what + ": probability must be a number");
    mix.emplace_back(idx, value.get<double>());
  }
  return mix;
}

std::string draw_name(Rng& rng, const NameStyle& style, const std::vector<double>& letters,
                      const PreprocessConfig& cfg) {
  std::string out;
  const int parts = rng.range(style.part_count_min, style.part_count_max);
  for (int p = 0; p < parts; ++p) {
    const int len = rng.range(style.part_length_min, style.part_length_max);
    out.push_back(cfg.part_open);
    for (int i = 0; i < len; ++i) out.push_back(static_cast<char>('A' + draw(rng, letters)));
    out.push_back(cfg.part_close);
  }
  return out;
}

// Background letter weights shared by the built-in styles; F, P, Q, V, W and
// Z are left at zero and set per style.
std::array<double, 26> background_letters() {
  std::array<double, 26> w{};
  auto set = [&](char c, double v) { w[static_cast<std::size_t>(c - 'A')] = v; };
  set('A', 0.13); set('B', 0.02); set('C', 0.02); set('D', 0.04); set('E', 0.07);
  set('G', 0.03); set('H', 0.05); set('I', 0.08); set('J', 0.02); set('K', 0.04);
  set('L', 0.04); set('M', 0.05); set('N', 0.07); set('O', 0.04); set('R', 0.07);
  set('S', 0.05); set('T', 0.04); set('U', 0.04); set('X', 0.004); set('Y', 0.02);
  return w;
}

NameStyle enriched_style(const std::string& name, const std::string& rich, const std::string& poor) {
  NameStyle s;
  s.name = name;
  s.letter_weights = background_letters();
  for (char c : rich) s.letter_weights[static_cast<std::size_t>(c - 'A')] = 0.10;
  for (char c : poor) s.letter_weights[static_cast<std::size_t>(c - 'A')] = 0.002;
  const double total = std::accumulate(s.letter_weights.begin(), s.letter_weights.end(), 0.0);
  for (auto& v : s.letter_weights) v /= total;
  s.part_length_min = 4;
  s.part_length_max = 8;
  s.part_count_min = 2;
  s.part_count_max = 3;
  return s;
}

}  // namespace

void SyntheticProfile::validate() const {
  require(!styles.empty() && !classes.empty(), ErrorCode::kBadProfile,
          "profile needs at least one style and one class");
  for (const auto& s : styles) {
    double sum = 0.0;
    for (double w : s.letter_weights) {
      require(w >= 0.0 && std::isfinite(w), ErrorCode::kBadProfile,
              "style " + s.name + ": letter weights must be finite and non-negative");
      sum += w;
    }
    require(std::abs(sum - 1.0) <= kNormTolerance, ErrorCode::kBadProfile,
            "style " + s.name + ": letter weights sum to " + std::to_string(sum) + ", not 1");
    require(s.part_length_min >= 1 && s.part_length_min <= s.part_length_max,
            ErrorCode::kBadProfile, "style " + s.name + ": bad part_length range");
    require(s.part_count_min >= 1 && s.part_count_min <= s.part_count_max, ErrorCode::kBadProfile,
            "style " + s.name + ": bad part_count range");
  }
  double total = 0.0;
  for (const auto& c : classes) {
    require(c.proportion >= 0.0, ErrorCode::kBadProfile, "class " + c.name + ": negative proportion");
    total += c.proportion;
    check_mix(c.primary_mix, styles.size(), "class " + c.name);
    require(c.relative_probability >= 0.0 && c.relative_probability <= 1.0, ErrorCode::kBadProfile,
            "class " + c.name + ": relative_probability outside [0,1]");
    if (c.relative_probability > 0.0) check_mix(c.relative_mix, styles.size(), "class " + c.name);
  }
  require(std::abs(total - 1.0) <= kNormTolerance, ErrorCode::kBadProfile,
          "class proportions do not sum to 1");
}

SyntheticProfile SyntheticProfile::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kBadProfile, std::string("profile is not valid JSON: ") + e.what());
  }
  require(j.is_object() && j.contains("classes") && j["classes"].is_array(), ErrorCode::kBadProfile,
          "profile needs a classes array");
  SyntheticProfile p;
  if (j.contains("styles")) {
    require(j["styles"].is_object(), ErrorCode::kBadProfile, "styles must be an object");
    for (const auto& [name, value] : j["styles"].items()) p.styles.push_back(parse_style(name, value));
  }
  for (const auto& c : j["classes"]) {
    require(c.is_object() && c.contains("name") && c["name"].is_string(), ErrorCode::kBadProfile,
            "each class needs a name");
    ClassProfile cp;
    cp.name = c["name"].get<std::string>();
    require(c.contains("proportion") && c["proportion"].is_number(), ErrorCode::kBadProfile,
            "class " + cp.name + ": proportion required");
    cp.proportion = c["proportion"].get<double>();
    if (c.contains("letter_weights")) {
      p.styles.push_back(parse_style(cp.name, c));
      cp.primary_mix = {{static_cast<int>(p.styles.size() - 1), 1.0}};
    } else {
      require(c.contains("style"), ErrorCode::kBadProfile,
              "class " + cp.name + ": style mixture or inline letter_weights required");
      cp.primary_mix = parse_mix(c["style"], p, "class " + cp.name);
    }
    if (c.contains("relative_probability")) {
      cp.relative_probability = c["relative_probability"].get<double>();
    }
    cp.relative_mix = c.contains("relative_style") ? parse_mix(c["relative_style"], p, "class " + cp.name)
                                                   : cp.primary_mix;
    p.classes.push_back(std::move(cp));
  }
  p.validate();
  return p;
}

std::string SyntheticProfile::to_json() const {
  json j;
  j["styles"] = json::object();
  for (const auto& s : styles) j["styles"][s.name] = style_json(s);
  j["classes"] = json::array();
  auto mix_json = [&](const std::vector<std::pair<int, double>>& mix) {
    json m = json::object();
    for (const auto& [style, prob] : mix) m[styles[static_cast<std::size_t>(style)].name] = prob;
    return m;
  };
  for (const auto& c : classes) {
    json cj{{"name", c.name}, {"proportion", c.proportion}, {"style", mix_json(c.primary_mix)}};
    if (c.relative_probability > 0.0) {
      cj["relative_probability"] = c.relative_probability;
      cj["relative_style"] = mix_json(c.relative_mix);
    }
    j["classes"].push_back(std::move(cj));
  }
  return j.dump(2) + "\n";
}

Dataset generate_synthetic(const SyntheticProfile& profile, std::size_t n, std::uint64_t seed,
                           const PreprocessConfig& cfg) {
  profile.validate();
  cfg.validate();
  const std::size_t k = profile.classes.size();

  // Largest-remainder apportionment; ties go to the lower class index.
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = static_cast<double>(n) * profile.classes[c].proportion;
    counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[c];
    remainders.emplace_back(exact - static_cast<double>(counts[c]), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i, ++assigned) {
    ++counts[remainders[i].second];
  }

  std::vector<std::vector<double>> letter_cdf;
  for (const auto& s : profile.styles) {
    letter_cdf.push_back(cumulate(std::vector<double>(s.letter_weights.begin(), s.letter_weights.end())));
  }
  auto mix_cdf = [](const std::vector<std::pair<int, double>>& mix) {
    std::vector<double> w;
    for (const auto& m : mix) w.push_back(m.second);
    return cumulate(w);
  };

  Rng rng(seed);
  Dataset ds;
  ds.provenance = "synthetic(seed=" + std::to_string(seed) + ")";
  for (std::size_t c = 0; c < k; ++c) {
    ds.classes.push_back({static_cast<int>(c), profile.classes[c].name});
  }
  for (std::size_t c = 0; c < k; ++c) {
    const auto& cp = profile.classes[c];
    const auto primary_cdf = mix_cdf(cp.primary_mix);
    const auto relative_cdf = cp.relative_probability > 0.0 ? mix_cdf(cp.relative_mix) : std::vector<double>{};
    for (std::size_t i = 0; i < counts[c]; ++i) {
      NameRecord rec;
      const auto ps = static_cast<std::size_t>(cp.primary_mix[static_cast<std::size_t>(draw(rng, primary_cdf))].first);
      rec.primary_name = draw_name(rng, profile.styles[ps], letter_cdf[ps], cfg);
      if (cp.relative_probability > 0.0 && rng.bernoulli(cp.relative_probability)) {
        const auto rs = static_cast<std::size_t>(cp.relative_mix[static_cast<std::size_t>(draw(rng, relative_cdf))].first);
        rec.relative_name = draw_name(rng, profile.styles[rs], letter_cdf[rs], cfg);
      }
      rec.label = static_cast<int>(c);
      ds.records.push_back(std::move(rec));
    }
  }
  rng.shuffle(ds.records);
  return ds;
}

SyntheticProfile letter_asymmetry_profile() {
  SyntheticProfile p;
  p.styles.push_back(enriched_style("arabic", "FQZ", "PVW"));
  p.styles.push_back(enriched_style("indic", "PVW", "FQZ"));
  p.classes.push_back({"Muslim", 0.5, {{0, 1.0}}, 0.0, {}});
  p.classes.push_back({"NonMuslim", 0.5, {{1, 1.0}}, 0.0, {}});
  return p;
}

SyntheticProfile household_profile() {
  SyntheticProfile p;
  p.styles.push_back(enriched_style("arabic", "FQZ", "PVW"));
  p.styles.push_back(enriched_style("indic", "PVW", "FQZ"));
  p.classes.push_back({"Muslim", 0.2, {{0, 0.7}, {1, 0.3}}, 1.0, {{0, 0.7}, {1, 0.3}}});
  p.classes.push_back({"NonMuslim", 0.8, {{1, 1.0}}, 1.0, {{1, 1.0}}});
  return p;
}

SyntheticProfile builtin_profile(const std::string& name) {
  if (name == "letter-asymmetry") return letter_asymmetry_profile();
  if (name == "household") return household_profile();
  fail(ErrorCode::kBadProfile, "unknown built-in profile '" + name + "'");
}

void write_dataset_csv(const Dataset& ds, const std::string& path, const PreprocessConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  auto raw = [&](const std::string& canonical) {
    std::string s;
    for (auto part : name_parts(canonical, cfg)) {
      if (!s.empty()) s.push_back(' ');
      s += part;
    }
    return s;
  };
  out << "name,relative_name,label\n";
  for (const auto& r : ds.records) {
    out << csv_escape(raw(r.primary_name)) << ','
        << (r.relative_name ? csv_escape(raw(*r.relative_name)) : std::string()) << ','
        << (r.label ? csv_escape(ds.classes[static_cast<std::size_t>(*r.label)].name) : std::string())
        << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for " + path);
}

}  // namespace namecraft::corpus
