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

#include "core/csv.hpp"

#include <algorithm>
#include <cctype>

#include "core/error.hpp"

namespace namecraft {

namespace {

std::string trim_lower(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

NameCsvReader::NameCsvReader(const std::string& path, bool partial_header) : in_(path), path_(path) {
  if (!in_) fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::string> header;
  std::size_t start = 0;
  if (!read_record(header, start)) {
    fail(ErrorCode::kSchema, path + ": empty file, expected header name,relative_name,label");
  }
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  const std::vector<std::string> expected = {"name", "relative_name", "label"};
  bool ok = header.size() == expected.size() || (partial_header && !header.empty() && header.size() < 3);
  for (std::size_t i = 0; ok && i < header.size(); ++i) ok = trim_lower(header[i]) == expected[i];
  if (!ok) {
    fail(ErrorCode::kSchema, path + ": line 1: header must be name,relative_name,label");
  }
  columns_ = header.size();
}

bool NameCsvReader::read_record(std::vector<std::string>& fields, std::size_t& start_line) {
  fields.clear();
  std::string line;
  // Skip blank lines between records.
  for (;;) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  start_line = line_;

  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  for (;;) {
    if (i >= line.size()) {
      if (quoted) {
        // Quoted field continues on the next physical line.
        if (!std::getline(in_, line)) {
          fail(ErrorCode::kSchema, path_ + ": line " + std::to_string(start_line) +
                                       ": unterminated quoted field");
        }
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        field.push_back('\n');
        i = 0;
        continue;
      }
      fields.push_back(std::move(field));
      return true;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
    ++i;
  }
}

bool NameCsvReader::next(Row& row) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  if (!read_record(fields, start)) return false;
  if (fields.size() != columns_) {
    fail(ErrorCode::kSchema, path_ + ": line " + std::to_string(start) + ": expected " +
                                 std::to_string(columns_) + " columns, got " + std::to_string(fields.size()));
  }
  fields.resize(3);
  row.name = std::move(fields[0]);
  row.relative_name = std::move(fields[1]);
  row.label = std::move(fields[2]);
  row.line = start;
  return true;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace namecraft
