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

#ifndef NAMECRAFT_CORE_CSV_HPP_
#define NAMECRAFT_CORE_CSV_HPP_

#include <cstddef>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace namecraft {

// Streaming reader for the `name,relative_name,label` input files. Rows are
// RFC 4180 style: comma separated, optionally double-quoted, `""` escapes a
// quote inside a quoted field, quoted fields may span lines.
class NameCsvReader {
 public:
  struct Row {
    std::string name;
    std::string relative_name;
    std::string label;
    std::size_t line = 0;  // 1-based line where the row starts
  };

  // Opens the file and validates the header. Throws Error(kIo / kSchema).
  // With `partial_header`, `name` and `name,relative_name` headers are
  // accepted too and the missing cells read as empty.
  explicit NameCsvReader(const std::string& path, bool partial_header = false);

  std::size_t columns() const { return columns_; }

  // Returns false at end of input. Throws Error(kSchema) on a bad row.
  bool next(Row& row);

 private:
  bool read_record(std::vector<std::string>& fields, std::size_t& start_line);

  std::ifstream in_;
  std::string path_;
  std::size_t line_ = 0;
  std::size_t columns_ = 3;
};

// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

}  // namespace namecraft

#endif  // NAMECRAFT_CORE_CSV_HPP_
