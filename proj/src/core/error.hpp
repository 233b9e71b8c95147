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

#ifndef NAMECRAFT_CORE_ERROR_HPP_
#define NAMECRAFT_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace namecraft {

// Numeric values are part of the C ABI (see namecraft.h); keep them stable.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kSchema = 3,
  kLabel = 4,
  kEmptyName = 5,
  kRatio = 6,
  kEmptyClass = 7,
  kBadProfile = 8,
  kEmptyCorpus = 9,
  kNotConverged = 10,
  kDimensionMismatch = 11,
  kTooLong = 12,
  kUnknownChar = 13,
  kDiverged = 14,
  kEmptyDataset = 15,
  kNoMatch = 16,
  kModelMismatch = 17,
  kLengthMismatch = 18,
  kVersion = 19,
  kShapeMismatch = 20,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace namecraft

#endif  // NAMECRAFT_CORE_ERROR_HPP_
