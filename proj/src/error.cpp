// Copyright 2026 The HFTT Authors.
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

#include "hftt/error.hpp"

namespace hftt {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kFormat:
      return "format error";
    case ErrorKind::kCorruption:
      return "corruption error";
    case ErrorKind::kValidation:
      return "validation error";
    case ErrorKind::kDegenerate:
      return "degenerate input";
    case ErrorKind::kIo:
      return "I/O error";
    case ErrorKind::kNumerical:
      return "numerical failure";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kIo:
      return 1;
    case ErrorKind::kNumerical:
      return 3;
    default:
      return 2;
  }
}

}  // namespace hftt
