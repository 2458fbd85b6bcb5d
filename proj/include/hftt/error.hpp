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

#pragma once

#include <stdexcept>
#include <string>

namespace hftt {

enum class ErrorKind {
  kFormat,      // bad magic / version / malformed text
  kCorruption,  // truncated or inconsistent payload
  kValidation,  // argument or invariant violation
  kDegenerate,  // zero rows, empty groups, collapsed means
  kIo,          // filesystem failures
  kNumerical,   // non-finite values during optimization
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception type for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

/// Process exit code for a failure: 1 I/O, 2 validation, 3 numerical.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace hftt
