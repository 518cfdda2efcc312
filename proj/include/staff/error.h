// Copyright 2026 The Staff Authors. All Rights Reserved.
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

namespace staff {

// Coarse error categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
  kIo,            // unreadable/unwritable files
  kValidation,    // malformed input data or invalid configuration
  kMissingScore,  // a score oracle has no entry for a requested id
  kNumerical,     // non-finite values produced during compute
  kUnsupported,   // reserved feature that is declared but not built
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace staff
