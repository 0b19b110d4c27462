// Copyright (c) 2026 The bcauth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BCAUTH_ERROR_H_
#define BCAUTH_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace bcauth {

enum class ErrorKind {
  kInvalidArgument,  // precondition violated by the caller
  kIo,               // file could not be read or written
  kNotFound,         // unknown user, profile, protocol, ...
  kDegenerate,       // input is valid but carries no usable content
};

const char* ErrorKindName(ErrorKind kind);

// All library failures are reported through this exception. The stage tag is
// filled in by pipeline code that wants to report where a failure happened.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string stage = {})
      : std::runtime_error(std::move(message)),
        kind_(kind),
        stage_(std::move(stage)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }

  Error WithStage(std::string stage) const {
    return Error(kind_, what(), std::move(stage));
  }

 private:
  ErrorKind kind_;
  std::string stage_;
};

inline void Require(bool condition, const std::string& message,
                    ErrorKind kind = ErrorKind::kInvalidArgument) {
  if (!condition) throw Error(kind, message);
}

}  // namespace bcauth

#endif  // BCAUTH_ERROR_H_
