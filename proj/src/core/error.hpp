// Copyright 2026 The gsdlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace gsdlab {

enum class Status {
  kOk = 0,
  kInvalidArgument,
  kDimMismatch,
  kRankDeficient,
  kBadK,
  kNonFinite,
  kNonSymmetric,
  kZeroGap,
  kBadMagnitude,
  kEmptyMatrix,
  kIoError,
  kParseError,
  kInternal,
};

inline const char* status_name(Status s) {
  switch (s) {
    case Status::kOk: return "ok";
    case Status::kInvalidArgument: return "invalid-argument";
    case Status::kDimMismatch: return "dim-mismatch";
    case Status::kRankDeficient: return "rank-deficient";
    case Status::kBadK: return "bad-k";
    case Status::kNonFinite: return "non-finite";
    case Status::kNonSymmetric: return "non-symmetric";
    case Status::kZeroGap: return "zero-gap";
    case Status::kBadMagnitude: return "bad-magnitude";
    case Status::kEmptyMatrix: return "empty-matrix";
    case Status::kIoError: return "io-error";
    case Status::kParseError: return "parse-error";
    case Status::kInternal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

[[noreturn]] inline void fail(Status s, const std::string& msg) {
  throw Error(s, msg);
}

inline void require(bool cond, Status s, const std::string& msg) {
  if (!cond) fail(s, msg);
}

}  // namespace gsdlab
