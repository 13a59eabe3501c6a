// Copyright 2026 The ehopt Authors
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

#ifndef EHOPT_ERRORS_HPP_
#define EHOPT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ehopt {

// Error categories raised by the library. The C API maps each one onto a
// status code of the same name (see ehopt.h).
enum class ErrorCode {
  kInvalidInput = 1,
  kInfeasibleLoad,
  kSaturated,
  kNoRealSolution,
  kNoFeasibleLimit,
  kNumericalFailure,
  kInfeasible,
  kDegenerateSupport,
  kNonConvergence,
  kTraceFormat,
  kConfigError,
  kIoError,
};

const char* error_code_name(ErrorCode code) noexcept;

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

}  // namespace ehopt

#endif  // EHOPT_ERRORS_HPP_
