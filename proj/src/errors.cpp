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

#include "ehopt/errors.hpp"

namespace ehopt {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kInfeasibleLoad: return "InfeasibleLoad";
    case ErrorCode::kSaturated: return "Saturated";
    case ErrorCode::kNoRealSolution: return "NoRealSolution";
    case ErrorCode::kNoFeasibleLimit: return "NoFeasibleLimit";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kDegenerateSupport: return "DegenerateSupport";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kTraceFormat: return "TraceFormat";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ehopt
