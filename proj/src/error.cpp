/*
 * Copyright 2026 The smartmlops Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "smartmlops/error.hpp"

namespace smartmlops {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kFailedPrecondition: return "failed-precondition";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDegenerateEvidence: return "degenerate-evidence";
  }
  return "unknown";
}

}  // namespace smartmlops
