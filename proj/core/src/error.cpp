// Copyright 2026 The Modex Authors
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

#include "modex/error.hpp"

namespace modex {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingMetadata: return "MissingMetadata";
    case ErrorCode::kCorruptSamples: return "CorruptSamples";
    case ErrorCode::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::kNonIntegerFactor: return "NonIntegerFactor";
    case ErrorCode::kSeriesTooShort: return "SeriesTooShort";
    case ErrorCode::kKindMismatch: return "KindMismatch";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBlockTooLarge: return "BlockTooLarge";
    case ErrorCode::kNeedTwoChannels: return "NeedTwoChannels";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kAxisMismatch: return "AxisMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ToString(code)) + ": " + message),
      code_(code) {}

}  // namespace modex
