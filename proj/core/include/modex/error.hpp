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

#ifndef MODEX_ERROR_HPP_
#define MODEX_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace modex {

enum class ErrorCode {
  kMissingMetadata,
  kCorruptSamples,
  kUnsupportedEncoding,
  kNonIntegerFactor,
  kSeriesTooShort,
  kKindMismatch,
  kDimMismatch,
  kSingularSystem,
  kNonFinite,
  kBlockTooLarge,
  kNeedTwoChannels,
  kDegenerateDistribution,
  kInvalidSpec,
  kAxisMismatch,
  kInvalidConfig,
  kIoError,
};

std::string_view ToString(ErrorCode code);

// All library failures are reported through this exception type; callers
// dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace modex

#endif  // MODEX_ERROR_HPP_
