/*
 * Copyright 2026 The acecefr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace acecefr {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps them onto exit codes and the service onto HTTP statuses.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kUnknownLevel,
  kOutOfRange,
  kEmptyInput,
  kEmptyCorpus,
  kEmptyText,
  kMalformedRecord,
  kDuplicateId,
  kLabelOutOfRange,
  kLabelMismatch,
  kMissingLevels,
  kInsufficientData,
  kNonFinite,
  kMalformedModel,
  kVersionMismatch,
  kLengthMismatch,
  kUndefinedCorrelation,
  kUndefinedKappa,
  kEmptyPool,
  kUnparseableCompletion,
  kAllRunsFailed,
  kTransport,
  kTranscriptMiss,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string_view name() const { return ErrorCodeName(code_); }

 private:
  ErrorCode code_;
};

}  // namespace acecefr
