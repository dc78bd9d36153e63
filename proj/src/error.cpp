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

#include "acecefr/error.hpp"

namespace acecefr {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kUnknownLevel: return "UnknownLevel";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kLabelMismatch: return "LabelMismatch";
    case ErrorCode::kMissingLevels: return "MissingLevels";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kMalformedModel: return "MalformedModel";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorCode::kUndefinedKappa: return "UndefinedKappa";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kUnparseableCompletion: return "UnparseableCompletion";
    case ErrorCode::kAllRunsFailed: return "AllRunsFailed";
    case ErrorCode::kTransport: return "TransportError";
    case ErrorCode::kTranscriptMiss: return "TranscriptMiss";
  }
  return "Unknown";
}

}  // namespace acecefr
