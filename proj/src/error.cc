// Copyright 2026 The MAS Authors.
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

#include "mas/error.h"

namespace mas {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::kOverlappingSpans: return "OverlappingSpans";
    case ErrorCode::kTooFewCandidates: return "TooFewCandidates";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDegenerateAttention: return "DegenerateAttention";
    case ErrorCode::kCandidateNotFound: return "CandidateNotFound";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kMalformedXml: return "MalformedXml";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kBadAnswerLetter: return "BadAnswerLetter";
    case ErrorCode::kMalformedJson: return "MalformedJson";
    case ErrorCode::kSpanMismatch: return "SpanMismatch";
    case ErrorCode::kInvalidInstance: return "InvalidInstance";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kManifestMismatch: return "ManifestMismatch";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kBadIndex: return "BadIndex";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDumpRootMissing: return "DumpRootMissing";
  }
  return "Unknown";
}

}  // namespace mas
