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

#ifndef MAS_ERROR_H_
#define MAS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mas {

// Every failure raised by the library carries one of these codes so callers
// (the evaluator, the CLI) can branch on the kind without parsing messages.
enum class ErrorCode {
  // Scoring core.
  kSpanOutOfRange,
  kOverlappingSpans,
  kTooFewCandidates,
  kDimensionMismatch,
  kDegenerateAttention,
  // Span alignment.
  kCandidateNotFound,
  kAlignmentError,
  // Dataset parsing.
  kMalformedXml,
  kMissingField,
  kBadAnswerLetter,
  kMalformedJson,
  kSpanMismatch,
  kInvalidInstance,
  // Attention dumps.
  kMissingFile,
  kManifestMismatch,
  kBadVersion,
  kIoFailure,
  kBadIndex,
  kInvalidArgument,
  // Evaluation.
  kDumpRootMissing,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mas

#endif  // MAS_ERROR_H_
