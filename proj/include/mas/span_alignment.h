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

// Maps pronoun and candidate strings onto character spans of a sentence, and
// character spans onto the subword tokens of an attention dump.

#ifndef MAS_SPAN_ALIGNMENT_H_
#define MAS_SPAN_ALIGNMENT_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mas {

// Code point range [start, end) of a sentence together with the covered text.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  bool operator==(const CharSpan &) const = default;
};

// Builds a CharSpan over `sentence`, filling in the surface text.
CharSpan make_char_span(std::string_view sentence, std::size_t start,
                        std::size_t end);

struct SpanAlignment {
  CharSpan char_span;
  // Strictly increasing, contiguous, never a boundary token.
  std::vector<std::size_t> token_indices;

  bool operator==(const SpanAlignment &) const = default;
};

enum class OccurrencePolicy { kFirst, kLast, kNearestBeforePronoun };

std::string_view to_string(OccurrencePolicy policy);
std::optional<OccurrencePolicy> parse_occurrence_policy(std::string_view name);

// Finds `candidate_text` in `sentence` (case-insensitive, whitespace
// normalized, on word boundaries). If there is no match, retries without a
// leading article, then with the final word alone. Occurrences overlapping
// the pronoun are ignored. Throws Error(kCandidateNotFound).
CharSpan locate_candidate(std::string_view sentence,
                          std::string_view candidate_text,
                          const CharSpan &pronoun_span,
                          OccurrencePolicy policy);

// Tokens of the form "[XYZ]" other than [UNK]; they never cover text.
bool is_boundary_token(std::string_view token);

// Character range covered by each token of a greedy left-to-right walk over
// `sentence`. Boundary tokens get std::nullopt.
struct TokenRange {
  std::size_t start = 0;
  std::size_t end = 0;
};
std::vector<std::optional<TokenRange>> token_char_ranges(
    std::span<const std::string> tokens, std::string_view sentence,
    bool casefold);

// Smallest contiguous run of tokens whose character ranges cover `span`.
// Throws Error(kAlignmentError) when the tokens do not spell the sentence or
// no token covers the span.
SpanAlignment align_span(std::span<const std::string> tokens,
                         std::string_view sentence, const CharSpan &span,
                         bool casefold);

}  // namespace mas

#endif  // MAS_SPAN_ALIGNMENT_H_
