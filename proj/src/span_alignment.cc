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

#include "mas/span_alignment.h"

#include <algorithm>

#include "mas/error.h"
#include "mas/utf8.h"

namespace mas {

namespace {

// A sentence character after normalization, remembering where it came from.
struct NormChar {
  char32_t c;
  std::size_t orig;
};

bool is_word_char(char32_t c) { return !utf8::is_space(c) && !utf8::is_punct(c); }

bool is_ignorable(char32_t c) {
  return c < 0x20 ? !utf8::is_space(c)
                  : (c == 0x7F || (c >= 0x200B && c <= 0x200D) || c == 0xFEFF);
}

// Case-folded text with whitespace runs collapsed to one space.
std::vector<NormChar> normalize_for_search(std::u32string_view text) {
  std::vector<NormChar> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (utf8::is_space(text[i])) {
      if (!out.empty() && out.back().c == U' ') continue;
      out.push_back({U' ', i});
    } else {
      out.push_back({utf8::fold(text[i]), i});
    }
  }
  return out;
}

std::u32string normalize_query(std::string_view text) {
  std::u32string out;
  for (const NormChar &nc : normalize_for_search(utf8::decode(text))) {
    out.push_back(nc.c);
  }
  const auto first = out.find_first_not_of(U' ');
  if (first == std::u32string::npos) return {};
  const auto last = out.find_last_not_of(U' ');
  return out.substr(first, last - first + 1);
}

struct Occurrence {
  std::size_t start;
  std::size_t end;
};

std::vector<Occurrence> find_occurrences(const std::vector<NormChar> &text,
                                         std::u32string_view query,
                                         const CharSpan &pronoun) {
  std::vector<Occurrence> found;
  if (query.empty() || query.size() > text.size()) return found;
  for (std::size_t i = 0; i + query.size() <= text.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < query.size() && match; ++j) {
      match = text[i + j].c == query[j];
    }
    if (!match) continue;
    const std::size_t last = i + query.size() - 1;
    const bool left_ok = i == 0 || !is_word_char(text[i - 1].c) ||
                         !is_word_char(query.front());
    const bool right_ok = last + 1 == text.size() ||
                          !is_word_char(text[last + 1].c) ||
                          !is_word_char(query.back());
    if (!left_ok || !right_ok) continue;
    const Occurrence occ{text[i].orig, text[last].orig + 1};
    if (occ.start < pronoun.end && pronoun.start < occ.end) continue;
    found.push_back(occ);
  }
  return found;
}

std::u32string strip_article(std::u32string_view query) {
  for (std::u32string_view article : {U"the ", U"a ", U"an "}) {
    if (query.size() > article.size() && query.starts_with(article)) {
      return std::u32string(query.substr(article.size()));
    }
  }
  return std::u32string(query);
}

std::u32string head_word(std::u32string_view query) {
  const auto space = query.find_last_of(U' ');
  std::u32string_view word =
      space == std::u32string_view::npos ? query : query.substr(space + 1);
  while (!word.empty() && utf8::is_punct(word.front())) word.remove_prefix(1);
  while (!word.empty() && utf8::is_punct(word.back())) word.remove_suffix(1);
  return std::u32string(word);
}

const Occurrence &pick(const std::vector<Occurrence> &found,
                       const CharSpan &pronoun, OccurrencePolicy policy) {
  switch (policy) {
    case OccurrencePolicy::kFirst:
      return found.front();
    case OccurrencePolicy::kLast:
      return found.back();
    case OccurrencePolicy::kNearestBeforePronoun: {
      const Occurrence *best = nullptr;
      for (const Occurrence &occ : found) {
        if (occ.end <= pronoun.start && (!best || occ.end > best->end)) {
          best = &occ;
        }
      }
      if (best) return *best;
      for (const Occurrence &occ : found) {
        if (occ.start >= pronoun.start) return occ;
      }
      return found.front();
    }
  }
  return found.front();
}

}  // namespace

CharSpan make_char_span(std::string_view sentence, std::size_t start,
                        std::size_t end) {
  return CharSpan{start, end, utf8::substr(sentence, start, end)};
}

std::string_view to_string(OccurrencePolicy policy) {
  switch (policy) {
    case OccurrencePolicy::kFirst: return "first";
    case OccurrencePolicy::kLast: return "last";
    case OccurrencePolicy::kNearestBeforePronoun: return "nearest-before";
  }
  return "nearest-before";
}

std::optional<OccurrencePolicy> parse_occurrence_policy(std::string_view name) {
  if (name == "first") return OccurrencePolicy::kFirst;
  if (name == "last") return OccurrencePolicy::kLast;
  if (name == "nearest-before") return OccurrencePolicy::kNearestBeforePronoun;
  return std::nullopt;
}

CharSpan locate_candidate(std::string_view sentence,
                          std::string_view candidate_text,
                          const CharSpan &pronoun_span,
                          OccurrencePolicy policy) {
  const std::u32string query = normalize_query(candidate_text);
  if (sentence.empty() || query.empty()) {
    throw Error(ErrorCode::kCandidateNotFound, "empty sentence or candidate");
  }
  const std::vector<NormChar> text = normalize_for_search(utf8::decode(sentence));

  std::vector<std::u32string> attempts{query};
  for (std::u32string next : {strip_article(query), head_word(query)}) {
    if (!next.empty() &&
        std::find(attempts.begin(), attempts.end(), next) == attempts.end()) {
      attempts.push_back(std::move(next));
    }
  }
  for (const std::u32string &attempt : attempts) {
    const auto found = find_occurrences(text, attempt, pronoun_span);
    if (found.empty()) continue;
    const Occurrence &occ = pick(found, pronoun_span, policy);
    return make_char_span(sentence, occ.start, occ.end);
  }
  throw Error(ErrorCode::kCandidateNotFound,
              "\"" + std::string(candidate_text) + "\" not found in \"" +
                  std::string(sentence) + "\"");
}

bool is_boundary_token(std::string_view token) {
  return token.size() > 2 && token.front() == '[' && token.back() == ']' &&
         token != "[UNK]";
}

std::vector<std::optional<TokenRange>> token_char_ranges(
    std::span<const std::string> tokens, std::string_view sentence,
    bool casefold) {
  const std::u32string decoded = utf8::decode(sentence);
  std::vector<NormChar> text;
  text.reserve(decoded.size());
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    char32_t c = decoded[i];
    if (is_ignorable(c)) continue;
    if (casefold) {
      if (utf8::is_combining_mark(c)) continue;
      c = utf8::fold(c);
    }
    text.push_back({c, i});
  }

  auto fail = [&](std::size_t token, std::size_t pos, const char *what) {
    const std::size_t at = pos < text.size() ? text[pos].orig : decoded.size();
    throw Error(ErrorCode::kAlignmentError,
                std::string(what) + " (token " + std::to_string(token) +
                    " \"" + tokens[token] + "\" at character " +
                    std::to_string(at) + " of \"" + std::string(sentence) +
                    "\")");
  };

  std::vector<std::optional<TokenRange>> ranges(tokens.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string &token = tokens[i];
    if (is_boundary_token(token)) continue;
    while (pos < text.size() && utf8::is_space(text[pos].c)) ++pos;
    if (pos == text.size()) fail(i, pos, "token past end of sentence");

    const std::size_t begin = pos;
    if (token == "[UNK]") {
      // An unknown token stands for one word, or one punctuation mark.
      if (utf8::is_punct(text[pos].c)) {
        ++pos;
      } else {
        while (pos < text.size() && is_word_char(text[pos].c)) ++pos;
      }
    } else {
      std::string_view piece = token;
      if (piece.size() > 2 && piece.starts_with("##")) piece.remove_prefix(2);
      for (char32_t c : utf8::decode(piece)) {
        if (casefold) {
          if (utf8::is_combining_mark(c)) continue;
          c = utf8::fold(c);
        }
        if (pos == text.size() || text[pos].c != c) {
          fail(i, pos, "token does not match sentence");
        }
        ++pos;
      }
      if (pos == begin) fail(i, pos, "empty token");
    }
    ranges[i] = TokenRange{text[begin].orig, text[pos - 1].orig + 1};
  }
  while (pos < text.size() && utf8::is_space(text[pos].c)) ++pos;
  if (pos != text.size()) {
    throw Error(ErrorCode::kAlignmentError,
                "tokens end at character " + std::to_string(text[pos].orig) +
                    " of \"" + std::string(sentence) + "\"");
  }
  return ranges;
}

SpanAlignment align_span(std::span<const std::string> tokens,
                         std::string_view sentence, const CharSpan &span,
                         bool casefold) {
  if (span.start >= span.end || span.end > utf8::length(sentence)) {
    throw Error(ErrorCode::kAlignmentError,
                "span [" + std::to_string(span.start) + ", " +
                    std::to_string(span.end) + ") outside sentence");
  }
  const auto ranges = token_char_ranges(tokens, sentence, casefold);
  SpanAlignment alignment{span, {}};
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (!ranges[i]) continue;
    if (ranges[i]->start < span.end && span.start < ranges[i]->end) {
      if (!alignment.token_indices.empty() &&
          alignment.token_indices.back() + 1 != i) {
        throw Error(ErrorCode::kAlignmentError,
                    "span \"" + span.surface + "\" covers non-adjacent tokens");
      }
      alignment.token_indices.push_back(i);
    }
  }
  if (alignment.token_indices.empty()) {
    throw Error(ErrorCode::kAlignmentError,
                "no token covers \"" + span.surface + "\"");
  }
  return alignment;
}

}  // namespace mas
