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

#include <random>

#include "doctest.h"
#include "mas/error.h"
#include "mas/span_alignment.h"
#include "mas/utf8.h"

namespace mas {
namespace {

const std::string kTrophy =
    "The trophy doesn't fit in the suitcase because it is too small.";

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIoFailure;
}

TEST_CASE("locate: case-insensitive match") {
  const CharSpan pronoun = make_char_span(kTrophy, 47, 49);
  REQUIRE(pronoun.surface == "it");
  const CharSpan span = locate_candidate(kTrophy, "the trophy", pronoun,
                                         OccurrencePolicy::kNearestBeforePronoun);
  CHECK(span == CharSpan{0, 10, "The trophy"});
  const CharSpan suitcase = locate_candidate(
      kTrophy, "the suitcase", pronoun, OccurrencePolicy::kNearestBeforePronoun);
  CHECK(suitcase == CharSpan{26, 38, "the suitcase"});
}

TEST_CASE("locate: nearest occurrence before the pronoun") {
  const std::string s = "A fish ate the fish food.";
  const CharSpan after{24, 25, "."};
  const CharSpan span = locate_candidate(s, "the fish", after,
                                         OccurrencePolicy::kNearestBeforePronoun);
  CHECK(span.start == 11);
  CHECK(span.surface == "the fish");

  const CharSpan fish_first =
      locate_candidate(s, "fish", after, OccurrencePolicy::kFirst);
  const CharSpan fish_nearest =
      locate_candidate(s, "fish", after, OccurrencePolicy::kNearestBeforePronoun);
  CHECK(fish_first.start == 2);
  CHECK(fish_nearest.start == 15);
  CHECK(locate_candidate(s, "fish", after, OccurrencePolicy::kLast).start == 15);
}

TEST_CASE("locate: falls back to the first occurrence after the pronoun") {
  const std::string s = "He said that John left.";
  const CharSpan he{0, 2, "He"};
  CHECK(locate_candidate(s, "John", he, OccurrencePolicy::kNearestBeforePronoun)
            .start == 13);
}

TEST_CASE("locate: article strip and head-noun fallbacks") {
  const std::string s = "Sam took his hat.";
  const CharSpan pronoun{9, 12, "his"};
  CHECK(locate_candidate(s, "the hat", pronoun,
                         OccurrencePolicy::kNearestBeforePronoun) ==
        CharSpan{13, 16, "hat"});

  const std::string t = "The man lifted the boy onto his shoulders.";
  const CharSpan his{28, 31, "his"};
  REQUIRE(make_char_span(t, 28, 31).surface == "his");
  CHECK(locate_candidate(t, "the little boy", his,
                         OccurrencePolicy::kNearestBeforePronoun)
            .surface == "boy");
}

TEST_CASE("locate: respects word boundaries and whitespace") {
  const std::string s = "The cathedral   cat sat.";
  const CharSpan pronoun{21, 24, "sat"};
  CHECK(locate_candidate(s, "cat", pronoun, OccurrencePolicy::kFirst).start ==
        16);
  CHECK(locate_candidate(s, "cathedral  cat", pronoun, OccurrencePolicy::kFirst)
            .surface == "cathedral   cat");
}

TEST_CASE("locate: not found") {
  const CharSpan pronoun = make_char_span(kTrophy, 47, 49);
  CHECK(code_of([&] {
          locate_candidate(kTrophy, "the elephant", pronoun,
                           OccurrencePolicy::kFirst);
        }) == ErrorCode::kCandidateNotFound);
  CHECK(code_of([&] {
          locate_candidate(kTrophy, "  ", pronoun, OccurrencePolicy::kFirst);
        }) == ErrorCode::kCandidateNotFound);
}

TEST_CASE("align: whole-word tokens") {
  const std::vector<std::string> tokens{"[CLS]", "the", "trophy", "is", "small",
                                        "[SEP]"};
  const auto a =
      align_span(tokens, "the trophy is small", CharSpan{0, 10, "the trophy"}, true);
  CHECK(a.token_indices == std::vector<std::size_t>{1, 2});
}

TEST_CASE("align: wordpiece continuations") {
  const std::vector<std::string> tokens{"[CLS]", "un", "##believ", "##able",
                                        "[SEP]"};
  const auto a =
      align_span(tokens, "unbelievable", CharSpan{0, 12, "unbelievable"}, true);
  CHECK(a.token_indices == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("align: unknown token consumes one word") {
  const std::vector<std::string> tokens{"[CLS]", "the", "[UNK]", "barked",
                                        "[SEP]"};
  const auto a =
      align_span(tokens, "the zyqqy barked", CharSpan{4, 9, "zyqqy"}, true);
  CHECK(a.token_indices == std::vector<std::size_t>{2});
}

TEST_CASE("align: casefold and accents follow the manifest") {
  const std::string s = "The Café doesn't open.";
  const std::vector<std::string> uncased{"[CLS]", "the", "cafe", "doesn", "'",
                                         "t",     "open", ".",   "[SEP]"};
  CHECK(align_span(uncased, s, make_char_span(s, 4, 8), true).token_indices ==
        std::vector<std::size_t>{2});
  CHECK(code_of([&] { align_span(uncased, s, make_char_span(s, 4, 8), false); }) ==
        ErrorCode::kAlignmentError);

  const std::vector<std::string> cased{"[CLS]", "The", "Café", "doesn", "'",
                                       "t",     "open", ".",    "[SEP]"};
  CHECK(align_span(cased, s, make_char_span(s, 4, 8), false).token_indices ==
        std::vector<std::size_t>{2});
}

TEST_CASE("align: mismatched token stream is an error") {
  const std::vector<std::string> tokens{"[CLS]", "the", "dog", "[SEP]"};
  CHECK(code_of([&] {
          align_span(tokens, "the cat", CharSpan{4, 7, "cat"}, true);
        }) == ErrorCode::kAlignmentError);
  // Tokens that stop short of the sentence.
  const std::vector<std::string> short_tokens{"[CLS]", "the", "[SEP]"};
  CHECK(code_of([&] {
          align_span(short_tokens, "the cat", CharSpan{0, 3, "the"}, true);
        }) == ErrorCode::kAlignmentError);
  // Span outside the sentence.
  CHECK(code_of([&] {
          align_span(tokens, "the dog", CharSpan{5, 20, "x"}, true);
        }) == ErrorCode::kAlignmentError);
}

TEST_CASE("align: never selects boundary tokens") {
  CHECK(is_boundary_token("[CLS]"));
  CHECK(is_boundary_token("[SEP]"));
  CHECK_FALSE(is_boundary_token("[UNK]"));
  CHECK_FALSE(is_boundary_token("["));
}

// Builds a sentence from random words, splits each word into WordPiece-like
// chunks, then checks the coverage and round-trip properties of the walk.
TEST_CASE("property: greedy walk covers every character and round-trips") {
  std::mt19937_64 rng(17);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz";
  const std::string punct = ".,;!?'";
  for (int trial = 0; trial < 200; ++trial) {
    std::string sentence;
    std::vector<std::string> tokens{"[CLS]"};
    const int words = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int w = 0; w < words; ++w) {
      if (!sentence.empty()) sentence += ' ';
      const int len = std::uniform_int_distribution<int>(1, 9)(rng);
      std::string word;
      for (int i = 0; i < len; ++i) {
        word += alphabet[std::uniform_int_distribution<int>(0, 25)(rng)];
      }
      std::string upper = word;
      if (rng() % 3 == 0) upper[0] = static_cast<char>(upper[0] - 32);
      sentence += upper;
      std::size_t pos = 0;
      while (pos < word.size()) {
        const std::size_t take = std::uniform_int_distribution<std::size_t>(
            1, word.size() - pos)(rng);
        tokens.push_back((pos == 0 ? "" : "##") + word.substr(pos, take));
        pos += take;
      }
      if (rng() % 4 == 0) {
        const char p = punct[rng() % punct.size()];
        sentence += p;
        tokens.push_back(std::string(1, p));
      }
    }
    tokens.push_back("[SEP]");

    const auto ranges = token_char_ranges(tokens, sentence, true);
    // Coverage: every non-space character belongs to exactly one token.
    std::vector<int> owners(sentence.size(), 0);
    for (const auto &r : ranges) {
      if (!r) continue;
      for (std::size_t i = r->start; i < r->end; ++i) ++owners[i];
    }
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      CHECK(owners[i] == (sentence[i] == ' ' ? 0 : 1));
    }

    // Round trip on a random character span.
    const std::size_t a =
        std::uniform_int_distribution<std::size_t>(0, sentence.size() - 1)(rng);
    const std::size_t b =
        std::uniform_int_distribution<std::size_t>(a + 1, sentence.size())(rng);
    const CharSpan span = make_char_span(sentence, a, b);
    if (span.surface.find_first_not_of(' ') == std::string::npos) continue;
    const auto aligned = align_span(tokens, sentence, span, true);
    std::string joined;
    for (std::size_t i : aligned.token_indices) {
      const std::string &t = tokens[i];
      joined += t.starts_with("##") && t.size() > 2 ? t.substr(2) : t;
    }
    std::string surface;
    for (char c : span.surface) {
      if (c != ' ') surface += static_cast<char>(std::tolower(c));
    }
    CHECK(joined.find(surface) != std::string::npos);
    for (std::size_t k = 1; k < aligned.token_indices.size(); ++k) {
      CHECK(aligned.token_indices[k] == aligned.token_indices[k - 1] + 1);
    }
    CHECK(align_span(tokens, sentence, span, true) == aligned);
  }
}

TEST_CASE("utf8 helpers") {
  const std::string s = "naïve café";
  CHECK(utf8::length(s) == 10);
  CHECK(utf8::substr(s, 6, 10) == "café");
  CHECK(utf8::encode(utf8::decode(s)) == s);
  CHECK(utf8::fold(U'É') == U'e');
  CHECK(utf8::fold(U'Ø') == U'ø');
  CHECK(utf8::fold(U'Ł') == U'ł');
  CHECK(utf8::fold(U'Q') == U'q');
  CHECK(utf8::is_combining_mark(0x0301));
  CHECK(utf8::is_punct(U'\''));
  CHECK(utf8::is_punct(0x2019));
  CHECK_FALSE(utf8::is_punct(U'a'));
}

}  // namespace
}  // namespace mas
