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

// Minimal UTF-8 helpers. Character offsets throughout the library count
// Unicode code points, not bytes.

#ifndef MAS_UTF8_H_
#define MAS_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace mas::utf8 {

// Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

std::size_t length(std::string_view text);

// Code points [start, end) of `text`, re-encoded.
std::string substr(std::string_view text, std::size_t start, std::size_t end);

bool is_space(char32_t c);
bool is_punct(char32_t c);
bool is_combining_mark(char32_t c);

// Lowercases ASCII, Latin-1 and Latin Extended-A letters and folds
// precomposed accented letters to their base letter. This mirrors what an
// uncased WordPiece tokenizer does to its input (lowercase, NFD, drop marks)
// for the scripts that occur in English benchmark sentences.
char32_t fold(char32_t c);

}  // namespace mas::utf8

#endif  // MAS_UTF8_H_
