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

#include "mas/utf8.h"

#include <algorithm>
#include <array>

namespace mas::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Base letters for U+00C0..U+00FF; '*' marks letters without a canonical
// decomposition.
constexpr std::string_view kLatin1Base =
    "aaaaaa*ceeeeiiii*nooooo**uuuuy**"
    "aaaaaa*ceeeeiiii*nooooo**uuuuy*y";

// Base letters for U+0100..U+017F, same convention.
constexpr std::string_view kLatinExtABase =
    "aaaaaaccccccccdd**eeeeeeeeeegggggggghh**iiiiiiiii***jjkk*llllll"
    "****nnnnnn***oooooo**rrrrrrsssssssstttt**uuuuuuuuuuuuwwyyyzzzzzz*";

static_assert(kLatin1Base.size() == 64);
static_assert(kLatinExtABase.size() == 128);

}  // namespace

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool valid = len > 0 && i + len <= text.size();
    for (std::size_t j = 1; valid && j < len; ++j) {
      const auto b = static_cast<unsigned char>(text[i + j]);
      if ((b & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!valid) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::size_t length(std::string_view text) { return decode(text).size(); }

std::string substr(std::string_view text, std::size_t start, std::size_t end) {
  const std::u32string cps = decode(text);
  start = std::min(start, cps.size());
  end = std::clamp(end, start, cps.size());
  return encode(std::u32string_view(cps).substr(start, end - start));
}

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x00A0: case 0x1680: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  switch (c) {
    case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
    case 0x00BB: case 0x00BF:
      return true;
    default:
      return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
             (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011);
  }
}

bool is_combining_mark(char32_t c) {
  return (c >= 0x0300 && c <= 0x036F) || (c >= 0x1AB0 && c <= 0x1AFF) ||
         (c >= 0x1DC0 && c <= 0x1DFF) || (c >= 0x20D0 && c <= 0x20FF) ||
         (c >= 0xFE20 && c <= 0xFE2F);
}

char32_t fold(char32_t c) {
  if (c < 0x80) {
    return (c >= U'A' && c <= U'Z') ? c + 32 : c;
  }
  if (c >= 0xC0 && c <= 0xFF) {
    const char base = kLatin1Base[c - 0xC0];
    if (base != '*') return static_cast<char32_t>(base);
    // Æ Ð Ø Þ lowercase by +0x20; the rest are symbols or already lowercase.
    if (c == 0xC6 || c == 0xD0 || c == 0xD8 || c == 0xDE) return c + 0x20;
    return c;
  }
  if (c >= 0x100 && c <= 0x17F) {
    const char base = kLatinExtABase[c - 0x100];
    if (base != '*') return static_cast<char32_t>(base);
    constexpr std::array<char32_t, 8> kUpperWithLowerNext = {
        0x110, 0x126, 0x132, 0x13F, 0x141, 0x14A, 0x152, 0x166};
    if (std::find(kUpperWithLowerNext.begin(), kUpperWithLowerNext.end(), c) !=
        kUpperWithLowerNext.end()) {
      return c + 1;
    }
    return c;
  }
  return c;
}

}  // namespace mas::utf8
