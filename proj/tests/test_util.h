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

#ifndef MAS_TESTS_TEST_UTIL_H_
#define MAS_TESTS_TEST_UTIL_H_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mas/attention_dump.h"
#include "mas/core_mas.h"
#include "mas/datasets.h"
#include "mas/span_alignment.h"
#include "oracle.h"

namespace mas::testing {

// Deleted on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mas-test-" + std::to_string(rd()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void spit(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline SpanAlignment tokens_at(std::initializer_list<std::size_t> indices) {
  return SpanAlignment{CharSpan{}, std::vector<std::size_t>(indices)};
}

inline SpanAlignment tokens_at(const std::vector<std::size_t> &indices) {
  return SpanAlignment{CharSpan{}, indices};
}

inline CandidateAttentionMatrix grid_matrix(
    std::size_t index, std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t layers = rows.size();
  const std::size_t heads = rows.begin()->size();
  CandidateAttentionMatrix m{index, LayerHeadGrid<double>(layers, heads)};
  std::size_t l = 0;
  for (const auto &row : rows) {
    std::size_t h = 0;
    for (double v : row) m.values(l, h++) = v;
    ++l;
  }
  return m;
}

inline AttentionDump to_dump(const RawInstance &raw) {
  AttentionDump dump;
  dump.example_id = "raw";
  dump.model_name = "test";
  dump.num_layers = raw.layers;
  dump.num_heads = raw.heads;
  for (std::size_t i = 0; i < raw.tokens; ++i) {
    dump.tokens.push_back(i == 0                ? "[CLS]"
                          : i + 1 == raw.tokens ? "[SEP]"
                                                : "w" + std::to_string(i));
  }
  dump.attention.resize(dump.expected_size());
  for (std::size_t l = 0; l < raw.layers; ++l)
    for (std::size_t h = 0; h < raw.heads; ++h)
      for (std::size_t q = 0; q < raw.tokens; ++q)
        for (std::size_t k = 0; k < raw.tokens; ++k)
          dump.attention[dump.offset(l, h, q, k)] =
              static_cast<float>(raw.att[l][h][q][k]);
  return dump;
}

inline Cube to_cube(const std::vector<CandidateAttentionMatrix> &matrices) {
  Cube cube;
  for (const auto &m : matrices) {
    std::vector<std::vector<double>> grid(m.values.layers(),
                                          std::vector<double>(m.values.heads()));
    for (std::size_t l = 0; l < m.values.layers(); ++l)
      for (std::size_t h = 0; h < m.values.heads(); ++h) grid[l][h] = m.values(l, h);
    cube.push_back(std::move(grid));
  }
  return cube;
}

// Tokens for "the cat saw the dog and it ran." with boundaries.
inline const std::vector<std::string> &cat_dog_tokens() {
  static const std::vector<std::string> tokens{
      "[CLS]", "the", "cat", "saw", "the", "dog", "and", "it", "ran", ".", "[SEP]"};
  return tokens;
}
inline constexpr char kCatDogSentence[] = "the cat saw the dog and it ran.";
inline constexpr std::size_t kCatDogPronounStart = 24;
inline constexpr std::size_t kCatDogReference = 7;  // "it"
inline constexpr std::size_t kCatToken = 2;
inline constexpr std::size_t kDogToken = 5;

// Planted-winner dump written to root/id.
inline void write_cat_dog_dump(const std::filesystem::path &root,
                               const std::string &id, std::size_t winner,
                               std::uint64_t seed, double boost = 0.9) {
  AttentionDump dump = synth_dump(cat_dog_tokens(), 3, 4, kCatDogReference,
                                  winner, boost, seed);
  dump.example_id = id;
  write_dump(dump, root / id);
}

inline SchemaInstance cat_dog_instance(const std::string &id,
                                       std::optional<std::size_t> gold) {
  SchemaInstance s;
  s.id = id;
  s.sentence = kCatDogSentence;
  s.pronoun = make_char_span(s.sentence, kCatDogPronounStart,
                             kCatDogPronounStart + 2);
  s.candidate_texts = {"the cat", "the dog"};
  s.gold_index = gold;
  s.source = source_from_id(id);
  return s;
}

}  // namespace mas::testing

#endif  // MAS_TESTS_TEST_UTIL_H_
