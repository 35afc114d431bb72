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

// Benchmark readers (Winograd XML collection layout, canonical JSONL) and the
// canonical JSONL writer.
//
// Canonical JSONL has one object per line with fields in this order and no
// insignificant whitespace:
//
//   {"id":"wsc273-001","sentence":"...","pronoun":"it","pronoun_start":47,
//    "candidates":["the trophy","the suitcase"],"gold":1}
//
// pronoun_start counts Unicode code points. gold may be null.

#ifndef MAS_DATASETS_H_
#define MAS_DATASETS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mas/span_alignment.h"

namespace mas {

enum class DatasetSource { kWsc273, kPdp60, kCustom };

std::string_view to_string(DatasetSource source);
std::optional<DatasetSource> parse_dataset_source(std::string_view name);

// Id prefix used when a file carries no ids, e.g. "wsc273" -> "wsc273-004".
std::string_view id_prefix(DatasetSource source);

// Source implied by an id's prefix; kCustom when it has none of ours.
DatasetSource source_from_id(std::string_view id);

inline constexpr std::size_t kMinCandidates = 2;
inline constexpr std::size_t kMaxCandidates = 8;

struct SchemaInstance {
  std::string id;
  std::string sentence;
  CharSpan pronoun;
  std::vector<std::string> candidate_texts;
  std::optional<std::size_t> gold_index;
  DatasetSource source = DatasetSource::kCustom;

  bool operator==(const SchemaInstance &) const = default;
};

// Throws Error(kInvalidInstance) naming the first violated invariant.
void check_instance(const SchemaInstance &instance);

// Collapses whitespace runs, trims, and drops spaces before . , ! ? '
std::string normalize_sentence_text(std::string_view text);

// Parses `schema` elements (text/txt1, text/pron, text/txt2, answers/answer,
// correctAnswer). Ids are "<source prefix>-NNN" by position. One bad schema
// fails the whole parse.
std::vector<SchemaInstance> parse_wsc_xml(
    std::string_view content, DatasetSource source = DatasetSource::kWsc273);

std::vector<SchemaInstance> parse_jsonl(std::string_view content);

// Canonical JSONL; parse_jsonl(convert(x)) == x.
std::string convert(const std::vector<SchemaInstance> &instances);

}  // namespace mas

#endif  // MAS_DATASETS_H_
