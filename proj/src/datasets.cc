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

#include "mas/datasets.h"

#include <cstdio>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "json.hpp"
#include "mas/error.h"
#include "mas/utf8.h"

namespace mas {

namespace pt = boost::property_tree;
using ordered_json = nlohmann::ordered_json;

namespace {

bool attaches_left(char32_t c) {
  return c == U'.' || c == U',' || c == U'!' || c == U'?' || c == U'\'';
}

std::string positional_id(DatasetSource source, std::size_t position) {
  char digits[16];
  std::snprintf(digits, sizeof(digits), "%03zu", position);
  return std::string(id_prefix(source)) + "-" + digits;
}

// Whitespace-collapsed, trimmed text without the punctuation rule.
std::string collapse_whitespace(std::string_view text) {
  std::u32string out;
  for (char32_t c : utf8::decode(text)) {
    if (utf8::is_space(c)) {
      if (!out.empty() && out.back() != U' ') out.push_back(U' ');
    } else {
      out.push_back(c);
    }
  }
  if (!out.empty() && out.back() == U' ') out.pop_back();
  return utf8::encode(out);
}

void collect_schemas(const pt::ptree &node,
                     std::vector<const pt::ptree *> &out) {
  for (const auto &[name, child] : node) {
    if (name == "schema") {
      out.push_back(&child);
    } else if (name != "<xmlattr>" && name != "<xmlcomment>") {
      collect_schemas(child, out);
    }
  }
}

const pt::ptree &required_child(const pt::ptree &node, const char *path,
                                std::size_t position) {
  const auto child = node.get_child_optional(path);
  if (!child) {
    throw Error(ErrorCode::kMissingField, "schema " + std::to_string(position) +
                                              ": missing <" + path + ">");
  }
  return *child;
}

SchemaInstance parse_schema(const pt::ptree &schema, std::size_t position,
                            DatasetSource source) {
  const std::string left = normalize_sentence_text(
      required_child(schema, "text.txt1", position).data());
  const std::string pronoun =
      collapse_whitespace(required_child(schema, "text.pron", position).data());
  const std::string right = normalize_sentence_text(
      required_child(schema, "text.txt2", position).data());
  if (pronoun.empty()) {
    throw Error(ErrorCode::kMissingField,
                "schema " + std::to_string(position) + ": empty <pron>");
  }

  SchemaInstance instance;
  instance.id = positional_id(source, position);
  instance.source = source;
  instance.sentence = left;
  if (!left.empty()) instance.sentence += ' ';
  const std::size_t pronoun_start = utf8::length(instance.sentence);
  instance.sentence += pronoun;
  if (!right.empty()) {
    if (!attaches_left(utf8::decode(right).front())) instance.sentence += ' ';
    instance.sentence += right;
  }
  instance.pronoun = make_char_span(instance.sentence, pronoun_start,
                                    pronoun_start + utf8::length(pronoun));

  for (const auto &[name, answer] :
       required_child(schema, "answers", position)) {
    if (name != "answer") continue;
    instance.candidate_texts.push_back(collapse_whitespace(answer.data()));
  }
  if (instance.candidate_texts.empty()) {
    throw Error(ErrorCode::kMissingField,
                "schema " + std::to_string(position) + ": no <answer>");
  }

  const std::string letter =
      collapse_whitespace(required_child(schema, "correctAnswer", position).data());
  if (letter.empty()) {
    throw Error(ErrorCode::kMissingField,
                "schema " + std::to_string(position) + ": empty <correctAnswer>");
  }
  const char first = letter.front();
  const std::size_t gold =
      (first >= 'A' && first <= 'Z')   ? static_cast<std::size_t>(first - 'A')
      : (first >= 'a' && first <= 'z') ? static_cast<std::size_t>(first - 'a')
                                       : kMaxCandidates;
  // "A", "A." and "A)" all occur in the wild.
  const bool rest_ok =
      letter.substr(1).find_first_not_of(". )") == std::string::npos;
  if (gold >= instance.candidate_texts.size() || !rest_ok) {
    throw Error(ErrorCode::kBadAnswerLetter,
                "schema " + std::to_string(position) + ": correctAnswer \"" +
                    letter + "\" with " +
                    std::to_string(instance.candidate_texts.size()) +
                    " answers");
  }
  instance.gold_index = gold;

  try {
    check_instance(instance);
  } catch (const Error &e) {
    throw Error(e.code(), "schema " + std::to_string(position) + ": " + e.what());
  }
  return instance;
}

template <typename T>
T json_field(const ordered_json &object, const char *name, std::size_t line,
             bool (ordered_json::*type_check)() const noexcept) {
  auto it = object.find(name);
  if (it == object.end()) {
    throw Error(ErrorCode::kMissingField, "line " + std::to_string(line) +
                                              ": missing \"" + name + "\"");
  }
  if (!((*it).*type_check)()) {
    throw Error(ErrorCode::kMalformedJson, "line " + std::to_string(line) +
                                               ": \"" + name +
                                               "\" has the wrong type");
  }
  return it->get<T>();
}

}  // namespace

std::string_view to_string(DatasetSource source) {
  switch (source) {
    case DatasetSource::kWsc273: return "WSC273";
    case DatasetSource::kPdp60: return "PDP60";
    case DatasetSource::kCustom: return "CUSTOM";
  }
  return "CUSTOM";
}

std::optional<DatasetSource> parse_dataset_source(std::string_view name) {
  if (name == "WSC273") return DatasetSource::kWsc273;
  if (name == "PDP60") return DatasetSource::kPdp60;
  if (name == "CUSTOM") return DatasetSource::kCustom;
  return std::nullopt;
}

std::string_view id_prefix(DatasetSource source) {
  switch (source) {
    case DatasetSource::kWsc273: return "wsc273";
    case DatasetSource::kPdp60: return "pdp60";
    case DatasetSource::kCustom: return "custom";
  }
  return "custom";
}

DatasetSource source_from_id(std::string_view id) {
  for (DatasetSource source : {DatasetSource::kWsc273, DatasetSource::kPdp60}) {
    const std::string prefix = std::string(id_prefix(source)) + "-";
    if (id.starts_with(prefix)) return source;
  }
  return DatasetSource::kCustom;
}

void check_instance(const SchemaInstance &instance) {
  auto fail = [&](const std::string &what) {
    throw Error(ErrorCode::kInvalidInstance, instance.id + ": " + what);
  };
  if (instance.id.empty()) fail("empty id");
  const std::size_t m = instance.candidate_texts.size();
  if (m < kMinCandidates || m > kMaxCandidates) {
    fail(std::to_string(m) + " candidates, need 2 to 8");
  }
  for (const auto &text : instance.candidate_texts) {
    if (text.empty()) fail("empty candidate");
  }
  if (instance.gold_index && *instance.gold_index >= m) {
    fail("gold index " + std::to_string(*instance.gold_index) +
         " out of range");
  }
  const CharSpan &p = instance.pronoun;
  if (p.surface.empty() || p.start >= p.end ||
      p.end - p.start != utf8::length(p.surface) ||
      utf8::substr(instance.sentence, p.start, p.end) != p.surface ||
      p.end > utf8::length(instance.sentence)) {
    fail("pronoun \"" + p.surface + "\" not at [" + std::to_string(p.start) +
         ", " + std::to_string(p.end) + ")");
  }
}

std::string normalize_sentence_text(std::string_view text) {
  const std::u32string collapsed = utf8::decode(collapse_whitespace(text));
  std::u32string out;
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    if (collapsed[i] == U' ' && i + 1 < collapsed.size() &&
        attaches_left(collapsed[i + 1])) {
      continue;
    }
    out.push_back(collapsed[i]);
  }
  return utf8::encode(out);
}

std::vector<SchemaInstance> parse_wsc_xml(std::string_view content,
                                          DatasetSource source) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(content)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error &e) {
    throw Error(ErrorCode::kMalformedXml, e.what());
  }

  std::vector<const pt::ptree *> schemas;
  collect_schemas(tree, schemas);
  std::vector<SchemaInstance> instances;
  instances.reserve(schemas.size());
  for (std::size_t i = 0; i < schemas.size(); ++i) {
    instances.push_back(parse_schema(*schemas[i], i + 1, source));
  }
  return instances;
}

std::vector<SchemaInstance> parse_jsonl(std::string_view content) {
  std::vector<SchemaInstance> instances;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    ordered_json object;
    try {
      object = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw Error(ErrorCode::kMalformedJson,
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
    if (!object.is_object()) {
      throw Error(ErrorCode::kMalformedJson,
                  "line " + std::to_string(line_number) + ": not an object");
    }

    SchemaInstance instance;
    instance.id = json_field<std::string>(object, "id", line_number,
                                          &ordered_json::is_string);
    instance.sentence = json_field<std::string>(object, "sentence", line_number,
                                                &ordered_json::is_string);
    const auto pronoun = json_field<std::string>(object, "pronoun", line_number,
                                                 &ordered_json::is_string);
    const auto start = json_field<std::int64_t>(
        object, "pronoun_start", line_number, &ordered_json::is_number_integer);
    const auto &candidates = object.find("candidates");
    if (candidates == object.end()) {
      throw Error(ErrorCode::kMissingField,
                  "line " + std::to_string(line_number) +
                      ": missing \"candidates\"");
    }
    if (!candidates->is_array()) {
      throw Error(ErrorCode::kMalformedJson,
                  "line " + std::to_string(line_number) +
                      ": \"candidates\" is not an array");
    }
    for (const auto &candidate : *candidates) {
      if (!candidate.is_string()) {
        throw Error(ErrorCode::kMalformedJson,
                    "line " + std::to_string(line_number) +
                        ": non-string candidate");
      }
      instance.candidate_texts.push_back(candidate.get<std::string>());
    }
    const auto gold = object.find("gold");
    if (gold == object.end()) {
      throw Error(ErrorCode::kMissingField,
                  "line " + std::to_string(line_number) + ": missing \"gold\"");
    }
    if (gold->is_number_unsigned()) {
      instance.gold_index = gold->get<std::size_t>();
    } else if (!gold->is_null()) {
      throw Error(ErrorCode::kMalformedJson,
                  "line " + std::to_string(line_number) +
                      ": \"gold\" must be a non-negative integer or null");
    }

    const std::size_t length = utf8::length(pronoun);
    if (start < 0 || pronoun.empty() ||
        utf8::substr(instance.sentence, static_cast<std::size_t>(start),
                     static_cast<std::size_t>(start) + length) != pronoun) {
      throw Error(ErrorCode::kSpanMismatch,
                  "line " + std::to_string(line_number) + ": \"" + pronoun +
                      "\" is not at offset " + std::to_string(start));
    }
    instance.pronoun =
        CharSpan{static_cast<std::size_t>(start),
                 static_cast<std::size_t>(start) + length, pronoun};
    instance.source = source_from_id(instance.id);
    try {
      check_instance(instance);
    } catch (const Error &e) {
      throw Error(e.code(),
                  "line " + std::to_string(line_number) + ": " + e.what());
    }
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::string convert(const std::vector<SchemaInstance> &instances) {
  std::string out;
  for (const SchemaInstance &instance : instances) {
    check_instance(instance);
    ordered_json line;
    line["id"] = instance.id;
    line["sentence"] = instance.sentence;
    line["pronoun"] = instance.pronoun.surface;
    line["pronoun_start"] = instance.pronoun.start;
    line["candidates"] = instance.candidate_texts;
    line["gold"] = instance.gold_index ? ordered_json(*instance.gold_index)
                                       : ordered_json(nullptr);
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace mas
