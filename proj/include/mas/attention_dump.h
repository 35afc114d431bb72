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

// On-disk interchange format for a sentence's full attention tensor.
//
// A dump directory holds two files:
//
//   manifest.json   {"format_version": "masdump/1", "example_id": ...,
//                    "model_name": ..., "lowercased": ..., "num_layers": L,
//                    "num_heads": H, "tokens": [...]}
//   attention.f32   L*H*T*T little-endian binary32 values, row-major in
//                   [layer][head][query][key] order.
//
// The tensor holds post-softmax attention, so every (layer, head, query) row
// is a probability distribution over keys.

#ifndef MAS_ATTENTION_DUMP_H_
#define MAS_ATTENTION_DUMP_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mas {

inline constexpr std::string_view kDumpFormatVersion = "masdump/1";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kAttentionFile = "attention.f32";

// Maximum allowed deviation of a row sum from 1.
inline constexpr double kRowSumTolerance = 1e-3;

struct AttentionDump {
  std::string example_id;
  std::string model_name;
  bool lowercased = true;
  std::size_t num_layers = 0;
  std::size_t num_heads = 0;
  // Includes the boundary tokens at positions 0 and T-1.
  std::vector<std::string> tokens;
  std::vector<float> attention;

  std::size_t token_count() const { return tokens.size(); }

  // Number of floats the tensor must hold for the declared shape.
  std::size_t expected_size() const {
    return num_layers * num_heads * token_count() * token_count();
  }

  std::size_t offset(std::size_t layer, std::size_t head, std::size_t query,
                     std::size_t key) const {
    const std::size_t t = token_count();
    return ((layer * num_heads + head) * t + query) * t + key;
  }

  float at(std::size_t layer, std::size_t head, std::size_t query,
           std::size_t key) const {
    return attention[offset(layer, head, query, key)];
  }

  // Attention distribution of one query position over all keys.
  std::span<const float> row(std::size_t layer, std::size_t head,
                             std::size_t query) const {
    return std::span<const float>(attention).subspan(
        offset(layer, head, query, 0), token_count());
  }
};

// Reads a dump directory. The tensor is not checked for row-stochasticity;
// call validate() for that.
AttentionDump read_dump(const std::filesystem::path &dir);

// Writes both files of a dump directory, creating it if needed. Each file is
// written to a temporary name and renamed into place.
void write_dump(const AttentionDump &dump, const std::filesystem::path &dir);

struct ValidationFinding {
  enum class Kind { kRowSum, kNegativeEntry, kShape };

  Kind kind;
  std::size_t layer = 0;
  std::size_t head = 0;
  std::size_t query = 0;
  std::size_t key = 0;
  // Row sum for kRowSum, the offending entry for kNegativeEntry.
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;

  bool ok() const { return findings.empty(); }
};

ValidationReport validate(const AttentionDump &dump);

// Builds a deterministic dump with seeded random row-stochastic rows. At every
// (layer, head) the reference row is then mixed towards a one-hot at
// `winner_index`: row' = (1 - boost) * row + boost * one_hot(winner_index).
// With boost >= 0.55 the winner holds more mass than all other keys combined.
AttentionDump synth_dump(std::vector<std::string> tokens,
                         std::size_t num_layers, std::size_t num_heads,
                         std::size_t reference_index, std::size_t winner_index,
                         double boost, std::uint64_t seed);

}  // namespace mas

#endif  // MAS_ATTENTION_DUMP_H_
