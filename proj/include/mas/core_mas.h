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

// Maximum Attention Score.
//
// For a reference word s (the pronoun) and candidates c_1..c_m, the attention
// tensor is sliced into one layer x head matrix A_c per candidate holding the
// attention from s to c. At each (layer, head) cell only the candidate with
// the largest attention keeps its value (the argmax mask M_c); everything
// else is zeroed. The score of c is its surviving mass over the surviving
// mass of all candidates:
//
//   MAS(c) = sum_{l,h} (A_c o M_c) / sum_{c'} sum_{l,h} (A_c' o M_c')
//
// All functions here are pure and thread-safe.

#ifndef MAS_CORE_MAS_H_
#define MAS_CORE_MAS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mas/attention_dump.h"
#include "mas/span_alignment.h"

namespace mas {

// Dense row-major grid indexed by (layer, head).
template <typename T>
class LayerHeadGrid {
 public:
  LayerHeadGrid() = default;
  LayerHeadGrid(std::size_t layers, std::size_t heads, T fill = T{})
      : layers_(layers), heads_(heads), cells_(layers * heads, fill) {}

  std::size_t layers() const { return layers_; }
  std::size_t heads() const { return heads_; }
  std::size_t size() const { return cells_.size(); }

  T &operator()(std::size_t layer, std::size_t head) {
    return cells_[layer * heads_ + head];
  }
  const T &operator()(std::size_t layer, std::size_t head) const {
    return cells_[layer * heads_ + head];
  }

  std::span<const T> cells() const { return cells_; }
  std::span<T> cells() { return cells_; }

  bool same_shape(const LayerHeadGrid &other) const {
    return layers_ == other.layers_ && heads_ == other.heads_;
  }

  bool operator==(const LayerHeadGrid &) const = default;

 private:
  std::size_t layers_ = 0;
  std::size_t heads_ = 0;
  std::vector<T> cells_;
};

// A_c: attention from the reference word to candidate c at every cell.
struct CandidateAttentionMatrix {
  std::size_t candidate_index = 0;
  LayerHeadGrid<double> values;

  bool operator==(const CandidateAttentionMatrix &) const = default;
};

// M_c: 1 where candidate c holds the cell maximum.
struct MaskMatrix {
  std::size_t candidate_index = 0;
  LayerHeadGrid<std::uint8_t> bits;

  bool operator==(const MaskMatrix &) const = default;
};

// Two top scores closer than this count as a tie for the final decision.
inline constexpr double kDecisionTieEpsilon = 1e-12;

struct MasResult {
  std::string instance_id;
  std::vector<CandidateAttentionMatrix> candidate_matrices;
  std::vector<MaskMatrix> masks;
  // Sum over cells of A_c o M_c, one per candidate.
  std::vector<double> hadamard_sums;
  std::vector<double> scores;
  // Highest score; ties go to the lowest index and set tie_flag.
  std::size_t decision = 0;
  bool tie_flag = false;

  bool operator==(const MasResult &) const = default;
};

// How the attention over a multi-token candidate collapses to one value.
enum class AggregationMode { kSum, kMax, kMean };

// Who wins a cell when several candidates share its maximum exactly.
enum class TiePolicy { kNoneWins, kAllWin, kLowestIndexWins };

std::string_view to_string(AggregationMode mode);
std::string_view to_string(TiePolicy policy);
std::optional<AggregationMode> parse_aggregation_mode(std::string_view name);
std::optional<TiePolicy> parse_tie_policy(std::string_view name);

// Slices one A_c per candidate. Cell (l, h) averages the reference tokens'
// attention rows at (l, h) and aggregates that average over the candidate's
// token positions with `agg`.
//
// Throws kSpanOutOfRange, kOverlappingSpans or kTooFewCandidates.
std::vector<CandidateAttentionMatrix> slice_attention(
    const AttentionDump &dump, const SpanAlignment &reference,
    std::span<const SpanAlignment> candidates,
    AggregationMode agg = AggregationMode::kSum);

// Argmax masks, one per matrix. Throws kDimensionMismatch.
std::vector<MaskMatrix> compute_masks(
    std::span<const CandidateAttentionMatrix> matrices,
    TiePolicy tie = TiePolicy::kNoneWins);

// Normalized Hadamard sums. Throws kDimensionMismatch, or
// kDegenerateAttention when no candidate keeps any mass.
MasResult mas_scores(std::span<const CandidateAttentionMatrix> matrices,
                     std::span<const MaskMatrix> masks,
                     std::string instance_id);

// slice_attention -> compute_masks -> mas_scores.
MasResult score_instance(const AttentionDump &dump,
                         const SpanAlignment &reference,
                         std::span<const SpanAlignment> candidates,
                         AggregationMode agg, TiePolicy tie,
                         std::string instance_id);

}  // namespace mas

#endif  // MAS_CORE_MAS_H_
