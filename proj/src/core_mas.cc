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

#include "mas/core_mas.h"

#include <algorithm>
#include <cmath>

#include "mas/error.h"

namespace mas {

namespace {

void check_span(const SpanAlignment &span, std::size_t token_count,
                const char *what) {
  if (span.token_indices.empty()) {
    throw Error(ErrorCode::kSpanOutOfRange,
                std::string(what) + " span has no tokens");
  }
  for (std::size_t index : span.token_indices) {
    if (index >= token_count) {
      throw Error(ErrorCode::kSpanOutOfRange,
                  std::string(what) + " token " + std::to_string(index) +
                      " >= token count " + std::to_string(token_count));
    }
  }
}

bool overlaps(const SpanAlignment &a, const SpanAlignment &b) {
  for (std::size_t i : a.token_indices) {
    if (std::find(b.token_indices.begin(), b.token_indices.end(), i) !=
        b.token_indices.end()) {
      return true;
    }
  }
  return false;
}

void check_same_shape(std::span<const CandidateAttentionMatrix> matrices) {
  for (const auto &m : matrices) {
    if (!m.values.same_shape(matrices.front().values)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "candidate matrices differ in shape");
    }
  }
}

}  // namespace

std::string_view to_string(AggregationMode mode) {
  switch (mode) {
    case AggregationMode::kSum: return "sum";
    case AggregationMode::kMax: return "max";
    case AggregationMode::kMean: return "mean";
  }
  return "sum";
}

std::string_view to_string(TiePolicy policy) {
  switch (policy) {
    case TiePolicy::kNoneWins: return "none-wins";
    case TiePolicy::kAllWin: return "all-win";
    case TiePolicy::kLowestIndexWins: return "lowest-index";
  }
  return "none-wins";
}

std::optional<AggregationMode> parse_aggregation_mode(std::string_view name) {
  if (name == "sum") return AggregationMode::kSum;
  if (name == "max") return AggregationMode::kMax;
  if (name == "mean") return AggregationMode::kMean;
  return std::nullopt;
}

std::optional<TiePolicy> parse_tie_policy(std::string_view name) {
  if (name == "none-wins") return TiePolicy::kNoneWins;
  if (name == "all-win") return TiePolicy::kAllWin;
  if (name == "lowest-index") return TiePolicy::kLowestIndexWins;
  return std::nullopt;
}

std::vector<CandidateAttentionMatrix> slice_attention(
    const AttentionDump &dump, const SpanAlignment &reference,
    std::span<const SpanAlignment> candidates, AggregationMode agg) {
  if (candidates.size() < 2) {
    throw Error(ErrorCode::kTooFewCandidates,
                std::to_string(candidates.size()) + " candidate(s), need 2");
  }
  const std::size_t t = dump.token_count();
  check_span(reference, t, "reference");
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    check_span(candidates[c], t, "candidate");
    if (overlaps(candidates[c], reference)) {
      throw Error(ErrorCode::kOverlappingSpans,
                  "candidate " + std::to_string(c) + " overlaps the reference");
    }
    for (std::size_t d = 0; d < c; ++d) {
      if (overlaps(candidates[c], candidates[d])) {
        throw Error(ErrorCode::kOverlappingSpans,
                    "candidates " + std::to_string(d) + " and " +
                        std::to_string(c) + " overlap");
      }
    }
  }

  const std::size_t layers = dump.num_layers;
  const std::size_t heads = dump.num_heads;
  std::vector<CandidateAttentionMatrix> out;
  out.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    out.push_back({c, LayerHeadGrid<double>(layers, heads)});
  }

  const double reference_weight =
      1.0 / static_cast<double>(reference.token_indices.size());
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto &keys = candidates[c].token_indices;
        double sum = 0.0;
        double max = 0.0;
        for (std::size_t key : keys) {
          double mean_row = 0.0;
          for (std::size_t query : reference.token_indices) {
            mean_row += static_cast<double>(dump.at(l, h, query, key));
          }
          mean_row *= reference_weight;
          sum += mean_row;
          max = std::max(max, mean_row);
        }
        double value = sum;
        if (agg == AggregationMode::kMax) {
          value = max;
        } else if (agg == AggregationMode::kMean) {
          value = sum / static_cast<double>(keys.size());
        }
        out[c].values(l, h) = value;
      }
    }
  }
  return out;
}

std::vector<MaskMatrix> compute_masks(
    std::span<const CandidateAttentionMatrix> matrices, TiePolicy tie) {
  if (matrices.size() < 2) {
    throw Error(ErrorCode::kTooFewCandidates,
                std::to_string(matrices.size()) + " matrices, need 2");
  }
  check_same_shape(matrices);

  const std::size_t layers = matrices.front().values.layers();
  const std::size_t heads = matrices.front().values.heads();
  std::vector<MaskMatrix> masks;
  masks.reserve(matrices.size());
  for (const auto &m : matrices) {
    masks.push_back({m.candidate_index, LayerHeadGrid<std::uint8_t>(layers, heads)});
  }

  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      double best = matrices[0].values(l, h);
      for (const auto &m : matrices) best = std::max(best, m.values(l, h));
      std::size_t winners = 0;
      for (const auto &m : matrices) winners += m.values(l, h) == best;

      if (winners > 1 && tie == TiePolicy::kNoneWins) continue;
      for (std::size_t c = 0; c < matrices.size(); ++c) {
        if (matrices[c].values(l, h) != best) continue;
        masks[c].bits(l, h) = 1;
        // Candidates are visited in index order, so the first hit is lowest.
        if (tie == TiePolicy::kLowestIndexWins) break;
      }
    }
  }
  return masks;
}

MasResult mas_scores(std::span<const CandidateAttentionMatrix> matrices,
                     std::span<const MaskMatrix> masks,
                     std::string instance_id) {
  if (matrices.size() != masks.size() || matrices.empty()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(matrices.size()) + " matrices vs " +
                    std::to_string(masks.size()) + " masks");
  }
  check_same_shape(matrices);
  for (std::size_t c = 0; c < matrices.size(); ++c) {
    if (masks[c].candidate_index != matrices[c].candidate_index ||
        masks[c].bits.layers() != matrices[c].values.layers() ||
        masks[c].bits.heads() != matrices[c].values.heads()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mask " + std::to_string(c) + " does not match its matrix");
    }
  }

  MasResult result;
  result.instance_id = std::move(instance_id);
  result.candidate_matrices.assign(matrices.begin(), matrices.end());
  result.masks.assign(masks.begin(), masks.end());

  double total = 0.0;
  for (std::size_t c = 0; c < matrices.size(); ++c) {
    const auto values = matrices[c].values.cells();
    const auto bits = masks[c].bits.cells();
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (bits[i]) sum += values[i];
    }
    result.hadamard_sums.push_back(sum);
    total += sum;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kDegenerateAttention,
                "no candidate holds a cell maximum in \"" +
                    result.instance_id + "\"");
  }

  double top = 0.0;
  for (std::size_t c = 0; c < matrices.size(); ++c) {
    result.scores.push_back(result.hadamard_sums[c] / total);
    top = std::max(top, result.scores[c]);
  }
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < matrices.size(); ++c) {
    if (top - result.scores[c] > kDecisionTieEpsilon) continue;
    if (best) {
      result.tie_flag = true;
    } else {
      best = c;
    }
  }
  result.decision = matrices[*best].candidate_index;
  return result;
}

MasResult score_instance(const AttentionDump &dump,
                         const SpanAlignment &reference,
                         std::span<const SpanAlignment> candidates,
                         AggregationMode agg, TiePolicy tie,
                         std::string instance_id) {
  const auto matrices = slice_attention(dump, reference, candidates, agg);
  const auto masks = compute_masks(matrices, tie);
  return mas_scores(matrices, masks, std::move(instance_id));
}

}  // namespace mas
