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

// Benchmark evaluation, reports and heatmaps.

#ifndef MAS_EVALUATION_H_
#define MAS_EVALUATION_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mas/core_mas.h"
#include "mas/datasets.h"
#include "mas/span_alignment.h"

namespace mas {

enum class FailureReason {
  kCandidateNotFound,
  kAlignmentError,
  kDegenerateAttention,
  kDumpMissing,
  // Dump present but unreadable or not row-stochastic.
  kDumpInvalid,
};

std::string_view to_string(FailureReason reason);
std::optional<FailureReason> parse_failure_reason(std::string_view name);

struct InstanceRecord {
  std::string instance_id;
  // Empty iff failure is set.
  std::vector<double> scores;
  std::optional<std::size_t> decision;
  std::optional<std::size_t> gold_index;
  // Set iff gold_index is set and there is no failure.
  std::optional<bool> correct;
  bool tie_flag = false;
  std::optional<FailureReason> failure;
  // Human-readable detail for failures.
  std::string detail;

  bool operator==(const InstanceRecord &) const = default;
};

struct Baseline {
  std::string name;
  double accuracy = 0.0;  // fraction in [0, 1]

  bool operator==(const Baseline &) const = default;
};

struct EvalReport {
  DatasetSource dataset = DatasetSource::kCustom;
  std::size_t total = 0;
  std::size_t scored = 0;
  std::size_t correct_count = 0;
  // correct_count / total; failed instances count as wrong.
  double accuracy = 0.0;
  std::size_t tie_count = 0;
  std::vector<Baseline> baselines;
  // Sorted by instance id.
  std::vector<InstanceRecord> records;

  bool operator==(const EvalReport &) const = default;
};

// Published comparison rows for a benchmark, in table order. Empty for
// kCustom.
std::vector<Baseline> baselines_for(DatasetSource source);

struct EvalOptions {
  AggregationMode agg = AggregationMode::kSum;
  TiePolicy tie = TiePolicy::kNoneWins;
  OccurrencePolicy occurrence = OccurrencePolicy::kNearestBeforePronoun;
  // Worker threads; output does not depend on it.
  std::size_t jobs = 1;
};

// Everything needed to score one instance against its dump.
struct ScoredInstance {
  SpanAlignment pronoun;
  std::vector<SpanAlignment> candidates;
  MasResult result;
};

// Locates and aligns the pronoun and candidates in `dump`, then scores.
// Alignment-level problems are raised as kCandidateNotFound or
// kAlignmentError.
ScoredInstance score_against_dump(const SchemaInstance &instance,
                                  const AttentionDump &dump,
                                  const EvalOptions &options);

// Scores every instance against dump_root/<instance id>/. Per-instance
// problems become failure records; only a missing dump_root throws
// (kDumpRootMissing). The dataset tag is taken from the first instance.
EvalReport evaluate(const std::vector<SchemaInstance> &instances,
                    const std::filesystem::path &dump_root,
                    const EvalOptions &options = {});

// Recomputes each record's `correct` and the aggregate fields of `report`.
void finalize_report(EvalReport &report);

enum class ReportFormat { kJson, kCsv, kText };

std::optional<ReportFormat> parse_report_format(std::string_view name);

std::string render_report(const EvalReport &report, ReportFormat format);

// Inverse of render_report(kJson). Throws Error(kMalformedJson).
EvalReport parse_report_json(std::string_view content);

// JSON object for one scored instance, with the candidate matrices and masks.
std::string render_mas_result_json(const MasResult &result,
                                   std::span<const std::string> candidate_labels);

// SVG with one layer x head grid per candidate. Cell colour runs from blue
// (0) to red (the largest value over all candidates); masked cells get a
// black outline. Labels default to "candidate N" when not given.
std::string render_heatmap(const MasResult &result,
                           std::span<const std::string> tokens,
                           std::span<const std::string> candidate_labels = {});

}  // namespace mas

#endif  // MAS_EVALUATION_H_
