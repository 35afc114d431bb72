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

#include "mas/evaluation.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "mas/attention_dump.h"
#include "mas/error.h"

namespace mas {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Shortest decimal form that reads back to the same double.
std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(text);
  }
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

FailureReason failure_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCandidateNotFound:
      return FailureReason::kCandidateNotFound;
    case ErrorCode::kDegenerateAttention:
      return FailureReason::kDegenerateAttention;
    default:
      return FailureReason::kAlignmentError;
  }
}

InstanceRecord failed(const SchemaInstance &instance, FailureReason reason,
                      std::string detail) {
  InstanceRecord record;
  record.instance_id = instance.id;
  record.gold_index = instance.gold_index;
  record.failure = reason;
  record.detail = std::move(detail);
  return record;
}

InstanceRecord evaluate_one(const SchemaInstance &instance,
                            const fs::path &dump_root,
                            const EvalOptions &options) {
  const fs::path dir = dump_root / instance.id;
  if (!fs::is_directory(dir)) {
    return failed(instance, FailureReason::kDumpMissing,
                  "no dump directory " + dir.string());
  }

  AttentionDump dump;
  try {
    dump = read_dump(dir);
  } catch (const Error &e) {
    return failed(instance,
                  e.code() == ErrorCode::kMissingFile
                      ? FailureReason::kDumpMissing
                      : FailureReason::kDumpInvalid,
                  e.what());
  }
  const ValidationReport validation = validate(dump);
  if (!validation.ok()) {
    return failed(instance, FailureReason::kDumpInvalid,
                  std::to_string(validation.findings.size()) +
                      " validation finding(s), first: " +
                      validation.findings.front().message);
  }

  ScoredInstance scored;
  try {
    scored = score_against_dump(instance, dump, options);
  } catch (const Error &e) {
    return failed(instance, failure_for(e.code()), e.what());
  }

  InstanceRecord record;
  record.instance_id = instance.id;
  record.scores = scored.result.scores;
  record.decision = scored.result.decision;
  record.gold_index = instance.gold_index;
  record.tie_flag = scored.result.tie_flag;
  if (instance.gold_index) {
    record.correct = scored.result.decision == *instance.gold_index;
  }
  return record;
}

template <typename T>
ordered_json optional_json(const std::optional<T> &value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const ordered_json &value) {
  if (value.is_null()) return std::nullopt;
  return value.get<T>();
}

}  // namespace

std::string_view to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::kCandidateNotFound: return "CandidateNotFound";
    case FailureReason::kAlignmentError: return "AlignmentError";
    case FailureReason::kDegenerateAttention: return "DegenerateAttention";
    case FailureReason::kDumpMissing: return "DumpMissing";
    case FailureReason::kDumpInvalid: return "DumpInvalid";
  }
  return "AlignmentError";
}

std::optional<FailureReason> parse_failure_reason(std::string_view name) {
  for (FailureReason reason :
       {FailureReason::kCandidateNotFound, FailureReason::kAlignmentError,
        FailureReason::kDegenerateAttention, FailureReason::kDumpMissing,
        FailureReason::kDumpInvalid}) {
    if (to_string(reason) == name) return reason;
  }
  return std::nullopt;
}

std::vector<Baseline> baselines_for(DatasetSource source) {
  switch (source) {
    case DatasetSource::kPdp60:
      return {
          {"Patric Dhondt (WS Challenge 2016)", 0.450},
          {"Nicos Issak (WS Challenge 2016)", 0.483},
          {"Quan Liu (WS Challenge 2016, winner)", 0.583},
          {"USSM + Supervised Deepnet", 0.533},
          {"USSM + Supervised Deepnet + 3 Knowledge Bases", 0.667},
          {"Maximum Attention Score (published)", 0.683},
      };
    case DatasetSource::kWsc273:
      return {
          {"Random guess", 0.500},
          {"USSM + KB", 0.520},
          {"USSM + Supervised DeepNet + KB", 0.528},
          {"Single LM", 0.545},
          {"Transformer", 0.541},
          {"Know. Hunter", 0.571},
          {"Maximum Attention Score (published)", 0.603},
          {"Single LM, customized CommonCrawl corpus (context)", 0.626},
      };
    case DatasetSource::kCustom:
      return {};
  }
  return {};
}

ScoredInstance score_against_dump(const SchemaInstance &instance,
                                  const AttentionDump &dump,
                                  const EvalOptions &options) {
  ScoredInstance out;
  out.pronoun = align_span(dump.tokens, instance.sentence, instance.pronoun,
                           dump.lowercased);
  for (const std::string &text : instance.candidate_texts) {
    const CharSpan span = locate_candidate(instance.sentence, text,
                                           instance.pronoun, options.occurrence);
    out.candidates.push_back(
        align_span(dump.tokens, instance.sentence, span, dump.lowercased));
  }

  try {
    out.result = score_instance(dump, out.pronoun, out.candidates, options.agg,
                                options.tie, instance.id);
  } catch (const Error &e) {
    // Span problems at this stage mean two strings resolved onto the same
    // tokens.
    if (e.code() == ErrorCode::kOverlappingSpans ||
        e.code() == ErrorCode::kSpanOutOfRange) {
      throw Error(ErrorCode::kAlignmentError, e.what());
    }
    throw;
  }
  return out;
}

void finalize_report(EvalReport &report) {
  report.total = report.records.size();
  report.scored = 0;
  report.correct_count = 0;
  report.tie_count = 0;
  for (InstanceRecord &record : report.records) {
    record.correct.reset();
    if (!record.failure && record.decision && record.gold_index) {
      record.correct = *record.decision == *record.gold_index;
    }
    if (!record.failure) ++report.scored;
    if (record.correct.value_or(false)) ++report.correct_count;
    if (record.tie_flag) ++report.tie_count;
  }
  report.accuracy = report.total == 0
                        ? 0.0
                        : static_cast<double>(report.correct_count) /
                              static_cast<double>(report.total);
}

EvalReport evaluate(const std::vector<SchemaInstance> &instances,
                    const fs::path &dump_root, const EvalOptions &options) {
  if (!fs::is_directory(dump_root)) {
    throw Error(ErrorCode::kDumpRootMissing, dump_root.string());
  }

  EvalReport report;
  if (!instances.empty()) {
    report.dataset = instances.front().source;
    for (const SchemaInstance &instance : instances) {
      if (instance.source != report.dataset) {
        report.dataset = DatasetSource::kCustom;
      }
    }
  }
  report.baselines = baselines_for(report.dataset);
  report.records.resize(instances.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        report.records[i] = evaluate_one(instances[i], dump_root, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t jobs =
      std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(1, instances.size()));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) workers.emplace_back(work);
    for (std::thread &t : workers) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const InstanceRecord &a, const InstanceRecord &b) {
                     return a.instance_id < b.instance_id;
                   });
  finalize_report(report);
  return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "text") return ReportFormat::kText;
  return std::nullopt;
}

std::string render_report(const EvalReport &report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: {
      ordered_json root;
      root["dataset"] = to_string(report.dataset);
      root["total"] = report.total;
      root["scored"] = report.scored;
      root["correct_count"] = report.correct_count;
      root["accuracy"] = report.accuracy;
      root["tie_count"] = report.tie_count;
      root["baselines"] = ordered_json::array();
      for (const Baseline &b : report.baselines) {
        ordered_json row;
        row["name"] = b.name;
        row["accuracy"] = b.accuracy;
        root["baselines"].push_back(std::move(row));
      }
      root["records"] = ordered_json::array();
      for (const InstanceRecord &r : report.records) {
        ordered_json row;
        row["instance_id"] = r.instance_id;
        row["scores"] = r.scores;
        row["decision"] = optional_json(r.decision);
        row["gold_index"] = optional_json(r.gold_index);
        row["correct"] = optional_json(r.correct);
        row["tie_flag"] = r.tie_flag;
        row["failure"] = r.failure ? ordered_json(to_string(*r.failure))
                                   : ordered_json(nullptr);
        row["detail"] = r.detail;
        root["records"].push_back(std::move(row));
      }
      return root.dump(2) + "\n";
    }

    case ReportFormat::kCsv: {
      std::size_t slots = 0;
      for (const InstanceRecord &r : report.records) {
        slots = std::max(slots, r.scores.size());
      }
      std::string out = "id,decision,gold,correct,tie,failure";
      for (std::size_t c = 0; c < slots; ++c) {
        out += ",score_" + std::to_string(c);
      }
      out += '\n';
      for (const InstanceRecord &r : report.records) {
        out += csv_field(r.instance_id);
        out += ',' + (r.decision ? std::to_string(*r.decision) : "");
        out += ',' + (r.gold_index ? std::to_string(*r.gold_index) : "");
        out += ',';
        if (r.correct) out += *r.correct ? "true" : "false";
        out += r.tie_flag ? ",true" : ",false";
        out += ',';
        if (r.failure) out += to_string(*r.failure);
        for (std::size_t c = 0; c < slots; ++c) {
          out += ',';
          if (c < r.scores.size()) out += format_double(r.scores[c]);
        }
        out += '\n';
      }
      return out;
    }

    case ReportFormat::kText: {
      std::map<std::string_view, std::size_t> failures;
      for (const InstanceRecord &r : report.records) {
        if (r.failure) ++failures[to_string(*r.failure)];
      }
      std::string out;
      out += "dataset: " + std::string(to_string(report.dataset)) + "\n";
      out += "instances: " + std::to_string(report.total) + " (scored " +
             std::to_string(report.scored) + ", failed " +
             std::to_string(report.total - report.scored) + ", ties " +
             std::to_string(report.tie_count) + ")\n";
      out += "accuracy: " + format_fixed(100.0 * report.accuracy, 2) + "% (" +
             std::to_string(report.correct_count) + "/" +
             std::to_string(report.total) + ")\n";
      for (const auto &[reason, count] : failures) {
        out += "  " + std::string(reason) + ": " + std::to_string(count) + "\n";
      }
      if (!report.baselines.empty()) {
        out += "\nbaselines:\n";
        for (const Baseline &b : report.baselines) {
          char line[160];
          std::snprintf(line, sizeof(line), "  %-52s %5.1f%%\n",
                        b.name.c_str(), 100.0 * b.accuracy);
          out += line;
        }
      }
      return out;
    }
  }
  return {};
}

EvalReport parse_report_json(std::string_view content) {
  try {
    const ordered_json root = ordered_json::parse(content);
    EvalReport report;
    const auto dataset =
        parse_dataset_source(root.at("dataset").get<std::string>());
    if (!dataset) {
      throw Error(ErrorCode::kMalformedJson, "unknown dataset tag");
    }
    report.dataset = *dataset;
    report.total = root.at("total").get<std::size_t>();
    report.scored = root.at("scored").get<std::size_t>();
    report.correct_count = root.at("correct_count").get<std::size_t>();
    report.accuracy = root.at("accuracy").get<double>();
    report.tie_count = root.at("tie_count").get<std::size_t>();
    for (const auto &row : root.at("baselines")) {
      report.baselines.push_back({row.at("name").get<std::string>(),
                                  row.at("accuracy").get<double>()});
    }
    for (const auto &row : root.at("records")) {
      InstanceRecord r;
      r.instance_id = row.at("instance_id").get<std::string>();
      r.scores = row.at("scores").get<std::vector<double>>();
      r.decision = optional_from<std::size_t>(row.at("decision"));
      r.gold_index = optional_from<std::size_t>(row.at("gold_index"));
      r.correct = optional_from<bool>(row.at("correct"));
      r.tie_flag = row.at("tie_flag").get<bool>();
      if (!row.at("failure").is_null()) {
        r.failure = parse_failure_reason(row.at("failure").get<std::string>());
        if (!r.failure) {
          throw Error(ErrorCode::kMalformedJson, "unknown failure reason");
        }
      }
      r.detail = row.at("detail").get<std::string>();
      report.records.push_back(std::move(r));
    }
    return report;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kMalformedJson, e.what());
  }
}

std::string render_mas_result_json(
    const MasResult &result, std::span<const std::string> candidate_labels) {
  auto grid_json = [](const auto &grid) {
    ordered_json rows = ordered_json::array();
    for (std::size_t l = 0; l < grid.layers(); ++l) {
      ordered_json row = ordered_json::array();
      for (std::size_t h = 0; h < grid.heads(); ++h) row.push_back(grid(l, h));
      rows.push_back(std::move(row));
    }
    return rows;
  };

  ordered_json root;
  root["instance_id"] = result.instance_id;
  root["candidates"] = std::vector<std::string>(candidate_labels.begin(),
                                                candidate_labels.end());
  root["decision"] = result.decision;
  root["tie_flag"] = result.tie_flag;
  root["scores"] = result.scores;
  root["hadamard_sums"] = result.hadamard_sums;
  root["candidate_matrices"] = ordered_json::array();
  for (const auto &m : result.candidate_matrices) {
    ordered_json entry;
    entry["candidate_index"] = m.candidate_index;
    entry["values"] = grid_json(m.values);
    root["candidate_matrices"].push_back(std::move(entry));
  }
  root["masks"] = ordered_json::array();
  for (const auto &m : result.masks) {
    ordered_json entry;
    entry["candidate_index"] = m.candidate_index;
    entry["bits"] = grid_json(m.bits);
    root["masks"].push_back(std::move(entry));
  }
  return root.dump(2) + "\n";
}

std::string render_heatmap(const MasResult &result,
                           std::span<const std::string> tokens,
                           std::span<const std::string> candidate_labels) {
  constexpr int kCell = 14;
  constexpr int kMargin = 20;
  constexpr int kGap = 40;
  constexpr int kHeader = 56;
  constexpr int kLabel = 22;

  std::size_t layers = 0;
  std::size_t heads = 0;
  double global_max = 0.0;
  for (const auto &m : result.candidate_matrices) {
    layers = m.values.layers();
    heads = m.values.heads();
    for (double v : m.values.cells()) global_max = std::max(global_max, v);
  }

  std::string sentence;
  for (const std::string &token : tokens) {
    if (is_boundary_token(token)) continue;
    if (token.size() > 2 && token.starts_with("##")) {
      sentence += token.substr(2);
    } else {
      if (!sentence.empty()) sentence += ' ';
      sentence += token;
    }
  }

  const int grid_w = static_cast<int>(heads) * kCell;
  const int grid_h = static_cast<int>(layers) * kCell;
  const int n = static_cast<int>(result.candidate_matrices.size());
  const int width =
      std::max(2 * kMargin + n * grid_w + std::max(0, n - 1) * kGap, 320);
  const int height = kHeader + kLabel + grid_h + kMargin;

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\" font-family=\"sans-serif\">\n";
  out += "  <title>" + xml_escape(result.instance_id) + "</title>\n";
  out += "  <text class=\"sentence\" x=\"" + std::to_string(kMargin) +
         "\" y=\"22\" font-size=\"13\">" + xml_escape(sentence) + "</text>\n";
  out += "  <text class=\"axes\" x=\"" + std::to_string(kMargin) +
         "\" y=\"40\" font-size=\"10\">rows: layers 0-" +
         std::to_string(layers == 0 ? 0 : layers - 1) + ", columns: heads 0-" +
         std::to_string(heads == 0 ? 0 : heads - 1) + "</text>\n";

  for (int c = 0; c < n; ++c) {
    const auto &matrix = result.candidate_matrices[c];
    const auto &mask = result.masks[c];
    const bool winner = matrix.candidate_index == result.decision;
    const std::string label =
        static_cast<std::size_t>(c) < candidate_labels.size()
            ? candidate_labels[c]
            : "candidate " + std::to_string(matrix.candidate_index);
    const std::string score =
        format_fixed(c < static_cast<int>(result.scores.size())
                         ? result.scores[c]
                         : 0.0,
                     4);
    const int x0 = kMargin + c * (grid_w + kGap);

    out += "  <g class=\"candidate\" data-candidate=\"" +
           std::to_string(matrix.candidate_index) + "\" data-score=\"" + score +
           "\" data-winner=\"" + (winner ? "true" : "false") +
           "\" transform=\"translate(" + std::to_string(x0) + "," +
           std::to_string(kHeader) + ")\">\n";
    out += "    <text class=\"label\" x=\"0\" y=\"14\" font-size=\"12\"" +
           std::string(winner ? " font-weight=\"bold\"" : "") + ">" +
           xml_escape(label) + ": MAS " + score + (winner ? " (winner)" : "") +
           "</text>\n";
    for (std::size_t l = 0; l < layers; ++l) {
      for (std::size_t h = 0; h < heads; ++h) {
        const double t =
            global_max > 0.0 ? matrix.values(l, h) / global_max : 0.0;
        const long red = std::lround(255.0 * std::clamp(t, 0.0, 1.0));
        char fill[8];
        std::snprintf(fill, sizeof(fill), "#%02lx00%02lx", red, 255 - red);
        const bool masked = mask.bits(l, h) != 0;
        out += "    <rect class=\"" + std::string(masked ? "cell masked" : "cell") +
               "\" data-layer=\"" + std::to_string(l) + "\" data-head=\"" +
               std::to_string(h) + "\" x=\"" + std::to_string(h * kCell) +
               "\" y=\"" + std::to_string(kLabel + static_cast<int>(l) * kCell) +
               "\" width=\"" + std::to_string(kCell) + "\" height=\"" +
               std::to_string(kCell) + "\" fill=\"" + fill + "\"" +
               (masked ? " stroke=\"#000000\" stroke-width=\"2\"" : "") +
               "/>\n";
      }
    }
    out += "  </g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace mas
