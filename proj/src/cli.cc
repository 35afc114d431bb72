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

#include "mas/cli.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mas/attention_dump.h"
#include "mas/core_mas.h"
#include "mas/datasets.h"
#include "mas/error.h"
#include "mas/evaluation.h"
#include "mas/utf8.h"

namespace mas::cli {

namespace fs = std::filesystem;

namespace {

struct ScoringFlags {
  std::string agg = "sum";
  std::string tie = "none-wins";
  std::string occurrence = "nearest-before";

  EvalOptions options() const {
    EvalOptions o;
    o.agg = *parse_aggregation_mode(agg);
    o.tie = *parse_tie_policy(tie);
    o.occurrence = *parse_occurrence_policy(occurrence);
    return o;
  }
};

void add_scoring_flags(CLI::App *cmd, ScoringFlags &flags) {
  cmd->add_option("--agg", flags.agg, "Candidate span aggregation")
      ->check(CLI::IsMember({"sum", "max", "mean"}))
      ->capture_default_str();
  cmd->add_option("--tie", flags.tie, "Who wins a tied cell")
      ->check(CLI::IsMember({"none-wins", "all-win", "lowest-index"}))
      ->capture_default_str();
  cmd->add_option("--occurrence", flags.occurrence,
                  "Which occurrence of a repeated candidate to use")
      ->check(CLI::IsMember({"first", "last", "nearest-before"}))
      ->capture_default_str();
}

struct InstanceFlags {
  std::string dump;
  std::string sentence;
  std::size_t pronoun_start = 0;
  std::string pronoun;
  std::string candidates;
  ScoringFlags scoring;
};

void add_instance_flags(CLI::App *cmd, InstanceFlags &flags) {
  cmd->add_option("--dump", flags.dump, "Attention dump directory")->required();
  cmd->add_option("--sentence", flags.sentence, "Sentence text")->required();
  cmd->add_option("--pronoun-start", flags.pronoun_start,
                  "Character offset of the pronoun")
      ->required();
  cmd->add_option("--pronoun", flags.pronoun, "Pronoun text")->required();
  cmd->add_option("--candidates", flags.candidates,
                  "Comma-separated candidate antecedents")
      ->required();
  add_scoring_flags(cmd, flags.scoring);
}

void require_file(const std::string &path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kMissingFile, "no such file: " + path);
  }
}

void require_dir(const std::string &path) {
  if (!fs::is_directory(path)) {
    throw Error(ErrorCode::kMissingFile, "no such directory: " + path);
  }
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_text(const std::string &path, const std::string &content) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    parts.push_back(trim(text.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

DatasetSource guess_source(const std::string &path,
                           const std::string &explicit_source) {
  if (!explicit_source.empty()) return *parse_dataset_source(explicit_source);
  std::string name = fs::path(path).filename().string();
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return name.find("pdp") != std::string::npos ? DatasetSource::kPdp60
                                               : DatasetSource::kWsc273;
}

std::vector<SchemaInstance> load_dataset(const std::string &path,
                                         const std::string &format,
                                         const std::string &source) {
  require_file(path);
  const std::string content = read_text(path);
  if (format == "jsonl") return parse_jsonl(content);
  return parse_wsc_xml(content, guess_source(path, source));
}

// Builds the instance described by the score/visualize flags and scores it.
struct CliScore {
  std::vector<std::string> labels;
  AttentionDump dump;
  ScoredInstance scored;
};

CliScore score_from_flags(const InstanceFlags &flags) {
  require_dir(flags.dump);
  CliScore out;
  out.dump = read_dump(flags.dump);

  SchemaInstance instance;
  instance.id = out.dump.example_id.empty() ? "cli" : out.dump.example_id;
  instance.sentence = flags.sentence;
  const std::size_t length = utf8::length(flags.pronoun);
  if (flags.pronoun.empty() ||
      utf8::substr(flags.sentence, flags.pronoun_start,
                   flags.pronoun_start + length) != flags.pronoun) {
    throw Error(ErrorCode::kSpanMismatch,
                "\"" + flags.pronoun + "\" is not at offset " +
                    std::to_string(flags.pronoun_start) + " of the sentence");
  }
  instance.pronoun = make_char_span(flags.sentence, flags.pronoun_start,
                                    flags.pronoun_start + length);
  instance.candidate_texts = split(flags.candidates, ',');
  check_instance(instance);
  out.labels = instance.candidate_texts;
  out.scored = score_against_dump(instance, out.dump, flags.scoring.options());
  return out;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Resolve pronouns from transformer attention with the Maximum "
               "Attention Score"};
  app.name(args.empty() ? "mas" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  // score
  InstanceFlags score_flags;
  auto *score = app.add_subcommand(
      "score", "Score one instance and print the result as JSON");
  add_instance_flags(score, score_flags);

  // evaluate
  struct {
    std::string dataset;
    std::string format = "wsc-xml";
    std::string source;
    std::string dumps;
    std::string report;
    std::string report_format = "json";
    std::size_t jobs = 1;
    ScoringFlags scoring;
  } eval_flags;
  auto *evaluate_cmd =
      app.add_subcommand("evaluate", "Score a benchmark and write a report");
  evaluate_cmd->add_option("--dataset", eval_flags.dataset, "Benchmark file")
      ->required();
  evaluate_cmd->add_option("--format", eval_flags.format, "Benchmark format")
      ->check(CLI::IsMember({"wsc-xml", "jsonl"}))
      ->capture_default_str();
  evaluate_cmd
      ->add_option("--source", eval_flags.source,
                   "Dataset tag for XML input (default: from the file name)")
      ->check(CLI::IsMember({"WSC273", "PDP60", "CUSTOM"}));
  evaluate_cmd->add_option("--dumps", eval_flags.dumps,
                           "Directory of per-instance attention dumps")
      ->required();
  evaluate_cmd->add_option("--report", eval_flags.report, "Report output path")
      ->required();
  evaluate_cmd->add_option("--report-format", eval_flags.report_format,
                           "Report format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--jobs", eval_flags.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_scoring_flags(evaluate_cmd, eval_flags.scoring);

  // visualize
  InstanceFlags viz_flags;
  std::string viz_out;
  auto *visualize = app.add_subcommand(
      "visualize", "Render per-candidate attention heatmaps as SVG");
  add_instance_flags(visualize, viz_flags);
  visualize->add_option("--out", viz_out, "SVG output path")->required();

  // validate-dump
  std::string validate_dir;
  auto *validate_cmd = app.add_subcommand(
      "validate-dump", "Check an attention dump for shape and row sums");
  validate_cmd->add_option("--dump", validate_dir, "Attention dump directory")
      ->required();

  // synth
  struct {
    std::string tokens;
    std::size_t layers = 0;
    std::size_t heads = 0;
    std::size_t reference = 0;
    std::size_t winner = 0;
    double boost = 0.0;
    std::uint64_t seed = 0;
    std::string out;
  } synth_flags;
  auto *synth = app.add_subcommand(
      "synth", "Write a seeded synthetic dump with a planted winner");
  synth->add_option("--tokens", synth_flags.tokens,
                    "Space-separated tokens, boundary tokens included")
      ->required();
  synth->add_option("--layers", synth_flags.layers, "Number of layers")
      ->required()
      ->check(CLI::PositiveNumber);
  synth->add_option("--heads", synth_flags.heads, "Number of heads")
      ->required()
      ->check(CLI::PositiveNumber);
  synth->add_option("--reference", synth_flags.reference,
                    "Token index of the reference word")
      ->required();
  synth->add_option("--winner", synth_flags.winner,
                    "Token index that receives the boost")
      ->required();
  synth->add_option("--boost", synth_flags.boost, "Mass moved to the winner")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", synth_flags.seed, "Random seed")->required();
  synth->add_option("--out", synth_flags.out, "Output dump directory")
      ->required();

  // convert
  struct {
    std::string in;
    std::string format = "wsc-xml";
    std::string source;
    std::string out;
  } convert_flags;
  auto *convert_cmd = app.add_subcommand(
      "convert", "Convert a benchmark file to canonical JSONL");
  convert_cmd->add_option("--in", convert_flags.in, "Benchmark file")
      ->required();
  convert_cmd->add_option("--format", convert_flags.format, "Input format")
      ->check(CLI::IsMember({"wsc-xml", "jsonl"}))
      ->capture_default_str();
  convert_cmd
      ->add_option("--source", convert_flags.source,
                   "Dataset tag for XML input (default: from the file name)")
      ->check(CLI::IsMember({"WSC273", "PDP60", "CUSTOM"}));
  convert_cmd->add_option("--out", convert_flags.out, "JSONL output path")
      ->required();

  std::vector<const char *> argv;
  argv.reserve(args.size());
  for (const std::string &arg : args) argv.push_back(arg.c_str());
  if (argv.empty()) argv.push_back("mas");

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << app.get_name() << ": usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*score) {
      const CliScore s = score_from_flags(score_flags);
      out << render_mas_result_json(s.scored.result, s.labels);
      return kExitOk;
    }

    if (*evaluate_cmd) {
      require_file(eval_flags.dataset);
      require_dir(eval_flags.dumps);
      const auto instances = load_dataset(eval_flags.dataset, eval_flags.format,
                                          eval_flags.source);
      EvalOptions options = eval_flags.scoring.options();
      options.jobs = eval_flags.jobs;
      const EvalReport report = evaluate(instances, eval_flags.dumps, options);
      write_text(eval_flags.report,
                 render_report(report,
                               *parse_report_format(eval_flags.report_format)));
      out << "accuracy: " << report.correct_count << "/" << report.total
          << " (" << report.total - report.scored << " failed), report "
          << eval_flags.report << "\n";
      return report.scored == report.total ? kExitOk : kExitPartial;
    }

    if (*visualize) {
      const CliScore s = score_from_flags(viz_flags);
      write_text(viz_out,
                 render_heatmap(s.scored.result, s.dump.tokens, s.labels));
      return kExitOk;
    }

    if (*validate_cmd) {
      require_dir(validate_dir);
      const ValidationReport report = validate(read_dump(validate_dir));
      for (const auto &finding : report.findings) {
        out << finding.message << "\n";
      }
      if (!report.ok()) {
        err << app.get_name() << ": error: " << validate_dir << ": "
            << report.findings.size() << " finding(s)\n";
        return kExitDataError;
      }
      out << "ok\n";
      return kExitOk;
    }

    if (*synth) {
      std::vector<std::string> tokens;
      std::istringstream words(synth_flags.tokens);
      for (std::string token; words >> token;) tokens.push_back(token);
      AttentionDump dump = synth_dump(
          std::move(tokens), synth_flags.layers, synth_flags.heads,
          synth_flags.reference, synth_flags.winner, synth_flags.boost,
          synth_flags.seed);
      fs::path out_dir = fs::path(synth_flags.out).lexically_normal();
      if (out_dir.filename().empty()) out_dir = out_dir.parent_path();
      dump.example_id = out_dir.filename().string();
      write_dump(dump, synth_flags.out);
      return kExitOk;
    }

    if (*convert_cmd) {
      const auto instances = load_dataset(convert_flags.in, convert_flags.format,
                                          convert_flags.source);
      write_text(convert_flags.out, convert(instances));
      return kExitOk;
    }
  } catch (const Error &e) {
    err << app.get_name() << ": error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception &e) {
    err << app.get_name() << ": error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace mas::cli
