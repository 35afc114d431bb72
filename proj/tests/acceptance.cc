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


// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero
// if any selected criterion fails. Run with --criterion NAME to select one.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "CLI11.hpp"
#include "mas/attention_dump.h"
#include "mas/cli.h"
#include "mas/core_mas.h"
#include "mas/datasets.h"
#include "mas/error.h"
#include "mas/evaluation.h"
#include "oracle.h"
#include "test_util.h"

namespace mas {
namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using namespace testing;

// Pinned tolerances and budgets.
constexpr double kScoreTolerance = 1e-12;
constexpr double kSumTolerance = 1e-9;
constexpr double kWorkedTolerance = 1e-4;
constexpr double kTimeBudgetSeconds = 10.0;
constexpr int kOracleInstances = 1000;
constexpr int kPlantedTrials = 500;
constexpr double kMinBoost = 0.55;
constexpr std::size_t kWscCount = 273;
constexpr std::size_t kPdpCount = 60;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

int run_cli(std::vector<std::string> args, std::string *err_text = nullptr) {
  args.insert(args.begin(), "mas");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20190801);
  int checked = 0, skipped_ties = 0, attempts = 0;
  double worst = 0.0, worst_sum = 0.0;
  while (checked < kOracleInstances && attempts < 4 * kOracleInstances) {
    ++attempts;
    const RawInstance raw = random_instance(rng);
    const Cube cube = slice_oracle(raw);
    const OracleResult expected = per_cell_max_oracle(cube);
    if (expected.any_tie) {
      ++skipped_ties;
      continue;
    }
    const AttentionDump dump = to_dump(raw);
    std::vector<SpanAlignment> spans;
    for (const auto &c : raw.candidates) spans.push_back(tokens_at(c));
    const MasResult got =
        score_instance(dump, tokens_at(raw.reference), spans,
                       AggregationMode::kSum, TiePolicy::kNoneWins, "oracle");
    double sum = 0.0;
    for (std::size_t c = 0; c < got.scores.size(); ++c) {
      worst = std::max(worst, std::abs(got.scores[c] - expected.scores[c]));
      sum += got.scores[c];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    ++checked;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << checked << " instances (" << skipped_ties
         << " tied skipped), max |score diff| " << worst << ", max |sum-1| "
         << worst_sum << ", " << elapsed << " s";
  return {checked >= kOracleInstances && worst <= kScoreTolerance &&
              worst_sum <= kSumTolerance && elapsed < kTimeBudgetSeconds,
          detail.str()};
}

// Random word sentence; the reference and candidates are distinct words.
Outcome planted_winner() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(55);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  int correct = 0;
  std::string first_miss;
  for (int trial = 0; trial < kPlantedTrials; ++trial) {
    const std::size_t words = uniform(4, 30);
    std::vector<std::string> tokens{"[CLS]"};
    std::string sentence;
    for (std::size_t w = 0; w < words; ++w) {
      const std::string word = "word" + std::to_string(w);
      tokens.push_back(word);
      sentence += (w ? " " : "") + word;
    }
    tokens.push_back("[SEP]");
    // Token i (1-based) is word i-1; pick reference and m candidates.
    std::vector<std::size_t> picks;
    for (std::size_t i = 1; i <= words; ++i) picks.push_back(i);
    std::shuffle(picks.begin(), picks.end(), rng);
    const std::size_t m = uniform(2, std::min<std::size_t>(5, words - 1));
    const std::size_t reference = picks[0];
    const std::size_t gold = uniform(0, m - 1);
    const double boost =
        std::uniform_real_distribution<double>(kMinBoost, 1.0)(rng);

    SchemaInstance instance;
    instance.id = "custom-" + std::to_string(trial);
    instance.sentence = sentence;
    std::size_t pos = 0;
    for (std::size_t i = 1; i < reference; ++i) pos += tokens[i].size() + 1;
    instance.pronoun =
        make_char_span(sentence, pos, pos + tokens[reference].size());
    for (std::size_t c = 0; c < m; ++c) {
      instance.candidate_texts.push_back(tokens[picks[c + 1]]);
    }
    instance.gold_index = gold;

    const AttentionDump dump =
        synth_dump(tokens, uniform(1, 12), uniform(1, 12), reference,
                   picks[gold + 1], boost, 1000 + trial);
    const ScoredInstance scored = score_against_dump(instance, dump, {});
    if (scored.result.decision == gold) {
      ++correct;
    } else if (first_miss.empty()) {
      first_miss = instance.id;
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << correct << "/" << kPlantedTrials << " planted winners recovered, "
         << elapsed << " s";
  if (!first_miss.empty()) detail << ", first miss " << first_miss;
  return {correct == kPlantedTrials && elapsed < kTimeBudgetSeconds,
          detail.str()};
}

Outcome worked_example() {
  const std::vector<CandidateAttentionMatrix> m{
      grid_matrix(0, {{0.40, 0.10}, {0.20, 0.30}}),
      grid_matrix(1, {{0.30, 0.20}, {0.25, 0.10}})};
  const auto masks = compute_masks(m);
  const MasResult r = mas_scores(m, masks, "worked");
  const bool masks_ok =
      masks[0].bits(0, 0) == 1 && masks[0].bits(0, 1) == 0 &&
      masks[0].bits(1, 0) == 0 && masks[0].bits(1, 1) == 1 &&
      masks[1].bits(0, 0) == 0 && masks[1].bits(0, 1) == 1 &&
      masks[1].bits(1, 0) == 1 && masks[1].bits(1, 1) == 0;
  const bool scores_ok = std::abs(r.scores[0] - 0.6087) <= kWorkedTolerance &&
                         std::abs(r.scores[1] - 0.3913) <= kWorkedTolerance;
  std::ostringstream detail;
  detail << "masks " << (masks_ok ? "match" : "differ") << ", scores ("
         << r.scores[0] << ", " << r.scores[1] << ")";
  return {masks_ok && scores_ok && r.decision == 0, detail.str()};
}

Outcome format_round_trips() {
  TempDir tmp;
  std::vector<std::string> failures;

  // masdump: write, read, write again.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> tokens{"[CLS]"};
    const std::size_t t = 3 + rng() % 30;
    for (std::size_t k = 0; k < t; ++k) tokens.push_back("t" + std::to_string(k));
    tokens.push_back("[SEP]");
    AttentionDump d =
        synth_dump(tokens, 1 + rng() % 12, 1 + rng() % 12, 1, 2, 0.6, rng());
    d.example_id = "d" + std::to_string(i);
    d.lowercased = i % 2 == 0;
    write_dump(d, tmp / d.example_id);
    const AttentionDump back = read_dump(tmp / d.example_id);
    const bool same =
        back.example_id == d.example_id && back.model_name == d.model_name &&
        back.lowercased == d.lowercased && back.num_layers == d.num_layers &&
        back.num_heads == d.num_heads && back.tokens == d.tokens &&
        back.attention.size() == d.attention.size() &&
        std::memcmp(back.attention.data(), d.attention.data(),
                    d.attention.size() * sizeof(float)) == 0;
    write_dump(back, tmp / (d.example_id + "-again"));
    const bool bytes_same =
        slurp(tmp / d.example_id / "attention.f32") ==
            slurp(tmp / (d.example_id + "-again") / "attention.f32") &&
        slurp(tmp / d.example_id / "manifest.json") ==
            slurp(tmp / (d.example_id + "-again") / "manifest.json");
    if (!same || !bytes_same) failures.push_back("masdump " + d.example_id);
  }

  // JSONL: bundled fixtures convert then parse.
  const fs::path data = fs::path(MAS_SOURCE_DIR) / "tests" / "data";
  const auto wsc = parse_wsc_xml(slurp(data / "wsc_sample.xml"));
  const auto pdp =
      parse_wsc_xml(slurp(data / "pdp_sample.xml"), DatasetSource::kPdp60);
  for (const auto *set : {&wsc, &pdp}) {
    const std::string jsonl = convert(*set);
    if (parse_jsonl(jsonl) != *set || convert(parse_jsonl(jsonl)) != jsonl) {
      failures.push_back("jsonl");
    }
  }

  // Report JSON: a real evaluation with successes and failures.
  std::vector<SchemaInstance> instances;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "custom-" + std::to_string(i);
    if (i != 3) write_cat_dog_dump(tmp / "dumps", id, i % 2 ? kCatToken : kDogToken, i);
    instances.push_back(cat_dog_instance(id, i % 3 == 0 ? std::nullopt
                                                        : std::optional<std::size_t>(i % 2)));
  }
  const EvalReport report = evaluate(instances, tmp / "dumps");
  const std::string json = render_report(report, ReportFormat::kJson);
  const EvalReport parsed = parse_report_json(json);
  if (!(parsed == report) || render_report(parsed, ReportFormat::kJson) != json) {
    failures.push_back("report json");
  }

  std::string detail = "20 dumps, 2 JSONL sets, 1 report";
  for (const auto &f : failures) detail += "; mismatch: " + f;
  return {failures.empty(), detail};
}

Outcome dataset_integrity() {
  auto path_from = [](const char *env, const char *fallback) {
    const char *value = std::getenv(env);
    return value ? fs::path(value) : fs::path(MAS_SOURCE_DIR) / "data" / fallback;
  };
  const fs::path wsc = path_from("MAS_WSC_XML", "WSCollection.xml");
  const fs::path pdp = path_from("MAS_PDP_XML", "PDP.xml");
  std::ostringstream detail;
  bool pass = true;
  for (const auto &[path, source, expected] :
       {std::tuple{wsc, DatasetSource::kWsc273, kWscCount},
        std::tuple{pdp, DatasetSource::kPdp60, kPdpCount}}) {
    detail << to_string(source) << ": ";
    if (!fs::is_regular_file(path)) {
      detail << "file not found at " << path.string() << "; ";
      pass = false;
      continue;
    }
    try {
      const std::size_t n = parse_wsc_xml(slurp(path), source).size();
      detail << n << "/" << expected << " instances; ";
      pass = pass && n == expected;
    } catch (const Error &e) {
      detail << e.what() << "; ";
      pass = false;
    }
  }
  return {pass, detail.str()};
}

Outcome visualization() {
  TempDir tmp;
  const std::size_t layers = 5, heads = 7;
  const std::string dump_dir = (tmp / "viz").string();
  std::string tokens;
  for (const auto &t : cat_dog_tokens()) tokens += (tokens.empty() ? "" : " ") + t;
  std::string err;
  if (run_cli({"synth", "--tokens", tokens, "--layers", std::to_string(layers),
               "--heads", std::to_string(heads), "--reference",
               std::to_string(kCatDogReference), "--winner",
               std::to_string(kDogToken), "--boost", "0.3", "--seed", "11",
               "--out", dump_dir},
              &err) != cli::kExitOk) {
    return {false, "synth failed: " + err};
  }
  const std::string svg_path = (tmp / "viz.svg").string();
  if (run_cli({"visualize", "--dump", dump_dir, "--sentence", kCatDogSentence,
               "--pronoun-start", std::to_string(kCatDogPronounStart),
               "--pronoun", "it", "--candidates", "the cat,the dog", "--out",
               svg_path},
              &err) != cli::kExitOk) {
    return {false, "visualize failed: " + err};
  }

  // Expected masks, computed independently of the renderer.
  const SchemaInstance instance = cat_dog_instance("viz", std::nullopt);
  const MasResult expected =
      score_against_dump(instance, read_dump(dump_dir), {}).result;

  pt::ptree tree;
  try {
    std::istringstream in(slurp(svg_path));
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error &e) {
    return {false, std::string("SVG is not well-formed: ") + e.what()};
  }
  std::size_t groups = 0, bad_cells = 0, outline_errors = 0, masked_total = 0;
  for (const auto &[name, node] : tree.get_child("svg")) {
    if (name != "g") continue;
    ++groups;
    const std::size_t c = node.get<std::size_t>("<xmlattr>.data-candidate");
    std::vector<int> seen(layers * heads, 0);
    for (const auto &[child, rect] : node) {
      if (child != "rect") continue;
      const std::size_t l = rect.get<std::size_t>("<xmlattr>.data-layer");
      const std::size_t h = rect.get<std::size_t>("<xmlattr>.data-head");
      if (l >= layers || h >= heads) {
        ++bad_cells;
        continue;
      }
      ++seen[l * heads + h];
      const bool outlined =
          rect.get_optional<std::string>("<xmlattr>.stroke").has_value();
      masked_total += outlined;
      if (outlined != (expected.masks[c].bits(l, h) != 0)) ++outline_errors;
    }
    for (int count : seen) bad_cells += count != 1;
  }
  std::ostringstream detail;
  detail << groups << " candidate grids of " << layers << "x" << heads << ", "
         << masked_total << " outlined cells, " << bad_cells
         << " cell count errors, " << outline_errors << " outline errors";
  return {groups == 2 && bad_cells == 0 && outline_errors == 0, detail.str()};
}

Outcome determinism() {
  TempDir tmp;
  std::vector<SchemaInstance> instances;
  for (int i = 0; i < 40; ++i) {
    const std::string id = "custom-" + std::to_string(i);
    // Every seventh dump is missing so failures are covered too.
    if (i % 7 != 0) {
      write_cat_dog_dump(tmp / "dumps", id, i % 3 ? kCatToken : kDogToken, i,
                         i % 5 == 0 ? 0.0 : 0.7);
    }
    instances.push_back(cat_dog_instance(id, i % 2));
  }
  spit(tmp / "set.jsonl", convert(instances));
  std::string detail;
  bool pass = true;
  for (const std::string format : {"json", "csv", "text"}) {
    std::string reports[2];
    int i = 0;
    for (const std::string jobs : {"1", "4"}) {
      const fs::path out = tmp / ("report-" + jobs + "." + format);
      const int code = run_cli({"evaluate", "--dataset",
                                (tmp / "set.jsonl").string(), "--format",
                                "jsonl", "--dumps", (tmp / "dumps").string(),
                                "--report", out.string(), "--report-format",
                                format, "--jobs", jobs});
      if (code != cli::kExitPartial) pass = false;
      reports[i++] = slurp(out);
    }
    const bool same = !reports[0].empty() && reports[0] == reports[1];
    pass = pass && same;
    detail += format + (same ? " identical" : " differs") + "; ";
  }
  return {pass, detail + "40 instances, jobs 1 vs 4"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> &criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>>
      all{{"oracle_equivalence", oracle_equivalence},
          {"planted_winner", planted_winner},
          {"worked_example", worked_example},
          {"format_round_trips", format_round_trips},
          {"dataset_integrity", dataset_integrity},
          {"visualization", visualization},
          {"determinism", determinism}};
  return all;
}

}  // namespace
}  // namespace mas

int main(int argc, char **argv) {
  CLI::App app{"MAS acceptance checks"};
  std::vector<std::string> selected;
  app.add_option("--criterion", selected, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  int failures = 0, ran = 0;
  for (const auto &[name, check] : mas::criteria()) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), name) == selected.end()) {
      continue;
    }
    ++ran;
    mas::Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception &e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": "
              << outcome.detail << "\n";
    failures += !outcome.pass;
  }
  if (ran == 0) {
    std::cerr << "no such criterion\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
