//
// Copyright 2026 The lmbias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// lmbias: command-line front end.
//
//   lmbias expand  --preset gender --output probes.jsonl
//   lmbias score   --probes probes.jsonl --input probs.jsonl [--compare probs2.jsonl]
//   lmbias balance --input corpus.jsonl --spec spec.json --output balanced.jsonl
//   lmbias tfidf   --input corpus.jsonl --top-k 20
//
// Exit codes: 0 success, 2 input or configuration error, 3 coverage or
// consistency error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmbias/balance.hpp"
#include "lmbias/corpus.hpp"
#include "lmbias/error.hpp"
#include "lmbias/jsonl.hpp"
#include "lmbias/presets.hpp"
#include "lmbias/probe_io.hpp"
#include "lmbias/records_io.hpp"
#include "lmbias/report_io.hpp"
#include "lmbias/scoring.hpp"
#include "lmbias/tfidf.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCoverage = 3;

struct RunConfig {
  std::string input;
  std::string output = "-";
  std::string format = "csv";
  std::string preset;
  std::string templates;
  std::string probes;
  std::string compare;
  std::string spec;
  std::string ledger;
  std::string report;
  std::string input_format;
  std::vector<std::string> categories;
  double lambda = 1.0;
  std::optional<std::uint64_t> seed;
  int top_k = 20;
};

void Emit(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
  } else {
    lmbias::jsonl::WriteFile(path, content);
  }
}

lmbias::OutputFormat Format(const RunConfig& cfg) {
  auto f = lmbias::ParseOutputFormat(cfg.format);
  if (!f) throw lmbias::InputError("unknown format '" + cfg.format + "' (expected csv, md or json)");
  return *f;
}

// Output files must not overwrite any input.
void CheckDistinct(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  auto same = [](const std::string& a, const std::string& b) {
    if (a.empty() || b.empty() || a == "-" || b == "-") return false;
    std::error_code ec;
    if (fs::exists(a, ec) && fs::exists(b, ec)) return fs::equivalent(a, b, ec);
    return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
  };
  std::vector<std::string> all = inputs;
  all.insert(all.end(), outputs.begin(), outputs.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (j >= inputs.size() && same(all[i], all[j])) {
        throw lmbias::InputError("path '" + all[j] + "' is used twice");
      }
    }
  }
}

std::string SiblingPath(const std::string& path, const std::string& suffix, const std::string& ext) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + ext)).string();
}

// --- expand ------------------------------------------------------------------

int CmdExpand(const RunConfig& cfg) {
  if (cfg.preset.empty() == cfg.templates.empty()) {
    throw lmbias::InputError("give exactly one of --preset or --templates");
  }
  CheckDistinct({cfg.templates}, {cfg.output});
  lmbias::ProbeSet set;
  if (!cfg.preset.empty()) {
    auto p = lmbias::presets::ByName(cfg.preset);
    if (!p) {
      std::string names;
      for (const auto& n : lmbias::presets::Names()) names += (names.empty() ? "" : ", ") + n;
      throw lmbias::InputError("unknown preset '" + cfg.preset + "' (available: " + names + ")");
    }
    set = std::move(*p);
  } else {
    const auto content = lmbias::jsonl::ReadFile(cfg.templates);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
      throw lmbias::InputError(cfg.templates + ": " + e.what());
    }
    set = lmbias::ProbeSetFromJson(j);
  }
  auto probes = set.Expand();
  std::size_t conditional = 0;
  for (const auto& p : probes) conditional += (p.condition == lmbias::Condition::kConditional);
  Emit(cfg.output, lmbias::SerializeProbes(probes));
  std::cerr << "expanded '" << set.name << "': " << conditional << " conditional + "
            << probes.size() - conditional << " prior probes\n";
  return kExitOk;
}

// --- score ---------------------------------------------------------------------

lmbias::ScoreOptions ScoreOptionsFrom(const RunConfig& cfg) {
  lmbias::ScoreOptions options;
  options.lambda = cfg.lambda;
  if (!(cfg.lambda >= 0.0)) throw lmbias::InputError("--lambda must be non-negative");
  for (const auto& c : cfg.categories) {
    auto cat = lmbias::ParseCategory(c);
    if (!cat) throw lmbias::InputError("unknown category '" + c + "'");
    options.categories.push_back(*cat);
  }
  return options;
}

int CmdScore(const RunConfig& cfg) {
  const auto format = Format(cfg);
  CheckDistinct({cfg.probes, cfg.input, cfg.compare}, {cfg.output});
  const auto probes = lmbias::ParseProbes(lmbias::jsonl::ReadFile(cfg.probes));
  const auto options = ScoreOptionsFrom(cfg);
  const auto records = lmbias::ParseRecords(lmbias::jsonl::ReadFile(cfg.input));
  const auto reports = lmbias::ScoreRecords(probes, records, options);
  if (reports.empty()) throw lmbias::InputError("no probes for the selected categories");

  if (!cfg.compare.empty()) {
    const auto after_records = lmbias::ParseRecords(lmbias::jsonl::ReadFile(cfg.compare));
    const auto after = lmbias::ScoreRecords(probes, after_records, options);
    Emit(cfg.output, lmbias::RenderComparison(lmbias::Compare(reports, after), format));
    return kExitOk;
  }

  std::string breakdown;
  const auto summary = lmbias::RenderReports(reports, format, &breakdown);
  Emit(cfg.output, summary);
  if (format == lmbias::OutputFormat::kCsv) {
    if (cfg.output == "-") {
      std::cout << "\n" << breakdown;
    } else {
      lmbias::jsonl::WriteFile(SiblingPath(cfg.output, "_breakdown", ".csv"), breakdown);
    }
  }
  return kExitOk;
}

// --- balance ---------------------------------------------------------------------

lmbias::Corpus LoadCorpusOrThrow(const std::string& path, const std::string& input_format) {
  const auto content = lmbias::jsonl::ReadFile(path);
  std::string kind = input_format;
  if (kind.empty()) kind = fs::path(path).extension() == ".csv" ? "csv" : "jsonl";
  lmbias::LoadResult loaded;
  if (kind == "csv") {
    loaded = lmbias::LoadCorpusCsv(content);
  } else if (kind == "jsonl") {
    loaded = lmbias::LoadCorpusJsonl(content);
  } else {
    throw lmbias::InputError("unknown corpus format '" + kind + "' (expected jsonl or csv)");
  }
  if (!loaded.errors.empty()) {
    std::string message = path + ": " + std::to_string(loaded.errors.size()) + " malformed row(s)";
    for (const auto& e : loaded.errors) message += "\n  row " + std::to_string(e.index) + ": " + e.message;
    throw lmbias::InputError(message);
  }
  return std::move(loaded.documents);
}

int CmdBalance(const RunConfig& cfg) {
  const auto format = Format(cfg);
  if (cfg.output == "-") throw lmbias::InputError("balance needs --output");
  const auto ledger = cfg.ledger.empty() ? SiblingPath(cfg.output, "_ledger", ".jsonl") : cfg.ledger;
  const auto report_ext = format == lmbias::OutputFormat::kCsv      ? ".csv"
                          : format == lmbias::OutputFormat::kJson ? ".json"
                                                                  : ".md";
  const auto report = cfg.report.empty() ? SiblingPath(cfg.output, "_report", report_ext) : cfg.report;
  CheckDistinct({cfg.input, cfg.spec}, {cfg.output, ledger, report});

  const auto corpus = LoadCorpusOrThrow(cfg.input, cfg.input_format);
  lmbias::BalanceSpec spec;
  if (!cfg.spec.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lmbias::jsonl::ReadFile(cfg.spec));
    } catch (const nlohmann::json::exception& e) {
      throw lmbias::InputError(cfg.spec + ": " + e.what());
    }
    spec = lmbias::BalanceSpecFromJson(j);
  }
  if (cfg.seed) spec.seed = *cfg.seed;

  const auto result = lmbias::Balance(corpus, spec);
  lmbias::jsonl::WriteFile(cfg.output, lmbias::SerializeCorpus(result.corpus));
  lmbias::jsonl::WriteFile(ledger, lmbias::SerializeLedger(result.plan.edits));
  lmbias::jsonl::WriteFile(report, lmbias::RenderBalanceReport(lmbias::BalanceReport(result.plan), format));
  std::cerr << "balanced " << corpus.size() << " -> " << result.corpus.size() << " documents, "
            << result.plan.edits.size() << " edits\n";
  return kExitOk;
}

// --- tfidf -----------------------------------------------------------------------

int CmdTfidf(const RunConfig& cfg) {
  const auto format = Format(cfg);
  if (cfg.top_k <= 0) throw lmbias::InputError("--top-k must be positive");
  CheckDistinct({cfg.input}, {cfg.output});
  const auto corpus = LoadCorpusOrThrow(cfg.input, cfg.input_format);
  const auto ranked = lmbias::TfidfRank(corpus, static_cast<std::size_t>(cfg.top_k));
  Emit(cfg.output, lmbias::RenderTfidf(ranked, format));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bias audit toolkit for masked language models"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* expand = app.add_subcommand("expand", "Expand templates and word sets into probes.jsonl");
  expand->add_option("--preset", cfg.preset, "Built-in probe set (ethnicity-5t, ethnicity-3t, gender, race)");
  expand->add_option("--templates", cfg.templates, "Probe-set definition JSON");
  expand->add_option("--output,-o", cfg.output, "Output probes.jsonl ('-' for stdout)");

  auto* score = app.add_subcommand("score", "Score probability records into bias reports");
  score->add_option("--probes", cfg.probes, "probes.jsonl the records were produced for")->required();
  score->add_option("--input,-i", cfg.input, "probs.jsonl")->required();
  score->add_option("--compare", cfg.compare, "Second probs.jsonl (after mitigation) for a before/after table");
  score->add_option("--category", cfg.categories, "Restrict to categories (repeatable)");
  score->add_option("--lambda", cfg.lambda, "Regularizer strength for the r_term column");
  score->add_option("--output,-o", cfg.output, "Report path ('-' for stdout)");
  score->add_option("--format", cfg.format, "csv, md or json");

  auto* balance = app.add_subcommand("balance", "Rebalance a comment corpus");
  balance->add_option("--input,-i", cfg.input, "Corpus JSONL or CSV")->required();
  balance->add_option("--input-format", cfg.input_format, "jsonl or csv (default: by extension)");
  balance->add_option("--spec", cfg.spec, "Balance spec JSON");
  balance->add_option("--output,-o", cfg.output, "Balanced corpus JSONL")->required();
  balance->add_option("--ledger", cfg.ledger, "Edit ledger JSONL (default: <output>_ledger.jsonl)");
  balance->add_option("--report", cfg.report, "Count report (default: <output>_report.<format>)");
  balance->add_option("--seed", cfg.seed, "Sampling seed (overrides the spec)");
  balance->add_option("--format", cfg.format, "Report format: csv, md or json");

  auto* tfidf = app.add_subcommand("tfidf", "Rank corpus terms by tf-idf");
  tfidf->add_option("--input,-i", cfg.input, "Corpus JSONL or CSV")->required();
  tfidf->add_option("--input-format", cfg.input_format, "jsonl or csv (default: by extension)");
  tfidf->add_option("--top-k", cfg.top_k, "Number of rows");
  tfidf->add_option("--output,-o", cfg.output, "Output path ('-' for stdout)");
  tfidf->add_option("--format", cfg.format, "csv, md or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*expand) return CmdExpand(cfg);
    if (*score) return CmdScore(cfg);
    if (*balance) return CmdBalance(cfg);
    if (*tfidf) return CmdTfidf(cfg);
  } catch (const lmbias::CoverageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCoverage;
  } catch (const lmbias::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
