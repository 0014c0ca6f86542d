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

// Tabular output for bias reports, comparisons, tf-idf rankings and balance
// plans. Real numbers are always rendered with four decimals.

#ifndef LMBIAS_REPORT_IO_HPP
#define LMBIAS_REPORT_IO_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lmbias/balance.hpp"
#include "lmbias/scoring.hpp"
#include "lmbias/text.hpp"
#include "lmbias/tfidf.hpp"

namespace lmbias {

enum class OutputFormat { kCsv, kMarkdown, kJson };

inline std::optional<OutputFormat> ParseOutputFormat(std::string_view s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "md") return OutputFormat::kMarkdown;
  if (s == "json") return OutputFormat::kJson;
  return std::nullopt;
}

namespace detail {

inline std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string MdCell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

inline std::string Opt4(const std::optional<double>& v) { return v ? text::Fixed4(*v) : ""; }

inline std::string JoinGroups(const std::vector<std::string>& groups) {
  std::string out;
  for (const auto& g : groups) out += (out.empty() ? "" : ";") + g;
  return out;
}

// Writes a table in CSV or Markdown.
inline std::string Table(OutputFormat format, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    if (format == OutputFormat::kCsv) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + CsvField(cells[i]);
    } else {
      out += "|";
      for (const auto& c : cells) out += " " + MdCell(c) + " |";
    }
    out += '\n';
  };
  line(header);
  if (format == OutputFormat::kMarkdown) {
    out += "|";
    for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
    out += '\n';
  }
  for (const auto& r : rows) line(r);
  return out;
}

inline nlohmann::ordered_json OptJson(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(text::Round4(*v)) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

// --- bias reports ---------------------------------------------------------------

inline const std::vector<std::string>& SummaryHeader() {
  static const std::vector<std::string> header = {
      "category", "model_id", "groups", "templates", "cells", "probes", "records",
      "lpbs_mean", "mean_abs_gap", "r_term", "cbs", "clamp_warnings"};
  return header;
}

inline std::vector<std::string> SummaryRow(const BiasReport& r) {
  return {std::string(ToString(r.category)), r.model_id, detail::JoinGroups(r.groups),
          std::to_string(r.template_count), std::to_string(r.cell_count), std::to_string(r.probe_count),
          std::to_string(r.record_count), detail::Opt4(r.lpbs_mean), detail::Opt4(r.mean_abs_gap),
          detail::Opt4(r.r_term), text::Fixed4(r.cbs), std::to_string(r.clamp_warnings)};
}

// Long-format breakdown: mean association per group, association gap per
// (template, context) cell for binary categories.
inline std::vector<std::vector<std::string>> BreakdownRows(const BiasReport& r) {
  std::vector<std::vector<std::string>> rows;
  const std::string category(ToString(r.category));
  for (const auto& g : r.group_associations) {
    rows.push_back({category, "group_association", "", g.group, text::Fixed4(g.mean_association)});
  }
  for (const auto& c : r.context_gaps) {
    rows.push_back({category, "context_gap", c.template_id, c.context, text::Fixed4(c.gap)});
  }
  return rows;
}

inline const std::vector<std::string>& BreakdownHeader() {
  static const std::vector<std::string> header = {"category", "kind", "template_id", "key", "value"};
  return header;
}

inline nlohmann::ordered_json ToJson(const BiasReport& r) {
  nlohmann::ordered_json j;
  j["category"] = ToString(r.category);
  j["model_id"] = r.model_id;
  j["groups"] = r.groups;
  j["templates"] = r.template_count;
  j["cells"] = r.cell_count;
  j["probes"] = r.probe_count;
  j["records"] = r.record_count;
  j["lpbs_mean"] = detail::OptJson(r.lpbs_mean);
  j["mean_abs_gap"] = detail::OptJson(r.mean_abs_gap);
  j["r_term"] = detail::OptJson(r.r_term);
  j["cbs"] = text::Round4(r.cbs);
  j["clamp_warnings"] = r.clamp_warnings;
  auto& groups = j["group_associations"] = nlohmann::ordered_json::array();
  for (const auto& g : r.group_associations) {
    groups.push_back({{"group", g.group}, {"mean_association", text::Round4(g.mean_association)}});
  }
  auto& gaps = j["context_gaps"] = nlohmann::ordered_json::array();
  for (const auto& c : r.context_gaps) {
    nlohmann::ordered_json cell;
    cell["template_id"] = c.template_id;
    cell["context"] = c.context;
    cell["association"] = {text::Round4(c.association[0]), text::Round4(c.association[1])};
    cell["gap"] = text::Round4(c.gap);
    gaps.push_back(std::move(cell));
  }
  return j;
}

// Whole-run rendering. For CSV the breakdown goes to a second document,
// returned through `breakdown`.
inline std::string RenderReports(const std::vector<BiasReport>& reports, OutputFormat format,
                                 std::string* breakdown = nullptr) {
  if (format == OutputFormat::kJson) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : reports) j.push_back(ToJson(r));
    return j.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> summary;
  std::vector<std::vector<std::string>> details;
  for (const auto& r : reports) {
    summary.push_back(SummaryRow(r));
    auto rows = BreakdownRows(r);
    details.insert(details.end(), rows.begin(), rows.end());
  }
  if (format == OutputFormat::kCsv) {
    if (breakdown) *breakdown = detail::Table(format, BreakdownHeader(), details);
    return detail::Table(format, SummaryHeader(), summary);
  }
  std::string out = "# Bias report\n\n" + detail::Table(format, SummaryHeader(), summary);
  for (const auto& r : reports) {
    out += "\n## " + std::string(ToString(r.category)) + "\n\n";
    out += detail::Table(format, BreakdownHeader(), BreakdownRows(r));
  }
  return out;
}

inline std::string RenderComparison(const std::vector<ComparisonRow>& rows, OutputFormat format) {
  if (format == OutputFormat::kJson) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["category"] = ToString(r.category);
      row["metric"] = r.metric;
      row["before"] = text::Round4(r.before);
      row["after"] = text::Round4(r.after);
      row["delta"] = text::Round4(r.delta);
      j.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> table;
  for (const auto& r : rows) {
    table.push_back({std::string(ToString(r.category)), r.metric, text::Fixed4(r.before),
                     text::Fixed4(r.after), text::Fixed4(r.delta)});
  }
  std::string out = format == OutputFormat::kMarkdown ? "# Before / after\n\n" : "";
  return out + detail::Table(format, {"category", "metric", "before", "after", "delta"}, table);
}

// --- tf-idf ----------------------------------------------------------------------

inline std::string RenderTfidf(const std::vector<TermScore>& ranked, OutputFormat format) {
  if (format == OutputFormat::kJson) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      nlohmann::ordered_json row;
      row["rank"] = i + 1;
      row["word"] = ranked[i].term;
      row["tfidf"] = text::Round4(ranked[i].score);
      row["frequency"] = ranked[i].frequency;
      row["document_frequency"] = ranked[i].document_frequency;
      j.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    rows.push_back({std::to_string(i + 1), ranked[i].term, text::Fixed4(ranked[i].score),
                    std::to_string(ranked[i].frequency), std::to_string(ranked[i].document_frequency)});
  }
  return detail::Table(format, {"rank", "word", "tfidf", "frequency", "document_frequency"}, rows);
}

// --- balance ----------------------------------------------------------------------

inline std::string RenderBalanceReport(const BalanceReportRows& report, OutputFormat format) {
  auto target = [](const WordCount& c) { return c.target ? std::to_string(*c.target) : std::string(); };
  if (format == OutputFormat::kJson) {
    nlohmann::ordered_json j;
    auto& counts = j["counts"] = nlohmann::ordered_json::array();
    for (const auto& c : report.counts) {
      nlohmann::ordered_json row;
      row["word"] = c.word;
      row["before"] = c.before;
      row["after"] = c.after;
      row["target"] = c.target ? nlohmann::ordered_json(*c.target) : nlohmann::ordered_json(nullptr);
      counts.push_back(std::move(row));
    }
    auto& edits = j["edits"] = nlohmann::ordered_json::object();
    for (const auto& [reason, n] : report.edits_by_reason) edits[reason] = n;
    return j.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> counts;
  for (const auto& c : report.counts) {
    counts.push_back({c.word, std::to_string(c.before), std::to_string(c.after), target(c)});
  }
  std::vector<std::vector<std::string>> edits;
  for (const auto& [reason, n] : report.edits_by_reason) edits.push_back({reason, std::to_string(n)});
  std::string out = detail::Table(format, {"word", "before", "after", "target"}, counts);
  out += "\n";
  out += detail::Table(format, {"reason", "edits"}, edits);
  return out;
}

}  // namespace lmbias

#endif  // LMBIAS_REPORT_IO_HPP
