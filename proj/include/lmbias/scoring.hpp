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

// Joins a probe set with the probability records a backend produced for it and
// turns them into one BiasReport per category.

#ifndef LMBIAS_SCORING_HPP
#define LMBIAS_SCORING_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lmbias/error.hpp"
#include "lmbias/metrics.hpp"
#include "lmbias/probe.hpp"

namespace lmbias {

struct GroupAssociation {
  std::string group;
  double mean_association = 0.0;  // mean LPBS association over the cells
};

struct BiasReport {
  Category category = Category::kCustom;
  std::string model_id;
  std::vector<std::string> groups;
  std::vector<GroupAssociation> group_associations;
  // Binary categories only: per-cell association gap between the two groups.
  std::vector<CellGap> context_gaps;
  std::optional<double> lpbs_mean;     // signed mean gap
  std::optional<double> mean_abs_gap;
  std::optional<double> r_term;        // regularizer over the conditional cells
  double cbs = 0.0;
  std::size_t template_count = 0;
  std::size_t cell_count = 0;
  std::size_t probe_count = 0;
  std::size_t record_count = 0;
  std::size_t clamp_warnings = 0;
};

struct ScoreOptions {
  double lambda = 1.0;
  std::vector<Category> categories;  // empty selects every category present
};

namespace detail {

using RecordKey = std::tuple<std::string, Condition, std::string>;

struct RecordIndex {
  std::map<RecordKey, const ProbabilityRecord*> by_key;
};

inline bool Selected(const ScoreOptions& options, Category c) {
  return options.categories.empty() ||
         std::find(options.categories.begin(), options.categories.end(), c) !=
             options.categories.end();
}

// Rejects records that do not belong to the probe set and reports every
// selected probe lacking a record for one of its candidates.
inline RecordIndex IndexRecords(const std::vector<ProbeInstance>& probes,
                                const std::vector<ProbabilityRecord>& records,
                                const ScoreOptions& options) {
  std::map<std::string, const ProbeInstance*> probe_by_id;
  for (const auto& p : probes) {
    if (!probe_by_id.emplace(p.probe_id, &p).second) {
      throw InputError("duplicate probe_id '" + p.probe_id + "' in probe set");
    }
  }

  RecordIndex index;
  std::vector<std::string> inconsistent;
  std::vector<std::string> problems;
  for (const auto& r : records) {
    auto it = probe_by_id.find(r.probe_id);
    std::string problem;
    if (it == probe_by_id.end()) {
      problem = "unknown probe_id";
    } else if (it->second->condition != r.condition) {
      problem = "condition does not match the probe";
    } else if (std::find(it->second->candidate_words.begin(), it->second->candidate_words.end(),
                         r.candidate) == it->second->candidate_words.end()) {
      problem = "candidate '" + r.candidate + "' is not a candidate of the probe";
    } else if (!index.by_key.emplace(RecordKey{r.probe_id, r.condition, r.candidate}, &r).second) {
      problem = "duplicate record for candidate '" + r.candidate + "'";
    }
    if (!problem.empty()) {
      inconsistent.push_back(r.probe_id);
      problems.push_back(r.probe_id + ": " + problem);
    }
  }
  if (!inconsistent.empty()) {
    std::string message = "records inconsistent with the probe set:";
    for (const auto& p : problems) message += "\n  " + p;
    throw CoverageError(message, inconsistent);
  }

  std::vector<std::string> missing;
  for (const auto& p : probes) {
    if (!Selected(options, p.category)) continue;
    for (const auto& c : p.candidate_words) {
      if (!index.by_key.count(RecordKey{p.probe_id, p.condition, c})) {
        missing.push_back(p.probe_id);
        break;
      }
    }
  }
  if (!missing.empty()) {
    std::string message = "missing records for " + std::to_string(missing.size()) + " probe(s):";
    for (const auto& id : missing) message += "\n  " + id;
    throw CoverageError(message, missing);
  }
  return index;
}

struct ClampedLookup {
  const RecordIndex& index;
  std::size_t clamp_warnings = 0;
  std::size_t records_used = 0;
  std::set<std::string> model_ids;

  double WordLogprobFor(const std::string& probe_id, Condition condition, const std::string& candidate) {
    const ProbabilityRecord* r = index.by_key.at(RecordKey{probe_id, condition, candidate});
    ProbabilityRecord copy = *r;
    clamp_warnings += ClampRecord(copy);
    ++records_used;
    model_ids.insert(copy.model_id);
    return WordLogprob(copy);
  }
};

}  // namespace detail

// Scores one category. `probes` must contain only probes of that category;
// templates are visited in order of first appearance, contexts in probe order.
inline BiasReport ScoreCategory(Category category, const std::vector<const ProbeInstance*>& probes,
                                const detail::RecordIndex& index, double lambda) {
  BiasReport report;
  report.category = category;
  report.probe_count = probes.size();

  std::vector<std::string> template_order;
  std::map<std::string, const ProbeInstance*> prior_of;
  std::map<std::string, std::vector<const ProbeInstance*>> conditional_of;
  for (const auto* p : probes) {
    if (!conditional_of.count(p->template_id)) {
      template_order.push_back(p->template_id);
      conditional_of[p->template_id];
    }
    if (p->condition == Condition::kPrior) {
      if (!prior_of.emplace(p->template_id, p).second) {
        throw InputError("template '" + p->template_id + "' has more than one prior probe");
      }
    } else {
      conditional_of[p->template_id].push_back(p);
    }
  }
  report.template_count = template_order.size();

  detail::ClampedLookup lookup{index, 0, 0, {}};
  std::vector<CbsCell> cbs_cells;
  std::vector<BinaryCell> binary_cells;
  bool binary = true;
  std::vector<std::string> binary_pair;
  std::map<std::string, std::pair<double, std::size_t>> association_sums;

  for (const auto& template_id : template_order) {
    auto prior_it = prior_of.find(template_id);
    if (prior_it == prior_of.end()) {
      throw InputError("template '" + template_id + "' has no prior probe");
    }
    const ProbeInstance& prior = *prior_it->second;
    const auto& candidates = prior.candidate_words;
    if (candidates.size() < 2) {
      throw InputError("template '" + template_id + "' has fewer than two candidates");
    }
    for (const auto& c : candidates) {
      if (std::find(report.groups.begin(), report.groups.end(), c) == report.groups.end()) {
        report.groups.push_back(c);
      }
    }
    if (candidates.size() != 2 || (!binary_pair.empty() && binary_pair != candidates)) binary = false;
    if (binary_pair.empty()) binary_pair = candidates;

    std::vector<double> prior_lp;
    prior_lp.reserve(candidates.size());
    for (const auto& c : candidates) {
      prior_lp.push_back(lookup.WordLogprobFor(prior.probe_id, Condition::kPrior, c));
    }

    for (const auto* cond : conditional_of[template_id]) {
      if (cond->candidate_words != candidates) {
        throw InputError("probe '" + cond->probe_id + "' has a candidate list differing from its prior");
      }
      CbsCell cell{{}, prior_lp};
      cell.conditional.reserve(candidates.size());
      for (std::size_t a = 0; a < candidates.size(); ++a) {
        const double lp = lookup.WordLogprobFor(cond->probe_id, Condition::kConditional, candidates[a]);
        cell.conditional.push_back(lp);
        auto& [sum, n] = association_sums[candidates[a]];
        sum += LpbsAssociation(lp, prior_lp[a]);
        ++n;
      }
      if (candidates.size() == 2) {
        binary_cells.push_back({template_id, cond->context_term.value_or(""),
                                {cell.conditional[0], cell.conditional[1]},
                                {prior_lp[0], prior_lp[1]}});
      }
      cbs_cells.push_back(std::move(cell));
    }
  }

  if (cbs_cells.empty()) throw InputError("category has no conditional probes");
  report.cell_count = cbs_cells.size();
  report.cbs = Cbs(cbs_cells);
  for (const auto& g : report.groups) {
    const auto& [sum, n] = association_sums[g];
    report.group_associations.push_back({g, n ? sum / static_cast<double>(n) : 0.0});
  }
  if (binary) {
    auto lpbs = LpbsReport(binary_cells);
    report.lpbs_mean = lpbs.mean_gap;
    report.mean_abs_gap = lpbs.mean_abs_gap;
    report.context_gaps = std::move(lpbs.cells);
    std::vector<double> lp_i, lp_j;
    for (const auto& c : binary_cells) {
      lp_i.push_back(c.conditional[0]);
      lp_j.push_back(c.conditional[1]);
    }
    report.r_term = RegularizerRFromLogprobs(lambda, lp_i, lp_j);
  }
  if (lookup.model_ids.size() > 1) {
    std::string ids;
    for (const auto& id : lookup.model_ids) ids += (ids.empty() ? "" : ", ") + id;
    throw CoverageError("records for category '" + std::string(ToString(category)) +
                            "' mix model_ids: " + ids,
                        {});
  }
  report.model_id = lookup.model_ids.empty() ? "" : *lookup.model_ids.begin();
  report.record_count = lookup.records_used;
  report.clamp_warnings = lookup.clamp_warnings;
  return report;
}

// One report per selected category, in the fixed order ethnicity, gender,
// race, custom.
inline std::vector<BiasReport> ScoreRecords(const std::vector<ProbeInstance>& probes,
                                            const std::vector<ProbabilityRecord>& records,
                                            const ScoreOptions& options = {}) {
  const auto index = detail::IndexRecords(probes, records, options);
  std::vector<BiasReport> reports;
  for (auto category : {Category::kEthnicity, Category::kGender, Category::kRace, Category::kCustom}) {
    if (!detail::Selected(options, category)) continue;
    std::vector<const ProbeInstance*> subset;
    for (const auto& p : probes) {
      if (p.category == category) subset.push_back(&p);
    }
    if (subset.empty()) continue;
    reports.push_back(ScoreCategory(category, subset, index, options.lambda));
  }
  return reports;
}

// --- before/after comparison ------------------------------------------------------

struct ComparisonRow {
  Category category = Category::kCustom;
  std::string metric;
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;  // after - before
};

inline std::vector<ComparisonRow> Compare(const std::vector<BiasReport>& before,
                                          const std::vector<BiasReport>& after) {
  std::vector<ComparisonRow> rows;
  for (const auto& b : before) {
    auto it = std::find_if(after.begin(), after.end(),
                           [&](const BiasReport& a) { return a.category == b.category; });
    if (it == after.end()) {
      throw CoverageError("comparison records lack category '" + std::string(ToString(b.category)) + "'", {});
    }
    auto add = [&](const char* metric, std::optional<double> x, std::optional<double> y) {
      if (x && y) rows.push_back({b.category, metric, *x, *y, *y - *x});
    };
    add("lpbs_mean", b.lpbs_mean, it->lpbs_mean);
    add("mean_abs_gap", b.mean_abs_gap, it->mean_abs_gap);
    add("r_term", b.r_term, it->r_term);
    add("cbs", b.cbs, it->cbs);
  }
  return rows;
}

}  // namespace lmbias

#endif  // LMBIAS_SCORING_HPP
