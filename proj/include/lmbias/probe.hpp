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

// Probe templates, word sets and their expansion into the sentences a masked
// language model has to score.
//
// A template holds one GROUP_SLOT (the masked position whose candidates are the
// group words) and one CONTEXT_SLOT (filled with a context word such as an
// occupation). Each template expands into one conditional probe per context
// word plus one prior probe in which the context slot is masked as well.

#ifndef LMBIAS_PROBE_HPP
#define LMBIAS_PROBE_HPP

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lmbias/error.hpp"

namespace lmbias {

inline constexpr std::string_view kGroupSlot = "GROUP_SLOT";
inline constexpr std::string_view kContextSlot = "CONTEXT_SLOT";
inline constexpr std::string_view kMaskToken = "[MASK]";

enum class Category { kEthnicity, kGender, kRace, kCustom };
enum class Condition { kConditional, kPrior };

inline std::string_view ToString(Category c) {
  switch (c) {
    case Category::kEthnicity: return "ethnicity";
    case Category::kGender: return "gender";
    case Category::kRace: return "race";
    case Category::kCustom: return "custom";
  }
  return "custom";
}

inline std::optional<Category> ParseCategory(std::string_view s) {
  if (s == "ethnicity") return Category::kEthnicity;
  if (s == "gender") return Category::kGender;
  if (s == "race") return Category::kRace;
  if (s == "custom") return Category::kCustom;
  return std::nullopt;
}

inline std::string_view ToString(Condition c) {
  return c == Condition::kConditional ? "conditional" : "prior";
}

inline std::optional<Condition> ParseCondition(std::string_view s) {
  if (s == "conditional") return Condition::kConditional;
  if (s == "prior") return Condition::kPrior;
  return std::nullopt;
}

struct ProbeTemplate {
  std::string template_id;
  Category category = Category::kCustom;
  std::string text;

  friend bool operator==(const ProbeTemplate&, const ProbeTemplate&) = default;
};

enum class WordRole { kGroup, kContext };

struct WordSet {
  std::string set_id;
  WordRole role = WordRole::kGroup;
  std::vector<std::string> words;
  // Optional spelling variants per canonical word; carried for the balancer,
  // ignored by expansion.
  std::map<std::string, std::vector<std::string>> synonym_groups;
};

struct ProbeInstance {
  std::string probe_id;
  std::string template_id;
  Category category = Category::kCustom;
  Condition condition = Condition::kConditional;
  std::optional<std::string> context_term;  // nullopt for prior probes
  std::string rendered_text;
  std::vector<std::string> candidate_words;

  friend bool operator==(const ProbeInstance&, const ProbeInstance&) = default;
};

// --- validation -------------------------------------------------------------

struct TemplateViolation {
  enum class Kind { kEmptyText, kMissingGroupSlot, kMissingContextSlot, kDuplicateGroupSlot,
                    kDuplicateContextSlot, kContainsMaskToken };
  Kind kind;
  std::size_t position;  // byte offset of the offending marker; 0 when absent
  std::string message;
};

struct TemplateValidation {
  std::vector<TemplateViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

namespace detail {

inline std::vector<std::size_t> FindAll(std::string_view haystack, std::string_view needle) {
  std::vector<std::size_t> hits;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    hits.push_back(pos);
  }
  return hits;
}

inline std::size_t CountOccurrences(std::string_view haystack, std::string_view needle) {
  return FindAll(haystack, needle).size();
}

inline void ReplaceFirst(std::string& s, std::string_view from, std::string_view to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
}

}  // namespace detail

inline TemplateValidation ValidateTemplate(const ProbeTemplate& t) {
  using Kind = TemplateViolation::Kind;
  TemplateValidation result;
  if (t.text.empty()) {
    result.violations.push_back({Kind::kEmptyText, 0, "template text is empty"});
    return result;
  }
  auto check_slot = [&](std::string_view slot, Kind missing, Kind duplicate) {
    const auto hits = detail::FindAll(t.text, slot);
    if (hits.empty()) {
      result.violations.push_back({missing, 0, "no " + std::string(slot) + " marker"});
    }
    for (std::size_t i = 1; i < hits.size(); ++i) {
      result.violations.push_back({duplicate, hits[i],
                                   "duplicate " + std::string(slot) + " marker at byte " +
                                       std::to_string(hits[i])});
    }
  };
  check_slot(kGroupSlot, Kind::kMissingGroupSlot, Kind::kDuplicateGroupSlot);
  check_slot(kContextSlot, Kind::kMissingContextSlot, Kind::kDuplicateContextSlot);
  for (auto pos : detail::FindAll(t.text, kMaskToken)) {
    result.violations.push_back({Kind::kContainsMaskToken, pos,
                                 "literal mask token at byte " + std::to_string(pos)});
  }
  return result;
}

// --- expansion --------------------------------------------------------------

inline std::string ConditionalProbeId(std::string_view template_id, std::size_t context_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#c%03zu", context_index);
  return std::string(template_id) + buf;
}

inline std::string PriorProbeId(std::string_view template_id) {
  return std::string(template_id) + "#prior";
}

namespace detail {

inline void CheckWordSet(const WordSet& set, WordRole expected, std::string_view what) {
  if (set.role != expected) {
    throw InputError("word set '" + set.set_id + "' has the wrong role for " + std::string(what));
  }
  if (set.words.empty()) throw InputError("word set '" + set.set_id + "' is empty");
  std::set<std::string_view> seen;
  for (const auto& w : set.words) {
    if (w.empty()) throw InputError("word set '" + set.set_id + "' contains an empty word");
    if (!seen.insert(w).second) {
      throw InputError("word set '" + set.set_id + "' contains duplicate word '" + w + "'");
    }
    if (w.find(kGroupSlot) != std::string::npos || w.find(kContextSlot) != std::string::npos ||
        w.find(kMaskToken) != std::string::npos) {
      throw InputError("word '" + w + "' in set '" + set.set_id + "' contains a slot marker");
    }
  }
}

}  // namespace detail

// Emits, per template in order, the conditional probes in context order
// followed by the template's prior probe.
inline std::vector<ProbeInstance> ExpandProbes(const std::vector<ProbeTemplate>& templates,
                                               const WordSet& groups, const WordSet& contexts) {
  if (templates.empty()) throw InputError("template list is empty");
  detail::CheckWordSet(groups, WordRole::kGroup, "GROUP_SLOT");
  detail::CheckWordSet(contexts, WordRole::kContext, "CONTEXT_SLOT");

  std::set<std::string_view> ids;
  for (const auto& t : templates) {
    if (t.template_id.empty()) throw InputError("template with empty template_id");
    if (!ids.insert(t.template_id).second) {
      throw InputError("duplicate template_id '" + t.template_id + "'");
    }
    const auto v = ValidateTemplate(t);
    if (!v.ok()) {
      throw InputError("template '" + t.template_id + "': " + v.violations.front().message);
    }
  }

  std::vector<ProbeInstance> out;
  out.reserve(templates.size() * (contexts.words.size() + 1));
  for (const auto& t : templates) {
    std::string masked = t.text;
    detail::ReplaceFirst(masked, kGroupSlot, kMaskToken);
    for (std::size_t i = 0; i < contexts.words.size(); ++i) {
      std::string rendered = masked;
      detail::ReplaceFirst(rendered, kContextSlot, contexts.words[i]);
      out.push_back({ConditionalProbeId(t.template_id, i), t.template_id, t.category,
                     Condition::kConditional, contexts.words[i], std::move(rendered),
                     groups.words});
    }
    std::string prior = masked;
    detail::ReplaceFirst(prior, kContextSlot, kMaskToken);
    out.push_back({PriorProbeId(t.template_id), t.template_id, t.category, Condition::kPrior,
                   std::nullopt, std::move(prior), groups.words});
  }
  return out;
}

// Checks the per-instance invariants: prior iff no context term, and the
// number of mask tokens matching the condition.
inline std::optional<std::string> CheckInstance(const ProbeInstance& p) {
  if (p.probe_id.empty()) return "empty probe_id";
  if (p.template_id.empty()) return "empty template_id";
  if (p.candidate_words.empty()) return "empty candidate_words";
  const bool prior = p.condition == Condition::kPrior;
  if (prior == p.context_term.has_value()) {
    return prior ? "prior probe carries a context_term" : "conditional probe lacks a context_term";
  }
  const auto masks = detail::CountOccurrences(p.rendered_text, kMaskToken);
  const std::size_t expected = prior ? 2 : 1;
  if (masks != expected) {
    return "rendered_text has " + std::to_string(masks) + " mask tokens, expected " +
           std::to_string(expected);
  }
  return std::nullopt;
}

}  // namespace lmbias

#endif  // LMBIAS_PROBE_HPP
