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

// probes.jsonl reading and writing, plus the JSON probe-set definition format
// accepted by `lmbias expand --templates`.

#ifndef LMBIAS_PROBE_IO_HPP
#define LMBIAS_PROBE_IO_HPP

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lmbias/error.hpp"
#include "lmbias/jsonl.hpp"
#include "lmbias/presets.hpp"
#include "lmbias/probe.hpp"

namespace lmbias {

inline nlohmann::ordered_json ToJson(const ProbeInstance& p) {
  nlohmann::ordered_json j;
  j["probe_id"] = p.probe_id;
  j["template_id"] = p.template_id;
  j["category"] = ToString(p.category);
  j["condition"] = ToString(p.condition);
  if (p.context_term) {
    j["context_term"] = *p.context_term;
  } else {
    j["context_term"] = nullptr;
  }
  j["rendered_text"] = p.rendered_text;
  j["candidate_words"] = p.candidate_words;
  return j;
}

inline std::string SerializeProbes(const std::vector<ProbeInstance>& probes) {
  std::string out;
  for (const auto& p : probes) {
    out += ToJson(p).dump();
    out += '\n';
  }
  return out;
}

// Throws std::invalid_argument with a field-level message.
inline ProbeInstance ProbeFromJson(const nlohmann::json& j) {
  using jsonl::RequireString;
  ProbeInstance p;
  p.probe_id = RequireString(j, "probe_id");
  p.template_id = RequireString(j, "template_id");
  const auto category = RequireString(j, "category");
  auto c = ParseCategory(category);
  if (!c) throw std::invalid_argument("unknown category '" + category + "'");
  p.category = *c;
  const auto condition = RequireString(j, "condition");
  auto cond = ParseCondition(condition);
  if (!cond) throw std::invalid_argument("unknown condition '" + condition + "'");
  p.condition = *cond;
  if (!j.contains("context_term")) throw std::invalid_argument("missing field 'context_term'");
  const auto& ctx = j.at("context_term");
  if (ctx.is_string()) {
    p.context_term = ctx.get<std::string>();
  } else if (!ctx.is_null()) {
    throw std::invalid_argument("field 'context_term' must be a string or null");
  }
  p.rendered_text = RequireString(j, "rendered_text");
  p.candidate_words = jsonl::RequireStringArray(j, "candidate_words");
  if (auto problem = CheckInstance(p)) throw std::invalid_argument(*problem);
  return p;
}

// Parses a whole probes.jsonl document. Any bad line rejects the file; all
// diagnostics are collected into the thrown ParseError.
inline std::vector<ProbeInstance> ParseProbes(std::string_view content) {
  std::vector<ProbeInstance> probes;
  std::vector<ParseError::Diagnostic> diagnostics;
  std::set<std::string> ids;
  jsonl::ForEachObject(content, diagnostics, [&](std::size_t line, const nlohmann::json& j) {
    auto p = ProbeFromJson(j);
    if (!ids.insert(p.probe_id).second) {
      throw std::invalid_argument("duplicate probe_id '" + p.probe_id + "'");
    }
    probes.push_back(std::move(p));
    (void)line;
  });
  if (!diagnostics.empty()) throw ParseError(std::move(diagnostics));
  return probes;
}

// --- probe-set definitions ----------------------------------------------------

inline WordSet WordSetFromJson(const nlohmann::json& j, WordRole role, std::string_view what) {
  if (!j.is_object()) throw InputError("'" + std::string(what) + "' must be an object");
  WordSet set;
  set.role = role;
  try {
    set.set_id = j.contains("set_id") ? jsonl::RequireString(j, "set_id") : std::string(what);
    set.words = jsonl::RequireStringArray(j, "words");
    if (j.contains("synonym_groups")) {
      const auto& groups = j.at("synonym_groups");
      if (!groups.is_object()) throw std::invalid_argument("'synonym_groups' must be an object");
      for (const auto& [canonical, variants] : groups.items()) {
        if (!variants.is_array()) throw std::invalid_argument("synonym variants must be an array");
        auto& out = set.synonym_groups[canonical];
        for (const auto& v : variants) {
          if (!v.is_string()) throw std::invalid_argument("synonym variants must be strings");
          out.push_back(v.get<std::string>());
        }
      }
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
  return set;
}

inline ProbeSet ProbeSetFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("probe-set definition must be a JSON object");
  ProbeSet set;
  set.name = j.value("name", std::string("custom"));
  if (!j.contains("templates") || !j.at("templates").is_array()) {
    throw InputError("probe-set definition needs a 'templates' array");
  }
  for (const auto& t : j.at("templates")) {
    ProbeTemplate tmpl;
    try {
      tmpl.template_id = jsonl::RequireString(t, "template_id");
      tmpl.text = jsonl::RequireString(t, "text");
      const auto category = t.value("category", std::string("custom"));
      auto c = ParseCategory(category);
      if (!c) throw std::invalid_argument("unknown category '" + category + "'");
      tmpl.category = *c;
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("templates: ") + e.what());
    }
    set.templates.push_back(std::move(tmpl));
  }
  if (!j.contains("groups")) throw InputError("probe-set definition needs 'groups'");
  if (!j.contains("contexts")) throw InputError("probe-set definition needs 'contexts'");
  set.groups = WordSetFromJson(j.at("groups"), WordRole::kGroup, "groups");
  set.contexts = WordSetFromJson(j.at("contexts"), WordRole::kContext, "contexts");
  return set;
}

}  // namespace lmbias

#endif  // LMBIAS_PROBE_IO_HPP
