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

// probs.jsonl: one ProbabilityRecord per line, as emitted by a model backend.

#ifndef LMBIAS_RECORDS_IO_HPP
#define LMBIAS_RECORDS_IO_HPP

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lmbias/error.hpp"
#include "lmbias/jsonl.hpp"
#include "lmbias/metrics.hpp"

namespace lmbias {

inline nlohmann::ordered_json ToJson(const ProbabilityRecord& r) {
  nlohmann::ordered_json j;
  j["probe_id"] = r.probe_id;
  j["condition"] = ToString(r.condition);
  j["candidate"] = r.candidate;
  auto& lps = j["token_logprobs"] = nlohmann::ordered_json::array();
  for (double lp : r.token_logprobs) {
    if (std::isinf(lp) && lp < 0) {
      lps.push_back(nullptr);
    } else {
      lps.push_back(lp);
    }
  }
  j["model_id"] = r.model_id;
  return j;
}

inline std::string SerializeRecords(const std::vector<ProbabilityRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += ToJson(r).dump();
    out += '\n';
  }
  return out;
}

// A null entry in token_logprobs stands for log(0) and is kept as -infinity;
// clamping happens at scoring time.
inline ProbabilityRecord RecordFromJson(const nlohmann::json& j) {
  ProbabilityRecord r;
  r.probe_id = jsonl::RequireString(j, "probe_id");
  const auto condition = jsonl::RequireString(j, "condition");
  auto cond = ParseCondition(condition);
  if (!cond) throw std::invalid_argument("unknown condition '" + condition + "'");
  r.condition = *cond;
  r.candidate = jsonl::RequireString(j, "candidate");
  if (!j.contains("token_logprobs") || !j.at("token_logprobs").is_array()) {
    throw std::invalid_argument("field 'token_logprobs' must be an array");
  }
  for (const auto& v : j.at("token_logprobs")) {
    if (v.is_null()) {
      r.token_logprobs.push_back(-std::numeric_limits<double>::infinity());
    } else if (v.is_number()) {
      r.token_logprobs.push_back(v.get<double>());
    } else {
      throw std::invalid_argument("token_logprobs entries must be numbers");
    }
  }
  if (r.token_logprobs.empty()) throw std::invalid_argument("token_logprobs is empty");
  r.model_id = jsonl::RequireString(j, "model_id");
  return r;
}

inline std::vector<ProbabilityRecord> ParseRecords(std::string_view content) {
  std::vector<ProbabilityRecord> records;
  std::vector<ParseError::Diagnostic> diagnostics;
  jsonl::ForEachObject(content, diagnostics, [&](std::size_t, const nlohmann::json& j) {
    records.push_back(RecordFromJson(j));
  });
  if (!diagnostics.empty()) throw ParseError(std::move(diagnostics));
  return records;
}

}  // namespace lmbias

#endif  // LMBIAS_RECORDS_IO_HPP
