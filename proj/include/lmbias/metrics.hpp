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

// Numeric core of the bias audit.
//
// Every logarithm is natural. Probabilities coming from a model are handled in
// log space; a probability below kProbabilityFloor is raised to the floor
// before any log is taken, and the number of such clamps is reported.
//
// Terminology: "group" words fill the masked slot (countries, genders, races);
// "context" words fill the open template slot (social positions). A cell is
// one (template, context) pair.

#ifndef LMBIAS_METRICS_HPP
#define LMBIAS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lmbias/error.hpp"
#include "lmbias/probe.hpp"

namespace lmbias {

inline constexpr double kProbabilityFloor = 1e-12;
inline const double kLogProbabilityFloor = std::log(kProbabilityFloor);

// --- softmax and MLM loss ------------------------------------------------------

namespace detail {

inline void CheckLogits(std::span<const double> z) {
  if (z.empty()) throw InputError("logits vector is empty");
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) throw InputError("logit " + std::to_string(i) + " is not finite");
  }
}

}  // namespace detail

inline double LogSumExp(std::span<const double> values) {
  if (values.empty()) throw InputError("log-sum-exp of an empty vector");
  const double max = *std::max_element(values.begin(), values.end());
  if (std::isinf(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

// Max-shifted softmax over a finite logits vector.
inline std::vector<double> Softmax(std::span<const double> logits) {
  detail::CheckLogits(logits);
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

inline std::vector<double> LogSoftmax(std::span<const double> logits) {
  detail::CheckLogits(logits);
  const double lse = LogSumExp(logits);
  std::vector<double> out(logits.size());
  std::transform(logits.begin(), logits.end(), out.begin(), [lse](double z) { return z - lse; });
  return out;
}

struct MaskedSentence {
  std::vector<std::string> tokens;  // original words; the gold word at each masked position
  std::vector<bool> mask;

  std::size_t MaskedCount() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  }
};

struct MlmLoss {
  double total = 0.0;      // negative summed log-probability over masked positions
  double per_token = 0.0;  // total / masked_tokens
  std::size_t masked_tokens = 0;
};

// `gold_logprobs[s]` holds, in position order, the model's natural-log
// probability of the gold word at each masked position of sentence s.
inline MlmLoss ComputeMlmLoss(std::span<const MaskedSentence> sentences,
                              std::span<const std::vector<double>> gold_logprobs) {
  if (sentences.size() != gold_logprobs.size()) {
    throw InputError("got predictions for " + std::to_string(gold_logprobs.size()) +
                     " sentences, expected " + std::to_string(sentences.size()));
  }
  MlmLoss loss;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& sentence = sentences[s];
    if (sentence.tokens.size() != sentence.mask.size()) {
      throw InputError("sentence " + std::to_string(s) + ": tokens and mask differ in length");
    }
    const auto masked = sentence.MaskedCount();
    if (gold_logprobs[s].size() != masked) {
      throw InputError("sentence " + std::to_string(s) + ": " + std::to_string(masked) +
                       " masked positions but " + std::to_string(gold_logprobs[s].size()) +
                       " predictions");
    }
    for (double lp : gold_logprobs[s]) {
      if (std::isnan(lp) || lp > 0.0) {
        throw InputError("sentence " + std::to_string(s) + ": invalid log-probability");
      }
      loss.total -= std::max(lp, kLogProbabilityFloor);
    }
    loss.masked_tokens += masked;
  }
  if (loss.masked_tokens == 0) throw InputError("no masked positions");
  loss.per_token = loss.total / static_cast<double>(loss.masked_tokens);
  return loss;
}

// --- probability records ------------------------------------------------------

struct ProbabilityRecord {
  std::string probe_id;
  Condition condition = Condition::kConditional;
  std::string candidate;
  std::vector<double> token_logprobs;  // one natural-log probability per sub-token
  std::string model_id;

  friend bool operator==(const ProbabilityRecord&, const ProbabilityRecord&) = default;
};

// Brings every token log-probability into [ln 1e-12, 0]. Returns the number of
// entries changed. NaN and empty token lists are errors.
inline std::size_t ClampRecord(ProbabilityRecord& record) {
  if (record.token_logprobs.empty()) {
    throw InputError("record for '" + record.probe_id + "' has no token_logprobs");
  }
  std::size_t clamped = 0;
  for (auto& lp : record.token_logprobs) {
    if (std::isnan(lp)) throw InputError("record for '" + record.probe_id + "' holds NaN");
    if (lp > 0.0) {
      lp = 0.0;
      ++clamped;
    } else if (lp < kLogProbabilityFloor) {
      lp = kLogProbabilityFloor;
      ++clamped;
    }
  }
  return clamped;
}

// Complete-word log-probability: the log of the product of the sub-token
// probabilities.
inline double WordLogprob(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) throw InputError("word log-probability of an empty token list");
  return std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0);
}

inline double WordLogprob(const ProbabilityRecord& record) {
  return WordLogprob(record.token_logprobs);
}

// --- LPBS -------------------------------------------------------------------------

// log P(group | context) - log P(group | context masked). Positive values mean
// the model associates the group with the context.
inline double LpbsAssociation(double conditional_logprob, double prior_logprob) {
  return conditional_logprob - prior_logprob;
}

inline double LpbsAssociation(const ProbabilityRecord& conditional, const ProbabilityRecord& prior) {
  if (conditional.candidate != prior.candidate) {
    throw InputError("candidate mismatch: '" + conditional.candidate + "' vs '" + prior.candidate + "'");
  }
  return LpbsAssociation(WordLogprob(conditional), WordLogprob(prior));
}

// Word log-probabilities of the two groups in one cell.
struct BinaryCell {
  std::string template_id;
  std::string context;
  double conditional[2];
  double prior[2];
};

struct CellGap {
  std::string template_id;
  std::string context;
  double association[2];
  double gap;  // association[0] - association[1]
};

struct LpbsSummary {
  std::vector<CellGap> cells;
  double group_mean_association[2] = {0.0, 0.0};
  double mean_gap = 0.0;
  double mean_abs_gap = 0.0;
};

inline LpbsSummary LpbsReport(std::span<const BinaryCell> cells) {
  if (cells.empty()) throw InputError("LPBS needs at least one cell");
  LpbsSummary summary;
  summary.cells.reserve(cells.size());
  for (const auto& c : cells) {
    CellGap g{c.template_id, c.context,
              {LpbsAssociation(c.conditional[0], c.prior[0]),
               LpbsAssociation(c.conditional[1], c.prior[1])},
              0.0};
    g.gap = g.association[0] - g.association[1];
    summary.group_mean_association[0] += g.association[0];
    summary.group_mean_association[1] += g.association[1];
    summary.mean_gap += g.gap;
    summary.mean_abs_gap += std::abs(g.gap);
    summary.cells.push_back(std::move(g));
  }
  const auto n = static_cast<double>(cells.size());
  summary.group_mean_association[0] /= n;
  summary.group_mean_association[1] /= n;
  summary.mean_gap /= n;
  summary.mean_abs_gap /= n;
  return summary;
}

// --- CBS --------------------------------------------------------------------------

// Word log-probabilities of every candidate in one cell, aligned by candidate.
struct CbsCell {
  std::vector<double> conditional;
  std::vector<double> prior;
};

// Renormalizes word probabilities over the candidate set.
inline std::vector<double> NormalizeOverCandidates(std::span<const double> word_logprobs) {
  const double lse = LogSumExp(word_logprobs);
  std::vector<double> out(word_logprobs.size());
  std::transform(word_logprobs.begin(), word_logprobs.end(), out.begin(),
                 [lse](double lp) { return std::exp(lp - lse); });
  return out;
}

// (1/|A|) * sum_a | p_cond(a)/|A| - p_prior(a)/|A| | over normalized
// probabilities of the |A| candidates.
inline double CbsCellScore(const CbsCell& cell) {
  const auto n = cell.conditional.size();
  if (n < 2) throw InputError("CBS needs at least two candidates");
  if (cell.prior.size() != n) throw InputError("CBS cell: conditional and prior sizes differ");
  const auto cond = NormalizeOverCandidates(cell.conditional);
  const auto prior = NormalizeOverCandidates(cell.prior);
  const double size = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) sum += std::abs(cond[a] / size - prior[a] / size);
  return sum / size;
}

// Mean cell score over all (template, context) cells.
inline double Cbs(std::span<const CbsCell> cells) {
  if (cells.empty()) throw InputError("CBS needs at least one cell");
  double sum = 0.0;
  for (const auto& c : cells) sum += CbsCellScore(c);
  return sum / static_cast<double>(cells.size());
}

// --- debiasing regularizer ------------------------------------------------------

struct RegularizerPair {
  std::string word_i;
  std::string word_j;
  double p_i = 1.0;
  double p_j = 1.0;
};

struct RegularizerConfig {
  double lambda = 0.0;
  std::vector<RegularizerPair> pairs;  // one per target set
};

// R = lambda * (1/A) * sum_a |ln(P(k_i^a) / P(k_j^a))|.
inline double RegularizerR(const RegularizerConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw InputError("lambda must be a finite non-negative number");
  }
  if (cfg.pairs.empty()) throw InputError("regularizer needs at least one pair");
  auto checked_log = [](double p) {
    if (!(p > 0.0) || p > 1.0) {
      throw InputError("pair probability " + std::to_string(p) + " is outside (0, 1]");
    }
    return std::log(std::max(p, kProbabilityFloor));
  };
  double sum = 0.0;
  for (const auto& pair : cfg.pairs) sum += std::abs(checked_log(pair.p_i) - checked_log(pair.p_j));
  return cfg.lambda * sum / static_cast<double>(cfg.pairs.size());
}

// Same term from word log-probabilities, as produced by scoring. Entries are
// expected to be clamped already.
inline double RegularizerRFromLogprobs(double lambda, std::span<const double> logprob_i,
                                       std::span<const double> logprob_j) {
  if (logprob_i.size() != logprob_j.size() || logprob_i.empty()) {
    throw InputError("regularizer needs equally sized, non-empty pair lists");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InputError("lambda must be a finite non-negative number");
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < logprob_i.size(); ++a) sum += std::abs(logprob_i[a] - logprob_j[a]);
  return lambda * sum / static_cast<double>(logprob_i.size());
}

}  // namespace lmbias

#endif  // LMBIAS_METRICS_HPP
