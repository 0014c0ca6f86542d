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

#ifndef LMBIAS_TFIDF_HPP
#define LMBIAS_TFIDF_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmbias/corpus.hpp"
#include "lmbias/error.hpp"

namespace lmbias {

struct TermScore {
  std::string term;
  double score = 0.0;
  std::size_t frequency = 0;  // occurrences in the corpus
  std::size_t document_frequency = 0;
};

// Corpus-level tf-idf: (occurrences of t / total tokens) * ln(N_docs / df(t)).
// Sorted by descending score, ties broken by byte-wise term order. `top_k`
// larger than the vocabulary returns the whole vocabulary.
inline std::vector<TermScore> TfidfRank(const Corpus& corpus, std::size_t top_k) {
  if (top_k == 0) throw InputError("top_k must be positive");
  if (corpus.empty()) throw InputError("tf-idf needs a non-empty corpus");

  struct Counts {
    std::size_t frequency = 0;
    std::size_t document_frequency = 0;
    std::size_t last_doc = static_cast<std::size_t>(-1);
  };
  std::unordered_map<std::string, Counts> counts;
  std::size_t total = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& t : corpus[d].tokens) {
      auto& c = counts[t.text];
      ++c.frequency;
      if (c.last_doc != d) {
        ++c.document_frequency;
        c.last_doc = d;
      }
      ++total;
    }
  }

  std::vector<TermScore> ranked;
  ranked.reserve(counts.size());
  const double docs = static_cast<double>(corpus.size());
  for (const auto& [term, c] : counts) {
    const double tf = static_cast<double>(c.frequency) / static_cast<double>(total);
    const double idf = c.document_frequency == corpus.size()
                           ? 0.0
                           : std::log(docs / static_cast<double>(c.document_frequency));
    ranked.push_back({term, tf * idf, c.frequency, c.document_frequency});
  }
  std::sort(ranked.begin(), ranked.end(), [](const TermScore& a, const TermScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  return ranked;
}

}  // namespace lmbias

#endif  // LMBIAS_TFIDF_HPP
