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

// Corpus data balancing.
//
// Three passes run in this order:
//   1. canonicalize  - spelling variants of a group word become the canonical
//                      word ("female" -> "woman").
//   2. substitute    - inside every sentence holding an anchor word ("black"),
//                      words from the harmful lexicon are replaced through the
//                      substitution map.
//   3. equalize      - for each configured word pair the occurrence counts are
//                      moved to round((a + b) / 2): sentences holding the
//                      over-represented word are dropped, sentences holding
//                      the under-represented word are duplicated as new
//                      documents.
//
// Every change is an Edit on a document's `concat` bytes. Replaying the edit
// ledger on the input corpus reproduces the output corpus exactly.

#ifndef LMBIAS_BALANCE_HPP
#define LMBIAS_BALANCE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lmbias/corpus.hpp"
#include "lmbias/error.hpp"
#include "lmbias/jsonl.hpp"
#include "lmbias/text.hpp"

namespace lmbias {

struct BalanceSpec {
  std::map<std::string, std::vector<std::string>> synonym_groups;  // canonical -> variants
  std::vector<std::pair<std::string, std::string>> group_pairs;
  std::set<std::string> harmful_lexicon;
  std::map<std::string, std::string> substitution_map;  // harmful -> replacement
  std::vector<std::string> anchor_words;
  std::vector<std::string> report_words;  // counted in the report, never equalized
  std::string window = "sentence";
  std::uint64_t seed = 0;
};

enum class EditReason { kCanonicalize, kSubstitute, kEqualizeDrop, kEqualizeDuplicate };

inline std::string_view ToString(EditReason r) {
  switch (r) {
    case EditReason::kCanonicalize: return "canonicalize";
    case EditReason::kSubstitute: return "substitute";
    case EditReason::kEqualizeDrop: return "equalize-drop";
    case EditReason::kEqualizeDuplicate: return "equalize-dup";
  }
  return "canonicalize";
}

inline std::optional<EditReason> ParseEditReason(std::string_view s) {
  if (s == "canonicalize") return EditReason::kCanonicalize;
  if (s == "substitute") return EditReason::kSubstitute;
  if (s == "equalize-drop") return EditReason::kEqualizeDrop;
  if (s == "equalize-dup") return EditReason::kEqualizeDuplicate;
  return std::nullopt;
}

// A byte-level change to one document's concat, valid against the corpus
// state left by all earlier edits in the ledger.
//   canonicalize / substitute: the token at `offset` (surface `old_text`)
//     becomes `new_text`.
//   equalize-drop: bytes [offset, offset + old_text.size()) are removed with
//     every token inside them.
//   equalize-dup: a new document `doc_id` is appended whose text is
//     `new_text`, copied from `source_doc_id` at `source_offset`.
struct Edit {
  std::string doc_id;
  std::size_t offset = 0;
  std::string old_text;
  std::string new_text;
  EditReason reason = EditReason::kCanonicalize;
  std::string source_doc_id;
  std::size_t source_offset = 0;

  friend bool operator==(const Edit&, const Edit&) = default;
};

struct WordCount {
  std::string word;
  std::size_t before = 0;
  std::size_t after = 0;
  std::optional<std::size_t> target;
};

struct BalancePlan {
  std::vector<WordCount> counts;
  std::vector<Edit> edits;
};

// --- spec -----------------------------------------------------------------------

// Case-folds every word and checks the structural constraints. Returns the
// normalized spec.
inline BalanceSpec ValidateSpec(const BalanceSpec& in) {
  if (in.window != "sentence") throw InputError("unsupported substitution window '" + in.window + "'");
  BalanceSpec spec;
  spec.window = in.window;
  spec.seed = in.seed;
  auto norm = [](const std::string& w, std::string_view what) {
    auto tokens = text::Segment(w);
    if (tokens.size() != 1 || tokens[0].length != w.size()) {
      throw InputError(std::string(what) + " '" + w + "' must be a single word");
    }
    return tokens[0].text;
  };

  std::map<std::string, std::string> owner;  // word -> canonical it belongs to
  for (const auto& [canonical_raw, variants] : in.synonym_groups) {
    const auto canonical = norm(canonical_raw, "canonical word");
    auto claim = [&](const std::string& w) {
      auto [it, inserted] = owner.emplace(w, canonical);
      if (!inserted && it->second != canonical) {
        throw InputError("synonym groups overlap on '" + w + "'");
      }
    };
    claim(canonical);
    auto& out = spec.synonym_groups[canonical];
    for (const auto& v_raw : variants) {
      const auto v = norm(v_raw, "synonym variant");
      claim(v);
      if (v != canonical && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }

  std::set<std::string> pair_words;
  for (const auto& [a_raw, b_raw] : in.group_pairs) {
    auto a = norm(a_raw, "pair word");
    auto b = norm(b_raw, "pair word");
    if (a == b) throw InputError("pair ('" + a + "', '" + b + "') names the same word twice");
    for (const auto& w : {a, b}) {
      if (!pair_words.insert(w).second) throw InputError("word '" + w + "' appears in more than one pair");
      auto it = owner.find(w);
      if (it != owner.end() && it->second != w) {
        throw InputError("pair word '" + w + "' is a variant of '" + it->second + "'");
      }
    }
    spec.group_pairs.emplace_back(std::move(a), std::move(b));
  }

  for (const auto& w : in.harmful_lexicon) spec.harmful_lexicon.insert(norm(w, "harmful word"));
  for (const auto& [k, v] : in.substitution_map) {
    const auto key = norm(k, "harmful word");
    if (!spec.harmful_lexicon.count(key)) {
      throw InputError("substitution for '" + key + "' which is not in the harmful lexicon");
    }
    spec.substitution_map[key] = norm(v, "replacement word");
  }
  for (const auto& w : spec.harmful_lexicon) {
    if (!spec.substitution_map.count(w)) throw InputError("harmful word '" + w + "' has no replacement");
  }
  for (const auto& w_raw : in.anchor_words) {
    auto w = norm(w_raw, "anchor word");
    if (spec.harmful_lexicon.count(w)) throw InputError("anchor word '" + w + "' is in the harmful lexicon");
    if (std::find(spec.anchor_words.begin(), spec.anchor_words.end(), w) == spec.anchor_words.end()) {
      spec.anchor_words.push_back(std::move(w));
    }
  }
  for (const auto& w_raw : in.report_words) {
    auto w = norm(w_raw, "report word");
    if (std::find(spec.report_words.begin(), spec.report_words.end(), w) == spec.report_words.end()) {
      spec.report_words.push_back(std::move(w));
    }
  }
  for (const auto& [harmful, replacement] : spec.substitution_map) {
    if (pair_words.count(replacement) || pair_words.count(harmful)) {
      throw InputError("substitution '" + harmful + "' -> '" + replacement + "' touches a pair word");
    }
    if (spec.harmful_lexicon.count(replacement)) {
      throw InputError("replacement '" + replacement + "' is itself harmful");
    }
  }
  return spec;
}

inline BalanceSpec BalanceSpecFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("balance spec must be a JSON object");
  BalanceSpec spec;
  try {
    if (j.contains("synonym_groups")) {
      const auto& g = j.at("synonym_groups");
      if (!g.is_object()) throw std::invalid_argument("'synonym_groups' must be an object");
      for (const auto& [canonical, variants] : g.items()) {
        auto& out = spec.synonym_groups[canonical];
        if (!variants.is_array()) throw std::invalid_argument("synonym variants must be an array");
        for (const auto& v : variants) {
          if (!v.is_string()) throw std::invalid_argument("synonym variants must be strings");
          out.push_back(v.get<std::string>());
        }
      }
    }
    if (j.contains("group_pairs")) {
      for (const auto& p : j.at("group_pairs")) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
          throw std::invalid_argument("each group pair must be an array of two strings");
        }
        spec.group_pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
      }
    }
    if (j.contains("harmful_lexicon")) {
      for (const auto& w : jsonl::RequireStringArray(j, "harmful_lexicon")) spec.harmful_lexicon.insert(w);
    }
    if (j.contains("substitution_map")) {
      const auto& m = j.at("substitution_map");
      if (!m.is_object()) throw std::invalid_argument("'substitution_map' must be an object");
      for (const auto& [k, v] : m.items()) {
        if (!v.is_string()) throw std::invalid_argument("substitution values must be strings");
        spec.substitution_map[k] = v.get<std::string>();
      }
    }
    if (j.contains("anchor_words")) spec.anchor_words = jsonl::RequireStringArray(j, "anchor_words");
    if (j.contains("report_words")) spec.report_words = jsonl::RequireStringArray(j, "report_words");
    if (j.contains("window")) spec.window = jsonl::RequireString(j, "window");
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw std::invalid_argument("'seed' must be a non-negative integer");
      spec.seed = j.at("seed").get<std::uint64_t>();
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("balance spec: ") + e.what());
  }
  return spec;
}

// --- ledger replay --------------------------------------------------------------

// Applies edits to a corpus, checking each one against the current text.
class CorpusEditor {
 public:
  explicit CorpusEditor(Corpus corpus) : corpus_(std::move(corpus)) {
    for (std::size_t i = 0; i < corpus_.size(); ++i) index_[corpus_[i].doc_id] = i;
  }

  const Corpus& corpus() const noexcept { return corpus_; }
  Corpus Release() && { return std::move(corpus_); }

  bool Contains(const std::string& doc_id) const { return index_.count(doc_id) > 0; }
  const CorpusDocument& Document(const std::string& doc_id) const { return corpus_[Find(doc_id)]; }

  void Apply(const Edit& e) {
    switch (e.reason) {
      case EditReason::kCanonicalize:
      case EditReason::kSubstitute: ReplaceToken(e); break;
      case EditReason::kEqualizeDrop: Drop(e); break;
      case EditReason::kEqualizeDuplicate: Duplicate(e); break;
    }
  }

 private:
  std::size_t Find(const std::string& doc_id) const {
    auto it = index_.find(doc_id);
    if (it == index_.end()) throw InputError("edit names unknown doc_id '" + doc_id + "'");
    return it->second;
  }

  static void CheckText(const CorpusDocument& d, std::size_t offset, std::string_view expected) {
    if (offset > d.concat.size() || d.concat.compare(offset, expected.size(), expected) != 0) {
      throw InputError("edit on '" + d.doc_id + "' at byte " + std::to_string(offset) +
                       " does not match the document text");
    }
  }

  static void Shift(CorpusDocument& d, std::size_t from_offset, std::ptrdiff_t delta) {
    for (auto& t : d.tokens) {
      if (t.offset >= from_offset) t.offset = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t.offset) + delta);
    }
  }

  void ReplaceToken(const Edit& e) {
    auto& d = corpus_[Find(e.doc_id)];
    CheckText(d, e.offset, e.old_text);
    auto it = std::find_if(d.tokens.begin(), d.tokens.end(),
                           [&](const Token& t) { return t.offset == e.offset; });
    if (it == d.tokens.end() || it->length != e.old_text.size()) {
      throw InputError("edit on '" + d.doc_id + "' at byte " + std::to_string(e.offset) +
                       " does not address a token");
    }
    d.concat.replace(e.offset, e.old_text.size(), e.new_text);
    it->text = text::Lowercase(e.new_text);
    it->length = e.new_text.size();
    Shift(d, e.offset + 1, static_cast<std::ptrdiff_t>(e.new_text.size()) -
                               static_cast<std::ptrdiff_t>(e.old_text.size()));
  }

  void Drop(const Edit& e) {
    auto& d = corpus_[Find(e.doc_id)];
    CheckText(d, e.offset, e.old_text);
    const auto begin = e.offset;
    const auto end = e.offset + e.old_text.size();
    std::vector<Token> kept;
    kept.reserve(d.tokens.size());
    for (auto& t : d.tokens) {
      const auto t_end = t.offset + t.length;
      if (t.offset >= begin && t_end <= end) continue;
      if (t.offset < end && t_end > begin) {
        throw InputError("drop on '" + d.doc_id + "' splits a token");
      }
      if (t.offset >= end) t.offset -= e.old_text.size();
      kept.push_back(std::move(t));
    }
    d.tokens = std::move(kept);
    d.concat.erase(begin, e.old_text.size());
  }

  void Duplicate(const Edit& e) {
    if (Contains(e.doc_id)) throw InputError("duplicate target doc_id '" + e.doc_id + "' already exists");
    const auto& src = corpus_[Find(e.source_doc_id)];
    CheckText(src, e.source_offset, e.new_text);
    CorpusDocument copy;
    copy.doc_id = e.doc_id;
    copy.comment = e.new_text;
    copy.concat = e.new_text;
    const auto begin = e.source_offset;
    const auto end = begin + e.new_text.size();
    for (const auto& t : src.tokens) {
      const auto t_end = t.offset + t.length;
      if (t.offset >= begin && t_end <= end) {
        copy.tokens.push_back({t.text, t.offset - begin, t.length});
      } else if (t.offset < end && t_end > begin) {
        throw InputError("duplicate of '" + src.doc_id + "' splits a token");
      }
    }
    index_[copy.doc_id] = corpus_.size();
    corpus_.push_back(std::move(copy));
  }

  Corpus corpus_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline Corpus ReplayEdits(Corpus corpus, const std::vector<Edit>& edits) {
  CorpusEditor editor(std::move(corpus));
  for (const auto& e : edits) editor.Apply(e);
  return std::move(editor).Release();
}

// --- passes ----------------------------------------------------------------------

struct EditResult {
  Corpus corpus;
  std::vector<Edit> edits;
};

// Replaces every spelling variant with its canonical word. `spec` must be
// validated.
inline EditResult Canonicalize(const Corpus& corpus, const BalanceSpec& spec) {
  std::unordered_map<std::string, std::string> to_canonical;
  for (const auto& [canonical, variants] : spec.synonym_groups) {
    for (const auto& v : variants) to_canonical[v] = canonical;
  }
  CorpusEditor editor(corpus);
  std::vector<Edit> edits;
  for (const auto& doc : corpus) {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      const auto& t = editor.Document(doc.doc_id).tokens[i];
      auto it = to_canonical.find(t.text);
      if (it == to_canonical.end()) continue;
      const auto& d = editor.Document(doc.doc_id);
      Edit e{doc.doc_id, t.offset, d.concat.substr(t.offset, t.length), it->second,
             EditReason::kCanonicalize, {}, 0};
      editor.Apply(e);
      edits.push_back(std::move(e));
    }
  }
  return {std::move(editor).Release(), std::move(edits)};
}

// Replaces harmful words inside sentences that contain an anchor word.
inline EditResult SubstituteHarmful(const Corpus& corpus, const BalanceSpec& spec) {
  if (spec.anchor_words.empty()) throw InputError("substitution needs at least one anchor word");
  const std::set<std::string> anchors(spec.anchor_words.begin(), spec.anchor_words.end());
  CorpusEditor editor(corpus);
  std::vector<Edit> edits;
  for (const auto& doc : corpus) {
    const auto sentences = SplitSentences(doc);
    std::vector<bool> in_window(doc.tokens.size(), false);
    for (const auto& s : sentences) {
      bool anchored = false;
      for (const auto& t : doc.tokens) {
        if (t.offset >= s.begin && t.offset < s.content_end && anchors.count(t.text)) anchored = true;
      }
      if (!anchored) continue;
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (doc.tokens[i].offset >= s.begin && doc.tokens[i].offset < s.content_end) in_window[i] = true;
      }
    }
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (!in_window[i]) continue;
      const auto& t = editor.Document(doc.doc_id).tokens[i];
      auto it = spec.substitution_map.find(t.text);
      if (it == spec.substitution_map.end()) continue;
      const auto& d = editor.Document(doc.doc_id);
      Edit e{doc.doc_id, t.offset, d.concat.substr(t.offset, t.length), it->second,
             EditReason::kSubstitute, {}, 0};
      editor.Apply(e);
      edits.push_back(std::move(e));
    }
  }
  return {std::move(editor).Release(), std::move(edits)};
}

namespace detail {

// Portable across standard libraries, unlike std::uniform_int_distribution.
class SeededSampler {
 public:
  explicit SeededSampler(std::uint64_t seed) : engine_(seed) {}

  std::size_t Below(std::size_t bound) {
    const std::uint64_t b = bound;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % b;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % b);
  }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

struct SentenceSite {
  std::size_t doc;      // index into the corpus
  std::size_t ordinal;  // sentence number within the document
  std::size_t hits;     // occurrences of the word being moved
};

// Sentences containing `word` but no word from `excluded`.
inline std::vector<SentenceSite> SitesFor(const Corpus& corpus, const std::string& word,
                                          const std::set<std::string>& excluded, bool allow_excluded) {
  std::vector<SentenceSite> sites;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& doc = corpus[d];
    const auto sentences = SplitSentences(doc);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      std::size_t hits = 0;
      bool blocked = false;
      for (const auto& t : doc.tokens) {
        if (t.offset < sentences[s].begin || t.offset >= sentences[s].content_end) continue;
        if (t.text == word) ++hits;
        if (excluded.count(t.text)) blocked = true;
      }
      if (hits > 0 && (allow_excluded || !blocked)) sites.push_back({d, s, hits});
    }
  }
  return sites;
}

// Byte range removed when sentence `ordinal` is dropped. The last sentence of
// a document also takes the whitespace before it so no trailing blank is left.
inline std::pair<std::size_t, std::size_t> DropRange(const CorpusDocument& doc, std::size_t ordinal) {
  const auto sentences = SplitSentences(doc);
  const auto& s = sentences.at(ordinal);
  std::size_t begin = s.begin;
  if (s.end == doc.concat.size()) {
    while (begin > 0 && text::IsAsciiSpace(doc.concat[begin - 1])) --begin;
  }
  return {begin, s.end};
}

class Equalizer {
 public:
  Equalizer(Corpus corpus, std::uint64_t seed) : editor_(std::move(corpus)), sampler_(seed) {}

  std::vector<Edit>& edits() { return edits_; }
  Corpus Release() && { return std::move(editor_).Release(); }
  const Corpus& corpus() const { return editor_.corpus(); }

  // Removes occurrences of `word` until `need` are gone.
  void Reduce(const std::string& word, std::size_t need, const std::set<std::string>& protected_words) {
    auto sites = SitesFor(corpus(), word, protected_words, false);
    sampler_.Shuffle(sites);
    std::vector<SentenceSite> chosen;
    for (const auto& s : sites) {
      if (need == 0) break;
      if (s.hits <= need) {
        chosen.push_back(s);
        need -= s.hits;
      }
    }
    // Drop later sentences first so earlier ordinals stay valid.
    std::sort(chosen.begin(), chosen.end(), [](const SentenceSite& a, const SentenceSite& b) {
      return a.doc != b.doc ? a.doc < b.doc : a.ordinal > b.ordinal;
    });
    for (const auto& s : chosen) {
      const auto& doc = corpus()[s.doc];
      const auto [begin, end] = DropRange(doc, s.ordinal);
      Emit({doc.doc_id, begin, doc.concat.substr(begin, end - begin), "", EditReason::kEqualizeDrop, {}, 0});
    }
    if (need > 0) DropTokens(word, need, std::nullopt);
  }

  // Adds occurrences of `word` by duplicating sentences until `need` are added.
  void Raise(const std::string& word, std::size_t need, const std::set<std::string>& protected_words) {
    const auto sites = SitesFor(corpus(), word, protected_words, false);
    std::vector<std::pair<std::size_t, std::size_t>> sources;  // (doc, ordinal)
    while (need > 0 && !sites.empty()) {
      auto order = sites;
      sampler_.Shuffle(order);
      bool progressed = false;
      for (const auto& s : order) {
        if (need == 0) break;
        if (s.hits <= need) {
          sources.emplace_back(s.doc, s.ordinal);
          need -= s.hits;
          progressed = true;
        }
      }
      if (!progressed) break;
    }
    // Sentence boundaries of the source documents do not change here, so the
    // spans are taken from the current text.
    for (const auto& [d, ordinal] : sources) DuplicateSentence(d, ordinal);
    if (need == 0) return;

    // Every candidate sentence holds more occurrences than still needed, or
    // none is free of protected words: duplicate one and trim the copy.
    auto any = SitesFor(corpus(), word, protected_words, true);
    if (any.empty()) throw InputError("word '" + word + "' does not occur in the corpus");
    while (need > 0) {
      sampler_.Shuffle(any);
      const auto pick = any.front();
      const auto copy = DuplicateSentence(pick.doc, pick.ordinal);
      const std::size_t used = std::min(pick.hits, need);
      TrimCopy(copy, word, pick.hits - used, protected_words);
      need -= used;
    }
  }

 private:
  void Emit(Edit e) {
    editor_.Apply(e);
    edits_.push_back(std::move(e));
  }

  std::string FreshId(const std::string& source) {
    for (;;) {
      auto id = source + "#dup" + std::to_string(++dup_counter_);
      if (!editor_.Contains(id)) return id;
    }
  }

  // Returns the corpus index of the new document.
  std::size_t DuplicateSentence(std::size_t d, std::size_t ordinal) {
    const auto& doc = corpus()[d];
    const auto s = SplitSentences(doc).at(ordinal);
    const std::string source_id = doc.doc_id;
    Emit({FreshId(source_id), 0, "", doc.concat.substr(s.begin, s.content_end - s.begin),
          EditReason::kEqualizeDuplicate, source_id, s.begin});
    return corpus().size() - 1;
  }

  // Token-level drops of `word`, sampled over all its occurrences (restricted
  // to one document when `only_doc` is set).
  void DropTokens(const std::string& word, std::size_t need, std::optional<std::size_t> only_doc) {
    std::vector<std::pair<std::size_t, std::size_t>> occurrences;  // (doc, token index)
    for (std::size_t d = 0; d < corpus().size(); ++d) {
      if (only_doc && *only_doc != d) continue;
      const auto& toks = corpus()[d].tokens;
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].text == word) occurrences.emplace_back(d, i);
      }
    }
    if (occurrences.size() < need) throw InputError("not enough occurrences of '" + word + "' to drop");
    sampler_.Shuffle(occurrences);
    occurrences.resize(need);
    std::sort(occurrences.begin(), occurrences.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    for (const auto& [d, i] : occurrences) {
      const auto& doc = corpus()[d];
      const auto& t = doc.tokens[i];
      Emit({doc.doc_id, t.offset, doc.concat.substr(t.offset, t.length), "", EditReason::kEqualizeDrop, {}, 0});
    }
  }

  // Removes `excess` occurrences of `word` and every protected word from a
  // freshly duplicated document.
  void TrimCopy(std::size_t d, const std::string& word, std::size_t excess,
                const std::set<std::string>& protected_words) {
    const auto& toks = corpus()[d].tokens;
    std::vector<std::size_t> victims;
    std::size_t word_seen = 0;
    std::size_t word_total = 0;
    for (const auto& t : toks) word_total += (t.text == word);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (protected_words.count(toks[i].text)) {
        victims.push_back(i);
      } else if (toks[i].text == word) {
        // Keep the first (total - excess) occurrences.
        if (word_seen++ >= word_total - excess) victims.push_back(i);
      }
    }
    for (auto it = victims.rbegin(); it != victims.rend(); ++it) {
      const auto& doc = corpus()[d];
      const auto& t = doc.tokens[*it];
      Emit({doc.doc_id, t.offset, doc.concat.substr(t.offset, t.length), "", EditReason::kEqualizeDrop, {}, 0});
    }
  }

  CorpusEditor editor_;
  SeededSampler sampler_;
  std::vector<Edit> edits_;
  std::size_t dup_counter_ = 0;
};

}  // namespace detail

// Target count for a pair: the mean of both counts, halves rounded up.
inline std::size_t EqualizationTarget(std::size_t a, std::size_t b) { return (a + b + 1) / 2; }

struct EqualizeResult {
  Corpus corpus;
  BalancePlan plan;
};

// Moves both words of every configured pair to their rounded mean count.
// Expects canonicalized input and a validated spec.
inline EqualizeResult Equalize(const Corpus& corpus, const BalanceSpec& spec) {
  std::set<std::string> pair_words;
  for (const auto& [a, b] : spec.group_pairs) {
    pair_words.insert(a);
    pair_words.insert(b);
  }
  detail::Equalizer eq(corpus, spec.seed);
  BalancePlan plan;
  for (const auto& [a, b] : spec.group_pairs) {
    const auto count_a = CountWord(eq.corpus(), a);
    const auto count_b = CountWord(eq.corpus(), b);
    for (const auto& [w, c] : {std::pair{a, count_a}, std::pair{b, count_b}}) {
      if (c == 0) throw InputError("pair word '" + w + "' is absent from the corpus");
    }
    const auto target = EqualizationTarget(count_a, count_b);
    plan.counts.push_back({a, count_a, target, target});
    plan.counts.push_back({b, count_b, target, target});
    if (count_a == count_b) continue;
    const bool a_over = count_a > count_b;
    const auto& over = a_over ? a : b;
    const auto& under = a_over ? b : a;
    const auto over_count = a_over ? count_a : count_b;
    const auto under_count = a_over ? count_b : count_a;

    auto others = pair_words;
    others.erase(over);
    eq.Reduce(over, over_count - target, others);
    others = pair_words;
    others.erase(under);
    eq.Raise(under, target - under_count, others);
  }
  plan.edits = std::move(eq.edits());
  Corpus out = std::move(eq).Release();
  for (const auto& wc : plan.counts) {
    if (CountWord(out, wc.word) != *wc.target) {
      throw Error("equalization missed its target for '" + wc.word + "'");
    }
  }
  return {std::move(out), std::move(plan)};
}

struct BalanceResult {
  Corpus corpus;
  BalancePlan plan;
};

// Runs canonicalize, substitute and equalize. Substitution is skipped when
// the spec has neither a harmful lexicon nor anchors.
inline BalanceResult Balance(const Corpus& corpus, const BalanceSpec& raw_spec) {
  const auto spec = ValidateSpec(raw_spec);
  BalanceResult result;
  auto canon = Canonicalize(corpus, spec);
  result.plan.edits = std::move(canon.edits);
  Corpus current = std::move(canon.corpus);

  std::vector<std::string> tracked;
  for (const auto& [a, b] : spec.group_pairs) {
    tracked.push_back(a);
    tracked.push_back(b);
  }
  for (const auto* words : {&spec.report_words, &spec.anchor_words}) {
    for (const auto& w : *words) {
      if (std::find(tracked.begin(), tracked.end(), w) == tracked.end()) tracked.push_back(w);
    }
  }
  std::map<std::string, std::size_t> before;
  for (const auto& w : tracked) before[w] = CountWord(current, w);

  if (!spec.harmful_lexicon.empty() || !spec.anchor_words.empty()) {
    auto sub = SubstituteHarmful(current, spec);
    result.plan.edits.insert(result.plan.edits.end(), sub.edits.begin(), sub.edits.end());
    current = std::move(sub.corpus);
  }

  auto eq = Equalize(current, spec);
  result.plan.edits.insert(result.plan.edits.end(), eq.plan.edits.begin(), eq.plan.edits.end());
  result.corpus = std::move(eq.corpus);

  for (const auto& w : tracked) {
    WordCount wc{w, before[w], CountWord(result.corpus, w), std::nullopt};
    for (const auto& p : eq.plan.counts) {
      if (p.word == w) wc.target = p.target;
    }
    result.plan.counts.push_back(std::move(wc));
  }
  return result;
}

// --- ledger and report I/O -------------------------------------------------------

inline nlohmann::ordered_json ToJson(const Edit& e, std::size_t seq) {
  nlohmann::ordered_json j;
  j["seq"] = seq;
  j["doc_id"] = e.doc_id;
  j["offset"] = e.offset;
  j["old"] = e.old_text;
  j["new"] = e.new_text;
  j["reason"] = ToString(e.reason);
  if (e.reason == EditReason::kEqualizeDuplicate) {
    j["source_doc_id"] = e.source_doc_id;
    j["source_offset"] = e.source_offset;
  }
  return j;
}

inline std::string SerializeLedger(const std::vector<Edit>& edits) {
  std::string out;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    out += ToJson(edits[i], i).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<Edit> ParseLedger(std::string_view content) {
  std::vector<Edit> edits;
  std::vector<ParseError::Diagnostic> diagnostics;
  jsonl::ForEachObject(content, diagnostics, [&](std::size_t, const nlohmann::json& j) {
    Edit e;
    e.doc_id = jsonl::RequireString(j, "doc_id");
    if (!j.contains("offset") || !j.at("offset").is_number_unsigned()) {
      throw std::invalid_argument("field 'offset' must be a non-negative integer");
    }
    e.offset = j.at("offset").get<std::size_t>();
    e.old_text = jsonl::RequireString(j, "old");
    e.new_text = jsonl::RequireString(j, "new");
    const auto reason = jsonl::RequireString(j, "reason");
    auto r = ParseEditReason(reason);
    if (!r) throw std::invalid_argument("unknown reason '" + reason + "'");
    e.reason = *r;
    if (e.reason == EditReason::kEqualizeDuplicate) {
      e.source_doc_id = jsonl::RequireString(j, "source_doc_id");
      if (!j.contains("source_offset") || !j.at("source_offset").is_number_unsigned()) {
        throw std::invalid_argument("field 'source_offset' must be a non-negative integer");
      }
      e.source_offset = j.at("source_offset").get<std::size_t>();
    }
    edits.push_back(std::move(e));
  });
  if (!diagnostics.empty()) throw ParseError(std::move(diagnostics));
  return edits;
}

struct BalanceReportRows {
  std::vector<WordCount> counts;
  std::vector<std::pair<std::string, std::size_t>> edits_by_reason;  // only reasons that occur
};

inline BalanceReportRows BalanceReport(const BalancePlan& plan) {
  BalanceReportRows rows;
  rows.counts = plan.counts;
  for (auto reason : {EditReason::kCanonicalize, EditReason::kSubstitute, EditReason::kEqualizeDrop,
                      EditReason::kEqualizeDuplicate}) {
    const auto n = static_cast<std::size_t>(std::count_if(
        plan.edits.begin(), plan.edits.end(), [&](const Edit& e) { return e.reason == reason; }));
    if (n > 0) rows.edits_by_reason.emplace_back(std::string(ToString(reason)), n);
  }
  return rows;
}

}  // namespace lmbias

#endif  // LMBIAS_BALANCE_HPP
