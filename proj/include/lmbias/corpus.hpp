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

// Comment corpora: one record per comment with the title of
// the article it was posted under. The text a model trains on is `concat`,
// the trimmed "title comment" string.
//
// Tokens keep their byte span in `concat` so that edits can be expressed as
// byte-level replacements. A record may carry its own `tokens` array (for
// example from a Korean morphological analyzer); those tokens must appear in
// `concat` in order and are located by forward search.

#ifndef LMBIAS_CORPUS_HPP
#define LMBIAS_CORPUS_HPP

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lmbias/error.hpp"
#include "lmbias/jsonl.hpp"
#include "lmbias/text.hpp"

namespace lmbias {

using Token = text::TokenSpan;

struct CorpusDocument {
  std::string doc_id;
  std::string title;
  std::string comment;
  std::string concat;
  std::vector<Token> tokens;

  friend bool operator==(const CorpusDocument& a, const CorpusDocument& b) {
    if (a.doc_id != b.doc_id || a.title != b.title || a.comment != b.comment ||
        a.concat != b.concat || a.tokens.size() != b.tokens.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.tokens.size(); ++i) {
      if (a.tokens[i].text != b.tokens[i].text || a.tokens[i].offset != b.tokens[i].offset ||
          a.tokens[i].length != b.tokens[i].length) {
        return false;
      }
    }
    return true;
  }
};

using Corpus = std::vector<CorpusDocument>;

inline std::string MakeConcat(std::string_view title, std::string_view comment) {
  std::string joined;
  joined.reserve(title.size() + comment.size() + 1);
  joined.append(title).append(" ").append(comment);
  return std::string(text::Trim(joined));
}

// Locates externally produced tokens in `concat`. Throws std::invalid_argument
// when a token cannot be found after its predecessor.
inline std::vector<Token> LocateTokens(std::string_view concat, const std::vector<std::string>& surface) {
  std::vector<Token> tokens;
  tokens.reserve(surface.size());
  std::size_t from = 0;
  for (const auto& s : surface) {
    if (s.empty()) throw std::invalid_argument("empty token");
    const auto pos = concat.find(s, from);
    if (pos == std::string_view::npos) {
      throw std::invalid_argument("token '" + s + "' not found in concat after byte " + std::to_string(from));
    }
    tokens.push_back({text::Lowercase(s), pos, s.size()});
    from = pos + s.size();
  }
  return tokens;
}

// Builds a document. `concat` overrides title+comment when given (balanced
// corpora carry their edited training text there); `tokens` switches to
// externally segmented input.
inline CorpusDocument MakeDocument(std::string doc_id, std::string title, std::string comment,
                                   std::optional<std::string> concat = std::nullopt,
                                   const std::optional<std::vector<std::string>>& tokens = std::nullopt) {
  if (doc_id.empty()) throw std::invalid_argument("empty doc_id");
  CorpusDocument d;
  d.doc_id = std::move(doc_id);
  d.title = std::move(title);
  d.comment = std::move(comment);
  d.concat = concat ? std::move(*concat) : MakeConcat(d.title, d.comment);
  for (const auto* field : {&d.title, &d.comment, &d.concat}) {
    if (!text::IsValidUtf8(*field)) throw std::invalid_argument("text is not valid UTF-8");
  }
  d.tokens = tokens ? LocateTokens(d.concat, *tokens) : text::Segment(d.concat);
  return d;
}

struct RowError {
  std::size_t index;  // 1-based line (JSONL) or data row (CSV)
  std::string message;
};

struct LoadResult {
  Corpus documents;
  std::vector<RowError> errors;
};

namespace detail {

inline std::string DocIdFromJson(const nlohmann::json& j) {
  if (!j.contains("doc_id")) throw std::invalid_argument("missing field 'doc_id'");
  const auto& v = j.at("doc_id");
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw std::invalid_argument("field 'doc_id' must be a string or integer");
}

inline void AddDocument(LoadResult& result, std::set<std::string>& ids, std::size_t index,
                        CorpusDocument doc) {
  if (!ids.insert(doc.doc_id).second) {
    result.errors.push_back({index, "duplicate doc_id '" + doc.doc_id + "'"});
    return;
  }
  result.documents.push_back(std::move(doc));
}

}  // namespace detail

// Malformed rows are reported and skipped; the remaining rows load.
inline LoadResult LoadCorpusJsonl(std::string_view content) {
  LoadResult result;
  std::set<std::string> ids;
  std::vector<ParseError::Diagnostic> diagnostics;
  jsonl::ForEachObject(content, diagnostics, [&](std::size_t line, const nlohmann::json& j) {
    auto doc_id = detail::DocIdFromJson(j);
    auto title = jsonl::RequireString(j, "title");
    auto comment = jsonl::RequireString(j, "comment");
    std::optional<std::string> concat;
    if (j.contains("concat")) concat = jsonl::RequireString(j, "concat");
    std::optional<std::vector<std::string>> tokens;
    if (j.contains("tokens")) tokens = jsonl::RequireStringArray(j, "tokens");
    detail::AddDocument(result, ids, line,
                        MakeDocument(std::move(doc_id), std::move(title), std::move(comment),
                                     std::move(concat), tokens));
  });
  for (auto& d : diagnostics) result.errors.push_back({d.line, std::move(d.message)});
  std::sort(result.errors.begin(), result.errors.end(),
            [](const RowError& a, const RowError& b) { return a.index < b.index; });
  return result;
}

// RFC 4180 records. Returns nullopt for the record when its quoting is
// broken; the reader then resynchronizes at the next line.
struct CsvRecord {
  std::size_t line;
  std::optional<std::vector<std::string>> fields;
};

inline std::vector<CsvRecord> ParseCsv(std::string_view content) {
  std::vector<CsvRecord> records;
  std::size_t pos = 0;
  std::size_t line = 1;
  while (pos < content.size()) {
    const std::size_t start_line = line;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;
    bool broken = false;
    bool done = false;
    while (!done) {
      if (pos >= content.size()) {
        if (in_quotes) broken = true;
        break;
      }
      const char c = content[pos++];
      if (in_quotes) {
        if (c == '"') {
          if (pos < content.size() && content[pos] == '"') {
            field += '"';
            ++pos;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (field.empty() && !quoted_field) {
            in_quotes = quoted_field = true;
          } else {
            broken = true;
          }
          break;
        case ',':
          fields.push_back(std::move(field));
          field.clear();
          quoted_field = false;
          break;
        case '\r':
          if (pos < content.size() && content[pos] == '\n') break;
          field += c;
          break;
        case '\n':
          ++line;
          done = true;
          break;
        default:
          if (quoted_field) broken = true;
          field += c;
      }
    }
    fields.push_back(std::move(field));
    if (broken) {
      // Skip to the end of the physical line and report the record.
      while (pos < content.size() && content[pos - 1] != '\n') ++pos;
      records.push_back({start_line, std::nullopt});
      continue;
    }
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    records.push_back({start_line, std::move(fields)});
  }
  return records;
}

// CSV with a header row naming doc_id, title and comment (any order, extra
// columns ignored). Row indices in errors count data rows from 1.
inline LoadResult LoadCorpusCsv(std::string_view content) {
  LoadResult result;
  auto records = ParseCsv(content);
  if (records.empty()) return result;
  if (!records.front().fields) throw InputError("CSV header is malformed");
  const auto& header = *records.front().fields;
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::Trim(header[i]) == name) return i;
    }
    throw InputError("CSV header lacks column '" + std::string(name) + "'");
  };
  const auto id_col = column("doc_id");
  const auto title_col = column("title");
  const auto comment_col = column("comment");
  std::set<std::string> ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const std::size_t index = r;
    if (!records[r].fields) {
      result.errors.push_back({index, "malformed quoting"});
      continue;
    }
    const auto& f = *records[r].fields;
    if (f.size() != header.size()) {
      result.errors.push_back({index, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(f.size())});
      continue;
    }
    try {
      detail::AddDocument(result, ids, index, MakeDocument(f[id_col], f[title_col], f[comment_col]));
    } catch (const std::invalid_argument& e) {
      result.errors.push_back({index, e.what()});
    }
  }
  return result;
}

inline nlohmann::ordered_json ToJson(const CorpusDocument& d) {
  nlohmann::ordered_json j;
  j["doc_id"] = d.doc_id;
  j["title"] = d.title;
  j["comment"] = d.comment;
  j["concat"] = d.concat;
  auto& tokens = j["tokens"] = nlohmann::ordered_json::array();
  for (const auto& t : d.tokens) tokens.push_back(d.concat.substr(t.offset, t.length));
  return j;
}

inline std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus) {
    out += ToJson(d).dump();
    out += '\n';
  }
  return out;
}

// --- sentences ----------------------------------------------------------------

struct Sentence {
  std::size_t begin;
  std::size_t content_end;  // after the terminal punctuation
  std::size_t end;          // after the trailing whitespace
};

namespace detail {

// Length of a sentence-terminal character at `pos`, or 0.
inline std::size_t TerminalLength(std::string_view s, std::size_t pos) {
  const char c = s[pos];
  if (c == '.' || c == '!' || c == '?' || c == '\n') return 1;
  for (std::string_view t : {"\xE3\x80\x82", "\xEF\xBC\x81", "\xEF\xBC\x9F"}) {  // 。！？
    if (s.substr(pos, t.size()) == t) return t.size();
  }
  return 0;
}

}  // namespace detail

// Splits `concat` on terminal punctuation and newlines. Punctuation inside a
// token span (e.g. an abbreviation kept whole by an external tokenizer) does
// not end a sentence.
inline std::vector<Sentence> SplitSentences(const CorpusDocument& doc) {
  const std::string_view s = doc.concat;
  std::vector<bool> inside_token(s.size(), false);
  for (const auto& t : doc.tokens) {
    for (std::size_t i = t.offset; i < t.offset + t.length && i < s.size(); ++i) inside_token[i] = true;
  }
  std::vector<Sentence> out;
  std::size_t begin = 0;
  std::size_t pos = 0;
  while (begin < s.size() && text::IsAsciiSpace(s[begin])) ++begin;
  pos = begin;
  while (pos < s.size()) {
    const auto len = inside_token[pos] ? 0 : detail::TerminalLength(s, pos);
    if (len == 0) {
      ++pos;
      continue;
    }
    std::size_t content_end = pos + len;
    while (content_end < s.size() && !inside_token[content_end]) {
      const auto more = detail::TerminalLength(s, content_end);
      if (more == 0) break;
      content_end += more;
    }
    std::size_t end = content_end;
    while (end < s.size() && text::IsAsciiSpace(s[end])) ++end;
    std::size_t trimmed = content_end;
    while (trimmed > begin && text::IsAsciiSpace(s[trimmed - 1])) --trimmed;
    if (trimmed > begin) out.push_back({begin, trimmed, end});
    begin = pos = end;
  }
  if (begin < s.size()) {
    std::size_t trimmed = s.size();
    while (trimmed > begin && text::IsAsciiSpace(s[trimmed - 1])) --trimmed;
    if (trimmed > begin) out.push_back({begin, trimmed, s.size()});
  }
  return out;
}

inline std::size_t CountWord(const Corpus& corpus, std::string_view word) {
  std::size_t n = 0;
  for (const auto& d : corpus) {
    for (const auto& t : d.tokens) n += (t.text == word);
  }
  return n;
}

}  // namespace lmbias

#endif  // LMBIAS_CORPUS_HPP
