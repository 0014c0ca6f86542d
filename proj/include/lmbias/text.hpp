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

// UTF-8 helpers shared by the corpus tools: decoding, word segmentation,
// case folding and fixed-precision number formatting.

#ifndef LMBIAS_TEXT_HPP
#define LMBIAS_TEXT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmbias::text {

struct DecodedChar {
  char32_t codepoint;
  std::size_t length;  // bytes consumed
};

// Decodes one code point at `pos`. Returns nullopt on an invalid or truncated
// sequence, overlong forms and surrogates included.
inline std::optional<DecodedChar> DecodeUtf8(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return std::nullopt;
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return DecodedChar{b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return std::nullopt;
  }
  if (pos + len > s.size()) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return std::nullopt;
  }
  return DecodedChar{cp, len};
}

inline bool IsValidUtf8(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size();) {
    auto c = DecodeUtf8(s, pos);
    if (!c) return false;
    pos += c->length;
  }
  return true;
}

inline void AppendUtf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Letters, digits and marks of any script count as word characters; ASCII and
// Latin-1 symbols, general punctuation and CJK/fullwidth punctuation do not.
inline bool IsWordCodepoint(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK symbols and punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji
  return true;
}

// Case folding for the cased scripts the tokenizer knows about (Basic Latin,
// Latin-1, Greek, Cyrillic). Caseless scripts such as Hangul pass through.
inline char32_t FoldCase(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

// Lowercases a valid UTF-8 string; invalid bytes are copied unchanged.
inline std::string Lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    auto c = DecodeUtf8(s, pos);
    if (!c) {
      out += s[pos++];
      continue;
    }
    AppendUtf8(out, FoldCase(c->codepoint));
    pos += c->length;
  }
  return out;
}

struct TokenSpan {
  std::string text;  // case-folded form
  std::size_t offset;
  std::size_t length;  // bytes of the surface form
};

// Word-boundary segmentation: a token is a maximal run of word code points.
// Input must be valid UTF-8.
inline std::vector<TokenSpan> Segment(std::string_view s) {
  std::vector<TokenSpan> tokens;
  std::size_t start = std::string_view::npos;
  std::size_t pos = 0;
  auto flush = [&](std::size_t end) {
    if (start != std::string_view::npos) {
      tokens.push_back({Lowercase(s.substr(start, end - start)), start, end - start});
      start = std::string_view::npos;
    }
  };
  while (pos < s.size()) {
    auto c = DecodeUtf8(s, pos);
    const std::size_t len = c ? c->length : 1;
    if (c && IsWordCodepoint(c->codepoint)) {
      if (start == std::string_view::npos) start = pos;
    } else {
      flush(pos);
    }
    pos += len;
  }
  flush(pos);
  return tokens;
}

inline bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && IsAsciiSpace(s[b])) ++b;
  while (e > b && IsAsciiSpace(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Fixed 4-decimal rendering used by every report. Values that round to zero
// print without a sign.
inline std::string Fixed4(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  double rounded = std::round(value * 1e4) / 1e4;
  if (rounded == 0.0) rounded = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", rounded);
  return buf;
}

// The same value as Fixed4, as a double, for JSON output.
inline double Round4(double value) {
  double rounded = std::round(value * 1e4) / 1e4;
  return rounded == 0.0 ? 0.0 : rounded;
}

}  // namespace lmbias::text

#endif  // LMBIAS_TEXT_HPP
