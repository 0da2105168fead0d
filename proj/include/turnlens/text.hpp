// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Rule-based tokenizer and sentence splitter. Both operate on UTF-8 and
// report spans as byte offsets into the input.

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace turnlens {

/// Half-open byte range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool operator==(const Span&) const = default;
};

struct Token {
  std::string surface;
  std::string normalized;
  Span span;

  bool operator==(const Token&) const = default;
};

namespace utf8 {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes the code point at `pos`. Malformed sequences decode as U+FFFD
/// with length 1 so that scanning always makes progress.
inline CodePoint decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
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
    return {kReplacement, 1};
  }
  if (pos + len > s.size()) return {kReplacement, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {kReplacement, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  // Overlong forms, surrogates and out-of-range values.
  static constexpr std::array<char32_t, 5> kMin{0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {kReplacement, 1};
  }
  return {cp, len};
}

inline bool valid(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size();) {
    const auto cp = decode(s, pos);
    if (cp.value == kReplacement && cp.length == 1 &&
        static_cast<unsigned char>(s[pos]) >= 0x80) {
      return false;
    }
    pos += cp.length;
  }
  return true;
}

inline void append(std::string& out, char32_t cp) {
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

}  // namespace utf8

namespace detail {

// Simple one-to-one case folding for ASCII, Latin-1, Latin Extended-A,
// Greek and Cyrillic. Anything else folds to itself.
constexpr char32_t fold(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 0x20;
  if (c >= 0x100 && c <= 0x137) return c | 1;
  if (c >= 0x139 && c <= 0x148) return (c & 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c | 1;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c & 1) ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

constexpr bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0xA0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200B) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

constexpr bool is_word(char32_t c) {
  if (c < 0x80) {
    return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
  }
  if (c == utf8::kReplacement) return false;
  if (c <= 0xBF) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, symbols, arrows
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if (c >= 0xFF00 && c <= 0xFF0F) return false;
  return !is_space(c);
}

// Apostrophes and hyphens that stay inside a word when flanked by word
// characters: it'll, it’ll, well-known.
constexpr bool is_joiner(char32_t c) {
  return c == U'\'' || c == U'-' || c == 0x2019 || c == 0x2010 || c == 0x2011;
}

constexpr bool is_upper(char32_t c) { return fold(c) != c; }

inline std::string fold_string(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    const auto cp = utf8::decode(s, pos);
    if (cp.value == utf8::kReplacement && cp.length == 1) {
      out += s[pos];
    } else {
      utf8::append(out, fold(cp.value));
    }
    pos += cp.length;
  }
  return out;
}

// `{NAME}`-style anonymization placeholder starting at `pos`; returns its
// byte length or 0.
inline std::size_t placeholder_length(std::string_view text, std::size_t pos) {
  if (text[pos] != '{') return 0;
  std::size_t i = pos + 1;
  bool any = false;
  while (i < text.size() && text[i] != '}') {
    const auto cp = utf8::decode(text, i);
    if (!is_word(cp.value) && cp.value != U'_') return 0;
    any = true;
    i += cp.length;
  }
  if (!any || i >= text.size()) return 0;
  return i + 1 - pos;
}

}  // namespace detail

/// Case-folded form used for all matching.
inline std::string normalize(std::string_view surface) { return detail::fold_string(surface); }

/// Splits text into word tokens. Punctuation is dropped, word-internal
/// apostrophes and hyphens are kept, `{PLACEHOLDER}`s are single tokens.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (const auto len = detail::placeholder_length(text, pos)) {
      const auto surface = text.substr(pos, len);
      tokens.push_back({std::string(surface), normalize(surface), {pos, pos + len}});
      pos += len;
      continue;
    }
    const auto cp = utf8::decode(text, pos);
    if (!detail::is_word(cp.value)) {
      pos += cp.length;
      continue;
    }
    const std::size_t begin = pos;
    pos += cp.length;
    while (pos < text.size()) {
      const auto next = utf8::decode(text, pos);
      if (detail::is_word(next.value)) {
        pos += next.length;
        continue;
      }
      if (detail::is_joiner(next.value) && pos + next.length < text.size()) {
        const auto after = utf8::decode(text, pos + next.length);
        if (detail::is_word(after.value)) {
          pos += next.length + after.length;
          continue;
        }
      }
      break;
    }
    const auto surface = text.substr(begin, pos - begin);
    tokens.push_back({std::string(surface), normalize(surface), {begin, pos}});
  }
  return tokens;
}

namespace detail {

inline bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == 0x2026; }

inline bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == 0x201D || c == 0x2019;
}

inline bool is_opener(char32_t c) {
  return c == U'"' || c == U'\'' || c == 0x201C || c == 0x2018 || c == U'{';
}

inline bool is_abbreviation(std::string_view word) {
  static constexpr std::array<std::string_view, 16> kAbbreviations{
      "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e",
      "a.m", "p.m", "no", "approx"};
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

// The ASCII word (letters and inner dots) that ends right before `dot`.
inline std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0) {
    const char c = text[b - 1];
    const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (!letter && c != '.') break;
    --b;
  }
  std::string word(text.substr(b, dot - b));
  for (auto& c : word) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 0x20);
  }
  return word;
}

}  // namespace detail

/// Sentence spans of `text`. A boundary is a run of `.`/`!`/`?`/`…` (plus
/// closing quotes or brackets) followed by whitespace and then a capital,
/// an opening quote or a placeholder. A single `.` after a listed
/// abbreviation is not a boundary. Spans exclude surrounding whitespace and
/// together cover every non-whitespace byte exactly once.
inline std::vector<Span> split_sentences(std::string_view text) {
  std::vector<Span> spans;
  auto skip_space = [&](std::size_t pos) {
    while (pos < text.size()) {
      const auto cp = utf8::decode(text, pos);
      if (!detail::is_space(cp.value)) break;
      pos += cp.length;
    }
    return pos;
  };
  auto close_span = [&](std::size_t begin, std::size_t end) {
    // Trim trailing whitespace.
    std::size_t e = end;
    while (e > begin) {
      std::size_t p = e - 1;
      while (p > begin && (static_cast<unsigned char>(text[p]) & 0xC0) == 0x80) --p;
      if (!detail::is_space(utf8::decode(text, p).value)) break;
      e = p;
    }
    if (e > begin) spans.push_back({begin, e});
  };

  std::size_t start = skip_space(0);
  std::size_t pos = start;
  while (pos < text.size()) {
    const auto cp = utf8::decode(text, pos);
    if (!detail::is_terminator(cp.value)) {
      pos += cp.length;
      continue;
    }
    const std::size_t mark = pos;
    std::size_t run = 0;
    std::size_t end = pos;
    while (end < text.size()) {
      const auto next = utf8::decode(text, end);
      if (!detail::is_terminator(next.value)) break;
      end += next.length;
      ++run;
    }
    while (end < text.size()) {
      const auto next = utf8::decode(text, end);
      if (!detail::is_closer(next.value)) break;
      end += next.length;
    }
    pos = end;
    if (end >= text.size()) break;
    if (!detail::is_space(utf8::decode(text, end).value)) continue;
    const std::size_t next_start = skip_space(end);
    if (next_start >= text.size()) break;
    const auto lead = utf8::decode(text, next_start).value;
    if (!detail::is_upper(lead) && !detail::is_opener(lead)) continue;
    if (run == 1 && text[mark] == '.' && detail::is_abbreviation(detail::word_before(text, mark))) {
      continue;
    }
    close_span(start, end);
    start = next_start;
    pos = next_start;
  }
  if (start < text.size()) close_span(start, text.size());
  return spans;
}

}  // namespace turnlens
