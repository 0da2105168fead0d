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

// Distributional statistics from a reference corpus and the related-term
// suggestions built on them. Vectors are PPMI-weighted co-occurrence rows;
// similarity is their cosine.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "turnlens/error.hpp"
#include "turnlens/format.hpp"
#include "turnlens/lexicon.hpp"
#include "turnlens/text.hpp"

namespace turnlens {

/// English function words. Applied when proposing clusters and suggesting
/// terms, never when matching analyst models.
inline bool is_stopword(std::string_view word) {
  static const std::set<std::string_view> kStop{
      "a", "about", "above", "after", "again", "all", "also", "am", "an", "and", "any", "are", "as",
      "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
      "can", "could", "did", "do", "does", "doing", "don't", "down", "during", "each", "even",
      "few", "for", "from", "further", "get", "got", "had", "has", "have", "having", "he", "her",
      "here", "hers", "herself", "him", "himself", "his", "how", "i", "i'm", "i've", "if", "in",
      "into", "is", "it", "it's", "its", "itself", "just", "know", "like", "me", "mean", "more",
      "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "oh", "on", "once", "only",
      "or", "other", "our", "ours", "ourselves", "out", "over", "own", "really", "same", "she",
      "should", "so", "some", "such", "than", "that", "that's", "the", "their", "theirs", "them",
      "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
      "um", "uh", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where",
      "which", "while", "who", "whom", "why", "will", "with", "would", "yeah", "yes", "you",
      "your", "yours", "yourself", "yourselves"};
  return kStop.contains(word);
}

inline constexpr int kDefaultWindow = 2;

struct BackgroundStats {
  std::vector<std::string> words;                          // id -> word, sorted
  std::vector<std::uint64_t> unigram;                      // id -> count
  std::vector<std::map<std::uint32_t, std::uint64_t>> cooc;  // symmetric sparse rows
  std::uint64_t total = 0;
  int window = kDefaultWindow;

  std::size_t vocabulary_size() const { return words.size(); }

  std::optional<std::uint32_t> find(std::string_view word) const {
    auto it = std::lower_bound(words.begin(), words.end(), word,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == words.end() || *it != word) return std::nullopt;
    return static_cast<std::uint32_t>(it - words.begin());
  }

  std::uint64_t count(std::string_view word) const {
    const auto id = find(word);
    return id ? unigram[*id] : 0;
  }

  std::uint64_t cooccurrence(std::string_view a, std::string_view b) const {
    const auto ia = find(a);
    const auto ib = find(b);
    if (!ia || !ib) return 0;
    auto it = cooc[*ia].find(*ib);
    return it == cooc[*ia].end() ? 0 : it->second;
  }

  bool operator==(const BackgroundStats&) const = default;
};

/// Counts unigrams and word pairs at most `window` positions apart within a
/// sentence. Each position pair counts once; the matrix is stored in both
/// directions.
inline BackgroundStats build_background(const std::vector<std::vector<std::string>>& sentences,
                                        int window = kDefaultWindow) {
  if (window < 1) throw Error(ErrorKind::InvalidArgument, "window must be at least 1");
  std::set<std::string_view> vocab;
  for (const auto& s : sentences) vocab.insert(s.begin(), s.end());
  if (vocab.empty()) throw Error(ErrorKind::EmptyCorpus, "reference corpus has no tokens");

  BackgroundStats stats;
  stats.window = window;
  stats.words.assign(vocab.begin(), vocab.end());
  stats.unigram.assign(stats.words.size(), 0);
  stats.cooc.resize(stats.words.size());
  std::unordered_map<std::string_view, std::uint32_t> ids;
  for (std::uint32_t i = 0; i < stats.words.size(); ++i) ids.emplace(stats.words[i], i);

  std::vector<std::uint32_t> row;
  for (const auto& s : sentences) {
    row.clear();
    for (const auto& w : s) row.push_back(ids.at(w));
    for (std::size_t i = 0; i < row.size(); ++i) {
      ++stats.unigram[row[i]];
      ++stats.total;
      const std::size_t last = std::min(row.size(), i + static_cast<std::size_t>(window) + 1);
      for (std::size_t j = i + 1; j < last; ++j) {
        ++stats.cooc[row[i]][row[j]];
        if (row[i] != row[j]) ++stats.cooc[row[j]][row[i]];
      }
    }
  }
  return stats;
}

/// Tokenized sentences of plain text. Paragraphs (blank-line separated) are
/// split into sentences independently.
inline std::vector<std::vector<std::string>> reference_sentences(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find("\n\n", pos);
    if (end == std::string_view::npos) end = text.size();
    const auto para = text.substr(pos, end - pos);
    for (const auto& span : split_sentences(para)) {
      std::vector<std::string> words;
      for (auto& tok : tokenize(para.substr(span.begin, span.size()))) {
        words.push_back(std::move(tok.normalized));
      }
      if (!words.empty()) out.push_back(std::move(words));
    }
    pos = end + 2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr std::string_view kBackgroundMagic = "turnlens-background";
inline constexpr int kBackgroundVersion = 1;

inline std::string to_text(const BackgroundStats& stats) {
  std::string out = std::string(kBackgroundMagic) + " " + std::to_string(kBackgroundVersion) + "\n";
  out += "window " + std::to_string(stats.window) + "\n";
  out += "total " + std::to_string(stats.total) + "\n";
  out += "vocabulary " + std::to_string(stats.words.size()) + "\n";
  for (std::size_t i = 0; i < stats.words.size(); ++i) {
    out += stats.words[i] + "\t" + std::to_string(stats.unigram[i]) + "\n";
  }
  std::size_t pairs = 0;
  for (std::uint32_t i = 0; i < stats.cooc.size(); ++i) {
    for (const auto& [j, _] : stats.cooc[i]) pairs += j >= i;
  }
  out += "pairs " + std::to_string(pairs) + "\n";
  for (std::uint32_t i = 0; i < stats.cooc.size(); ++i) {
    for (const auto& [j, c] : stats.cooc[i]) {
      if (j >= i) out += std::to_string(i) + "\t" + std::to_string(j) + "\t" + std::to_string(c) + "\n";
    }
  }
  return out;
}

inline BackgroundStats background_from_text(std::string_view text) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= text.size()) throw Error(ErrorKind::BackgroundUnavailable, "truncated background file");
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  auto fields = [](std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t p = 0;
    while (true) {
      const auto sep = line.find_first_of(" \t", p);
      out.push_back(line.substr(p, sep - p));
      if (sep == std::string_view::npos) break;
      p = sep + 1;
    }
    return out;
  };
  auto keyed = [&](std::string_view key) {
    const auto f = fields(next_line());
    if (f.size() != 2 || f[0] != key) {
      throw Error(ErrorKind::BackgroundUnavailable, "expected '" + std::string(key) + "' line");
    }
    return parse_integer<std::uint64_t>(f[1]);
  };

  try {
    const auto header = fields(next_line());
    if (header.size() != 2 || header[0] != kBackgroundMagic) {
      throw Error(ErrorKind::BackgroundUnavailable, "not a background statistics file");
    }
    if (parse_integer<int>(header[1]) != kBackgroundVersion) {
      throw Error(ErrorKind::BackgroundUnavailable, "unsupported background version " + std::string(header[1]));
    }
    BackgroundStats stats;
    stats.window = static_cast<int>(keyed("window"));
    stats.total = keyed("total");
    const auto vocab = keyed("vocabulary");
    std::uint64_t sum = 0;
    for (std::uint64_t i = 0; i < vocab; ++i) {
      const auto f = fields(next_line());
      if (f.size() != 2) throw Error(ErrorKind::BackgroundUnavailable, "bad vocabulary line");
      if (!stats.words.empty() && !(stats.words.back() < f[0])) {
        throw Error(ErrorKind::BackgroundUnavailable, "vocabulary is not sorted");
      }
      stats.words.emplace_back(f[0]);
      stats.unigram.push_back(parse_integer<std::uint64_t>(f[1]));
      sum += stats.unigram.back();
    }
    if (sum != stats.total) throw Error(ErrorKind::BackgroundUnavailable, "total does not match unigram counts");
    stats.cooc.resize(stats.words.size());
    const auto pairs = keyed("pairs");
    for (std::uint64_t k = 0; k < pairs; ++k) {
      const auto f = fields(next_line());
      if (f.size() != 3) throw Error(ErrorKind::BackgroundUnavailable, "bad pair line");
      const auto i = parse_integer<std::uint32_t>(f[0]);
      const auto j = parse_integer<std::uint32_t>(f[1]);
      const auto c = parse_integer<std::uint64_t>(f[2]);
      if (i >= stats.words.size() || j >= stats.words.size() || j < i) {
        throw Error(ErrorKind::BackgroundUnavailable, "pair index out of range");
      }
      stats.cooc[i][j] = c;
      stats.cooc[j][i] = c;
    }
    return stats;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BackgroundUnavailable) throw;
    throw Error(ErrorKind::BackgroundUnavailable, e.what());
  }
}

// ---------------------------------------------------------------------------
// Similarity

using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

/// PPMI row of `id`: max(0, log(c(x,y) N / (c(x) c(y)))) over its contexts.
inline SparseVector ppmi_row(const BackgroundStats& stats, std::uint32_t id) {
  SparseVector row;
  const double n = static_cast<double>(stats.total);
  const double cx = static_cast<double>(stats.unigram[id]);
  for (const auto& [ctx, c] : stats.cooc[id]) {
    const double cy = static_cast<double>(stats.unigram[ctx]);
    const double pmi = std::log(static_cast<double>(c) * n / (cx * cy));
    if (pmi > 0.0) row.emplace_back(ctx, pmi);
  }
  return row;
}

inline double norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [_, x] : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      s += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return s;
}

/// All PPMI rows and norms, computed once for repeated queries.
class PpmiSpace {
 public:
  explicit PpmiSpace(const BackgroundStats& stats) : stats_(&stats) {
    rows_.reserve(stats.words.size());
    norms_.reserve(stats.words.size());
    for (std::uint32_t i = 0; i < stats.words.size(); ++i) {
      rows_.push_back(ppmi_row(stats, i));
      norms_.push_back(norm(rows_.back()));
    }
  }

  const BackgroundStats& stats() const { return *stats_; }

  double cosine(std::uint32_t a, std::uint32_t b) const {
    if (norms_[a] == 0.0 || norms_[b] == 0.0) return 0.0;
    if (a == b) return 1.0;
    return std::clamp(dot(rows_[a], rows_[b]) / (norms_[a] * norms_[b]), -1.0, 1.0);
  }

 private:
  const BackgroundStats* stats_;
  std::vector<SparseVector> rows_;
  std::vector<double> norms_;
};

/// Cosine of the two words' PPMI vectors; 0 when either vector is zero.
inline double similarity(std::string_view a, std::string_view b, const BackgroundStats& stats) {
  const auto ia = stats.find(a);
  const auto ib = stats.find(b);
  if (!ia) throw Error(ErrorKind::OutOfVocabulary, "'" + std::string(a) + "' is not in the background vocabulary");
  if (!ib) throw Error(ErrorKind::OutOfVocabulary, "'" + std::string(b) + "' is not in the background vocabulary");
  const auto ra = ppmi_row(stats, *ia);
  const auto rb = ppmi_row(stats, *ib);
  const double na = norm(ra);
  const double nb = norm(rb);
  if (na == 0.0 || nb == 0.0) return 0.0;
  if (*ia == *ib) return 1.0;
  return std::clamp(dot(ra, rb) / (na * nb), -1.0, 1.0);
}

struct Suggestion {
  std::string term;
  double similarity = 0.0;  // mean of the top-3 anchor similarities
  std::string anchor;       // most similar concept word

  bool operator==(const Suggestion&) const = default;
};

inline constexpr std::size_t kAnchorTopN = 3;

/// Words that anchor suggestions for a term list: single-word terms, plus
/// the content words of multi-word terms.
inline std::set<std::string> anchor_words(const TermWeights& terms) {
  std::set<std::string> out;
  for (const auto& [term, _] : terms) {
    if (term.size() == 1) {
      out.insert(term.words.front());
      continue;
    }
    for (const auto& w : term.words) {
      if (!is_stopword(w)) out.insert(w);
    }
  }
  return out;
}

inline std::vector<Suggestion> suggest_terms(const TermWeights& terms, const PpmiSpace& space, std::size_t k) {
  if (k == 0) return {};
  const auto& stats = space.stats();
  std::vector<std::pair<std::string, std::uint32_t>> anchors;
  const auto words = anchor_words(terms);
  for (const auto& w : words) {
    if (auto id = stats.find(w)) anchors.emplace_back(w, *id);
  }
  if (anchors.empty()) return {};

  std::vector<Suggestion> out;
  std::vector<double> sims(anchors.size());
  for (std::uint32_t c = 0; c < stats.words.size(); ++c) {
    const auto& word = stats.words[c];
    if (words.contains(word) || is_stopword(word)) continue;
    for (std::size_t a = 0; a < anchors.size(); ++a) sims[a] = space.cosine(c, anchors[a].second);
    std::size_t best = 0;
    for (std::size_t a = 1; a < anchors.size(); ++a) {
      if (sims[a] > sims[best]) best = a;
    }
    auto sorted = sims;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::size_t top = std::min(kAnchorTopN, sorted.size());
    double score = 0.0;
    for (std::size_t i = 0; i < top; ++i) score += sorted[i];
    score /= static_cast<double>(top);
    if (score > 0.0) out.push_back({word, score, anchors[best].first});
  }
  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.term < b.term;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

/// Ranked related words for a model, excluding words it already contains
/// and stop words. Words with no positive similarity are not suggested.
template <typename Model>
std::vector<Suggestion> suggest_terms(const Model& model, const BackgroundStats& stats, std::size_t k) {
  if (k == 0) return {};
  return suggest_terms(model.terms, PpmiSpace(stats), k);
}

}  // namespace turnlens
