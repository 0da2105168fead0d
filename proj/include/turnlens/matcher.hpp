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

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "turnlens/corpus.hpp"
#include "turnlens/lexicon.hpp"

namespace turnlens {

/// One term match: the provenance atom behind every score.
struct OccurrenceRecord {
  std::string model;
  Term term;
  SentenceRef sentence;
  std::size_t token_begin = 0;  // [token_begin, token_end) within the sentence
  std::size_t token_end = 0;
  Span chars;                   // byte span in the turn text
  double weight = 0.0;

  bool operator==(const OccurrenceRecord&) const = default;
};

/// Term list compiled for matching: candidates are bucketed by first word
/// and tried longest first.
class TermMatcher {
 public:
  TermMatcher(std::string model_name, const TermWeights& terms) : model_(std::move(model_name)) {
    for (const auto& [term, weight] : terms) index_[term.words.front()].push_back({term, weight});
    for (auto& [_, bucket] : index_) {
      std::sort(bucket.begin(), bucket.end(), [](const Entry& a, const Entry& b) {
        if (a.term.size() != b.term.size()) return a.term.size() > b.term.size();
        return a.term < b.term;
      });
    }
  }

  template <typename Model>
  explicit TermMatcher(const Model& model) : TermMatcher(model.name, model.terms) {}

  const std::string& model() const { return model_; }

  /// Greedy left-to-right scan taking the longest term at each position.
  /// Matches never overlap; repeated terms are reported each time.
  std::vector<OccurrenceRecord> match(const Sentence& sentence) const {
    std::vector<OccurrenceRecord> out;
    const auto& tokens = sentence.tokens;
    std::size_t i = 0;
    while (i < tokens.size()) {
      const Entry* hit = nullptr;
      if (auto it = index_.find(tokens[i].normalized); it != index_.end()) {
        for (const auto& entry : it->second) {
          if (matches_at(tokens, i, entry.term)) {
            hit = &entry;
            break;
          }
        }
      }
      if (!hit) {
        ++i;
        continue;
      }
      const std::size_t end = i + hit->term.size();
      out.push_back({model_, hit->term, sentence.ref(), i, end,
                     {tokens[i].span.begin, tokens[end - 1].span.end}, hit->weight});
      i = end;
    }
    return out;
  }

 private:
  struct Entry {
    Term term;
    double weight;
  };

  static bool matches_at(const std::vector<Token>& tokens, std::size_t at, const Term& term) {
    if (at + term.size() > tokens.size()) return false;
    for (std::size_t k = 0; k < term.size(); ++k) {
      if (tokens[at + k].normalized != term.words[k]) return false;
    }
    return true;
  }

  std::string model_;
  std::unordered_map<std::string, std::vector<Entry>> index_;
};

/// Occurrences of `model`'s terms in `sentence`. Works for concept and
/// attitude models alike.
template <typename Model>
std::vector<OccurrenceRecord> match_terms(const Sentence& sentence, const Model& model) {
  return TermMatcher(model).match(sentence);
}

}  // namespace turnlens
