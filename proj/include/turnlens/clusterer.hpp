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

// Hard assignment of respondent sentences to concept clusters, and
// proposals for new clusters from what is left over.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "turnlens/corpus.hpp"
#include "turnlens/lexicon.hpp"
#include "turnlens/matcher.hpp"
#include "turnlens/suggest.hpp"

namespace turnlens {

inline constexpr double kDefaultMinScore = 1.0;

struct Assignment {
  SentenceRef sentence;
  std::string label;  // concept name or kUnclustered
  double score = 0.0;
  std::vector<OccurrenceRecord> support;

  bool clustered() const { return label != kUnclustered; }
  bool operator==(const Assignment&) const = default;
};

/// Labels every respondent sentence with the concept of highest score
/// (sum of matched term weights), provided it reaches `min_score`. Ties go
/// to the lower priority number, then the lexicographically smaller name.
/// Output is ordered by sentence reference.
inline std::vector<Assignment> assign_sentences(const Corpus& corpus, std::span<const ConceptModel> concepts,
                                                double min_score = kDefaultMinScore) {
  if (!(min_score > 0.0)) throw Error(ErrorKind::InvalidArgument, "min_score must be positive");
  std::vector<const ConceptModel*> order;
  for (const auto& c : concepts) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const ConceptModel* a, const ConceptModel* b) {
    if (a->priority != b->priority) return a->priority < b->priority;
    return a->name < b->name;
  });
  std::vector<TermMatcher> matchers;
  for (const auto* c : order) matchers.emplace_back(*c);

  std::vector<Assignment> out;
  for (const auto& interview : corpus) {
    for (const auto& turn : interview.turns) {
      if (turn.role != Role::Respondent) continue;
      for (const auto& sentence : turn.sentences) {
        Assignment a{sentence.ref(), std::string(kUnclustered), 0.0, {}};
        for (const auto& m : matchers) {
          auto occ = m.match(sentence);
          double score = 0.0;
          for (const auto& o : occ) score += o.weight;
          // Strict comparison keeps the earlier (higher-precedence) concept on ties.
          if (score >= min_score && score > a.score) {
            a.label = m.model();
            a.score = score;
            a.support = std::move(occ);
          }
        }
        out.push_back(std::move(a));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Assignment& a, const Assignment& b) { return a.sentence < b.sentence; });
  return out;
}

/// Concept labels of a turn's sentences. `assignments` must be ordered by
/// sentence reference, as assign_sentences returns them.
inline std::set<std::string> turn_clusters(std::span<const Assignment> assignments, const TurnRef& turn) {
  std::set<std::string> labels;
  auto it = std::lower_bound(assignments.begin(), assignments.end(), turn,
                             [](const Assignment& a, const TurnRef& t) { return a.sentence.turn() < t; });
  for (; it != assignments.end() && it->sentence.turn() == turn; ++it) {
    if (it->clustered()) labels.insert(it->label);
  }
  return labels;
}

/// Sentences labeled with each concept.
inline std::map<std::string, std::vector<SentenceRef>> cluster_members(std::span<const Assignment> assignments) {
  std::map<std::string, std::vector<SentenceRef>> out;
  for (const auto& a : assignments) out[a.label].push_back(a.sentence);
  return out;
}

struct ClusterProposal {
  std::string seed;
  double salience = 0.0;
  std::vector<SentenceRef> members;
  std::vector<Suggestion> companions;

  bool operator==(const ClusterProposal&) const = default;
};

inline constexpr std::size_t kCompanionCount = 5;

/// Smoothed log-ratio of a word's rate among unclustered sentences to its
/// rate in the background corpus.
inline double salience(std::uint64_t local_count, std::uint64_t local_total, std::uint64_t background_count,
                       std::uint64_t background_total, std::size_t vocabulary) {
  const double v = static_cast<double>(vocabulary);
  return std::log((static_cast<double>(local_count) + 1.0) / (static_cast<double>(local_total) + v)) -
         std::log((static_cast<double>(background_count) + 1.0) / (static_cast<double>(background_total) + v));
}

inline bool has_letter(std::string_view word) {
  for (std::size_t pos = 0; pos < word.size();) {
    const auto cp = utf8::decode(word, pos);
    if (detail::is_word(cp.value) && !(cp.value >= U'0' && cp.value <= U'9')) return true;
    pos += cp.length;
  }
  return false;
}

/// Seeds for new clusters: non-stop words that are over-represented among
/// unclustered respondent sentences relative to the background, most
/// salient first.
inline std::vector<ClusterProposal> discover_clusters(const Corpus& corpus, std::span<const Assignment> assignments,
                                                      const BackgroundStats& background, std::size_t max_proposals) {
  if (background.total == 0 || background.words.empty()) {
    throw Error(ErrorKind::BackgroundUnavailable, "background statistics are empty");
  }
  if (max_proposals == 0) return {};

  std::set<SentenceRef> unclustered;
  for (const auto& a : assignments) {
    if (!a.clustered()) unclustered.insert(a.sentence);
  }
  if (unclustered.empty()) return {};

  std::map<std::string, std::uint64_t> counts;
  std::map<std::string, std::set<SentenceRef>> members;
  std::uint64_t local_total = 0;
  for (const auto& interview : corpus) {
    for (const auto& turn : interview.turns) {
      for (const auto& sentence : turn.sentences) {
        if (!unclustered.contains(sentence.ref())) continue;
        for (const auto& tok : sentence.tokens) {
          ++local_total;
          if (is_stopword(tok.normalized) || !has_letter(tok.normalized)) continue;
          ++counts[tok.normalized];
          members[tok.normalized].insert(sentence.ref());
        }
      }
    }
  }

  std::vector<ClusterProposal> out;
  for (const auto& [word, f] : counts) {
    const double s = salience(f, local_total, background.count(word), background.total, background.vocabulary_size());
    if (s > 0.0) out.push_back({word, s, {members[word].begin(), members[word].end()}, {}});
  }
  std::sort(out.begin(), out.end(), [](const ClusterProposal& a, const ClusterProposal& b) {
    if (a.salience != b.salience) return a.salience > b.salience;
    return a.seed < b.seed;
  });
  if (out.size() > max_proposals) out.resize(max_proposals);
  if (!out.empty()) {
    const PpmiSpace space(background);
    for (auto& p : out) {
      TermWeights seed_terms{{Term{{p.seed}}, 1.0}};
      p.companions = suggest_terms(seed_terms, space, kCompanionCount);
    }
  }
  return out;
}

}  // namespace turnlens
