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

#include <functional>
#include <random>
#include <string>
#include <optional>
#include <utility>
#include <vector>

#include "turnlens/corpus.hpp"
#include "turnlens/error.hpp"
#include "turnlens/lexicon.hpp"

namespace fixture {

using turnlens::Role;

/// Kind of the turnlens::Error thrown by `fn`, or nullopt when none is.
inline std::optional<turnlens::ErrorKind> error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const turnlens::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline turnlens::Interview interview(const std::string& id, const std::string& area,
                                     const std::vector<std::pair<Role, std::string>>& turns) {
  turnlens::Interview iv;
  iv.id = id;
  iv.metadata["cultural_area"] = area;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    iv.turns.push_back(turnlens::make_turn(id, i, turns[i].first, turns[i].second));
  }
  return iv;
}

/// `n` space-separated copies of `word`, as one sentence.
inline std::string words(std::size_t n, const std::string& word = "word") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + word;
  return out;
}

inline turnlens::TermWeights terms(std::initializer_list<std::pair<const char*, double>> list) {
  turnlens::TermWeights out;
  for (const auto& [t, w] : list) out.emplace(turnlens::Term::parse(t), w);
  return out;
}

inline turnlens::ConceptModel concept_model(const std::string& name, std::initializer_list<std::pair<const char*, double>> list,
                                      int priority = 0) {
  return {name, terms(list), priority};
}

/// Respondent-only corpus of `sentences` random sentences drawn from
/// `vocab`, spread over interviews of `per_interview` turns with up to three
/// sentences per turn.
inline turnlens::Corpus random_corpus(std::mt19937& rng, std::size_t sentences, const std::vector<std::string>& vocab,
                                      std::size_t per_interview = 10) {
  std::uniform_int_distribution<std::size_t> len(3, 12);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<std::size_t> per_turn(1, 3);
  const char* areas[] = {"NA", "A", "W", "NE"};
  turnlens::Corpus corpus;
  std::size_t made = 0;
  while (made < sentences) {
    turnlens::Interview iv;
    iv.id = "r" + std::to_string(corpus.size() + 100);
    iv.metadata["cultural_area"] = areas[corpus.size() % 4];
    for (std::size_t t = 0; t < per_interview && made < sentences; ++t) {
      const auto q = turnlens::make_turn(iv.id, iv.turns.size(), Role::Interviewer, "What do you think?");
      iv.turns.push_back(q);
      std::string text;
      const auto k = std::min(per_turn(rng), sentences - made);
      for (std::size_t s = 0; s < k; ++s) {
        std::string sentence = "Well";
        for (std::size_t w = len(rng); w > 0; --w) sentence += " " + vocab[pick(rng)];
        text += (s ? " " : "") + sentence + ".";
        ++made;
      }
      iv.turns.push_back(turnlens::make_turn(iv.id, iv.turns.size(), Role::Respondent, text));
    }
    corpus.push_back(std::move(iv));
  }
  return corpus;
}

}  // namespace fixture
