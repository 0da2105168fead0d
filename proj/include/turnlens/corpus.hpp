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

// Interview transcripts: the Interview → Turn → Sentence → Token hierarchy,
// the TLT and JSON transcript formats, and descriptive statistics.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "turnlens/error.hpp"
#include "turnlens/format.hpp"
#include "turnlens/text.hpp"

namespace turnlens {

enum class Role { Interviewer, Respondent };

inline std::string_view to_string(Role role) {
  return role == Role::Interviewer ? "INTERVIEWER" : "RESPONDENT";
}

inline constexpr std::string_view kCulturalAreaKey = "cultural_area";
inline constexpr std::array<std::string_view, 5> kCulturalAreas{"NA", "A", "W", "NE", "OTHER"};

struct TurnRef {
  std::string interview_id;
  std::size_t turn_index = 0;

  auto operator<=>(const TurnRef&) const = default;
};

struct SentenceRef {
  std::string interview_id;
  std::size_t turn_index = 0;
  std::size_t sentence_index = 0;

  TurnRef turn() const { return {interview_id, turn_index}; }
  auto operator<=>(const SentenceRef&) const = default;
};

struct Sentence {
  std::string interview_id;
  std::size_t turn_index = 0;
  std::size_t index = 0;
  Span span;  // byte offsets into the owning turn's text
  std::vector<Token> tokens;

  SentenceRef ref() const { return {interview_id, turn_index, index}; }
  bool operator==(const Sentence&) const = default;
};

struct Turn {
  std::size_t index = 0;
  Role role = Role::Respondent;
  std::string text;
  std::vector<Sentence> sentences;

  std::string_view sentence_text(const Sentence& s) const {
    return std::string_view(text).substr(s.span.begin, s.span.size());
  }
  std::size_t word_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
  }
  bool operator==(const Turn&) const = default;
};

struct Interview {
  std::string id;
  std::map<std::string, std::string> metadata;
  std::vector<Turn> turns;

  bool operator==(const Interview&) const = default;
};

using Corpus = std::vector<Interview>;

enum class TranscriptFormat { Tlt, Json };

/// Sentences of one turn, with tokens whose spans index the turn text.
inline std::vector<Sentence> segment_sentences(const Turn& turn, std::string_view interview_id = {}) {
  std::vector<Sentence> out;
  const std::string_view text = turn.text;
  for (const auto& span : split_sentences(text)) {
    Sentence s;
    s.interview_id = std::string(interview_id);
    s.turn_index = turn.index;
    s.index = out.size();
    s.span = span;
    s.tokens = tokenize(text.substr(span.begin, span.size()));
    for (auto& tok : s.tokens) {
      tok.span.begin += span.begin;
      tok.span.end += span.begin;
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline Turn make_turn(std::string_view interview_id, std::size_t index, Role role, std::string text) {
  Turn turn{index, role, std::move(text), {}};
  turn.sentences = segment_sentences(turn, interview_id);
  return turn;
}

namespace detail {

inline Role parse_role(std::string_view label) {
  if (label == "INTERVIEWER") return Role::Interviewer;
  if (label == "RESPONDENT") return Role::Respondent;
  throw Error(ErrorKind::MalformedTranscript, "unknown speaker label '" + std::string(label) + "'");
}

inline void canonicalize_metadata(Interview& interview, std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(interview.id + ": " + std::move(msg));
  };
  auto it = interview.metadata.find(std::string(kCulturalAreaKey));
  if (it == interview.metadata.end()) {
    warn("no cultural_area given; using OTHER");
    interview.metadata[std::string(kCulturalAreaKey)] = "OTHER";
    return;
  }
  std::string area(trim(it->second));
  for (auto& c : area) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 0x20);
  }
  if (std::find(kCulturalAreas.begin(), kCulturalAreas.end(), area) == kCulturalAreas.end()) {
    warn("unknown cultural_area '" + it->second + "'; using OTHER");
    area = "OTHER";
  }
  it->second = area;
}

inline Interview parse_tlt(std::string_view raw, std::string_view fallback_id) {
  Interview interview;
  std::vector<std::pair<Role, std::string>> turns;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos <= raw.size();) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    const auto line = trim(raw.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no);
    if (line.front() == '#') {
      if (!turns.empty()) {
        throw Error(ErrorKind::MalformedTranscript, where + ": metadata after the first turn");
      }
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) {
        throw Error(ErrorKind::MalformedTranscript, where + ": metadata line needs '#key: value'");
      }
      const std::string key(trim(line.substr(1, colon - 1)));
      const std::string value(trim(line.substr(colon + 1)));
      if (key.empty()) throw Error(ErrorKind::MalformedTranscript, where + ": empty metadata key");
      if (key == "id") {
        interview.id = value;
      } else {
        interview.metadata[key] = value;
      }
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::MalformedTranscript, where + ": missing speaker label");
    }
    try {
      turns.emplace_back(parse_role(trim(line.substr(0, colon))),
                         std::string(trim(line.substr(colon + 1))));
    } catch (const Error&) {
      throw Error(ErrorKind::MalformedTranscript, where + ": missing speaker label");
    }
  }
  if (turns.empty()) throw Error(ErrorKind::MalformedTranscript, "transcript has no turns");
  if (interview.id.empty()) interview.id = fallback_id.empty() ? "interview" : std::string(fallback_id);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    interview.turns.push_back(make_turn(interview.id, i, turns[i].first, std::move(turns[i].second)));
  }
  return interview;
}

inline Interview parse_json(std::string_view raw, std::string_view fallback_id) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedTranscript, std::string("invalid JSON: ") + e.what());
  }
  try {
    Interview interview;
    interview.id = doc.value("id", std::string(fallback_id));
    if (interview.id.empty()) interview.id = "interview";
    if (doc.contains("metadata")) {
      for (const auto& [k, v] : doc.at("metadata").items()) {
        interview.metadata[k] = v.get<std::string>();
      }
    }
    const auto& turns = doc.at("turns");
    if (!turns.is_array() || turns.empty()) {
      throw Error(ErrorKind::MalformedTranscript, "transcript has no turns");
    }
    std::map<std::size_t, std::pair<Role, std::string>> by_index;
    for (std::size_t i = 0; i < turns.size(); ++i) {
      const auto& t = turns[i];
      if (!t.contains("role")) {
        throw Error(ErrorKind::MalformedTranscript, "turn " + std::to_string(i) + ": missing speaker label");
      }
      const auto index = t.value("index", i);
      auto [it, fresh] = by_index.try_emplace(
          index, parse_role(t.at("role").get<std::string>()), t.value("text", std::string()));
      if (!fresh) {
        throw Error(ErrorKind::MalformedTranscript, "duplicate turn index " + std::to_string(index));
      }
    }
    if (by_index.rbegin()->first != by_index.size() - 1) {
      throw Error(ErrorKind::MalformedTranscript, "turn indices are not contiguous from 0");
    }
    for (auto& [index, turn] : by_index) {
      interview.turns.push_back(make_turn(interview.id, index, turn.first, std::move(turn.second)));
    }
    return interview;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedTranscript, std::string("bad transcript JSON: ") + e.what());
  }
}

}  // namespace detail

/// Parses one transcript. Unknown or missing cultural areas become OTHER and
/// are reported through `warnings` rather than failing the parse.
inline Interview parse_transcript(std::string_view raw, TranscriptFormat format,
                                  std::string_view fallback_id = {},
                                  std::vector<std::string>* warnings = nullptr) {
  if (trim(raw).empty()) throw Error(ErrorKind::MalformedTranscript, "empty transcript");
  if (!utf8::valid(raw)) throw Error(ErrorKind::MalformedTranscript, "input is not valid UTF-8");
  Interview interview = format == TranscriptFormat::Tlt ? detail::parse_tlt(raw, fallback_id)
                                                        : detail::parse_json(raw, fallback_id);
  detail::canonicalize_metadata(interview, warnings);
  return interview;
}

/// TLT rendering. Turn text is written on one line; embedded newlines are
/// folded to spaces since the format is line oriented.
inline std::string to_tlt(const Interview& interview) {
  std::string out = "#id: " + interview.id + "\n";
  for (const auto& [k, v] : interview.metadata) out += "#" + k + ": " + v + "\n";
  for (const auto& turn : interview.turns) {
    std::string text = turn.text;
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '\r', ' ');
    out += std::string(to_string(turn.role)) + ": " + text + "\n";
  }
  return out;
}

inline nlohmann::json to_json(const Interview& interview) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : interview.turns) {
    turns.push_back({{"index", t.index}, {"role", to_string(t.role)}, {"text", t.text}});
  }
  return {{"id", interview.id}, {"metadata", interview.metadata}, {"turns", std::move(turns)}};
}

// ---------------------------------------------------------------------------
// Descriptive statistics

struct StatsRow {
  std::string group;
  std::size_t interviews = 0;
  std::size_t words = 0;
  std::size_t turns = 0;
  double turn_length = 0.0;        // mean words per turn
  double interview_length = 0.0;   // mean turns per interview

  bool operator==(const StatsRow&) const = default;
};

struct StatsTable {
  std::string group_by;
  std::vector<StatsRow> rows;  // groups in lexicographic order, then "all"

  const StatsRow* find(std::string_view group) const {
    for (const auto& r : rows) {
      if (r.group == group) return &r;
    }
    return nullptr;
  }
};

inline constexpr std::string_view kAllGroup = "all";

inline const std::string& group_of(const Interview& interview, const std::string& key) {
  auto it = interview.metadata.find(key);
  if (it == interview.metadata.end()) {
    throw Error(ErrorKind::MissingMetadata, "interview '" + interview.id + "' has no '" + key + "'");
  }
  return it->second;
}

inline StatsRow finish_stats_row(std::string group, std::size_t interviews, std::size_t words,
                                 std::size_t turns) {
  StatsRow row{std::move(group), interviews, words, turns, 0.0, 0.0};
  if (turns) row.turn_length = static_cast<double>(words) / static_cast<double>(turns);
  if (interviews) row.interview_length = static_cast<double>(turns) / static_cast<double>(interviews);
  return row;
}

/// Counts over all turns of both speakers. Words are tokens.
inline StatsTable descriptive_stats(const Corpus& corpus, const std::string& group_by) {
  struct Acc {
    std::size_t interviews = 0, words = 0, turns = 0;
  };
  std::map<std::string, Acc> groups;
  Acc all;
  for (const auto& interview : corpus) {
    auto& acc = groups[group_of(interview, group_by)];
    std::size_t words = 0;
    for (const auto& turn : interview.turns) words += turn.word_count();
    for (Acc* a : {&acc, &all}) {
      a->interviews += 1;
      a->words += words;
      a->turns += interview.turns.size();
    }
  }
  StatsTable table{group_by, {}};
  for (const auto& [name, acc] : groups) {
    table.rows.push_back(finish_stats_row(name, acc.interviews, acc.words, acc.turns));
  }
  table.rows.push_back(finish_stats_row(std::string(kAllGroup), all.interviews, all.words, all.turns));
  return table;
}

inline const std::vector<std::string>& stats_csv_header() {
  static const std::vector<std::string> header{"group", "interviews", "words", "turns",
                                               "turn_length", "interview_length"};
  return header;
}

/// CSV with means to one decimal. interview_length is turns per interview.
inline std::string stats_to_csv(const StatsTable& table, std::string_view snapshot_id) {
  auto header = stats_csv_header();
  header.emplace_back("snapshot_id");
  std::string out = csv_row(header);
  for (const auto& r : table.rows) {
    out += csv_row({r.group, std::to_string(r.interviews), std::to_string(r.words),
                    std::to_string(r.turns), format_fixed(r.turn_length, 1),
                    format_fixed(r.interview_length, 1), std::string(snapshot_id)});
  }
  return out;
}

}  // namespace turnlens
