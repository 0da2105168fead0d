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

// Query and command layer shared by the CLI and the HTTP service. Results
// are JSON documents; numbers always travel with the snapshot id that
// produced them.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "turnlens/analytics.hpp"
#include "turnlens/project.hpp"

namespace turnlens {

inline constexpr std::string_view kDefaultGroupBy = kCulturalAreaKey;

/// Per-respondent values of a named variable. `concept:NAME` (or a bare
/// concept name) is the concept's importance; `attitude:COL` (or a bare
/// P/N/H/polarity/intensity/skepticism) is the respondent attitude score.
inline std::map<std::string, double> respondent_variable(const Project& p, const std::string& name) {
  std::string kind;
  std::string key = name;
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    kind = name.substr(0, colon);
    key = name.substr(colon + 1);
  }
  const auto& cols = attitude_columns();
  const bool is_attitude_col = std::find(cols.begin(), cols.end(), key) != cols.end();
  if (kind.empty()) kind = p.models.concepts.contains(key) ? "concept" : (is_attitude_col ? "attitude" : "");
  std::map<std::string, double> out;
  if (kind == "concept") {
    if (!p.models.concepts.contains(key)) throw Error(ErrorKind::UnknownModel, "no concept '" + key + "'");
    const auto& s = p.current_snapshot();
    for (const auto& interview : p.corpus) out[interview.id] = concept_importance(p.corpus, s.assignments, key, interview.id);
    return out;
  }
  if (kind == "attitude" && is_attitude_col) {
    const auto attitudes = p.models.attitude_list();
    for (const auto& s : attitude_scores(p.corpus, attitudes, ScoreLevel::Respondent)) out[s.subject] = attitude_value(s, key);
    return out;
  }
  throw Error(ErrorKind::NotFound, "unknown variable '" + name + "'");
}

/// Explanation of any exported cell, tagged with the current snapshot.
inline Explanation explain(const Project& p, const CellRef& ref, const std::string& group_by = std::string(kDefaultGroupBy)) {
  Explanation ex;
  if (ref.table == "stats") {
    ex = explain_stats(p.corpus, group_by, ref);
    ex.snapshot_id = p.snapshot ? p.snapshot->id : snapshot_id(p);
    return ex;
  }
  const auto& s = p.current_snapshot();
  const auto concepts = p.models.concept_list();
  const auto attitudes = p.models.attitude_list();
  if (ref.table == "mentions") {
    ex = explain_mention(p.corpus, s.assignments, concepts, group_by, ref);
  } else if (ref.table == "importance") {
    ex = explain_importance(p.corpus, s.assignments, ref);
  } else if (ref.table == "assignments") {
    ex = explain_assignment(s.assignments, ref);
  } else if (ref.table == "attitudes") {
    ex = explain_attitude(p.corpus, attitudes, group_by, ScoreLevel::Group, ref);
  } else if (ref.table == "respondents") {
    ex = explain_attitude(p.corpus, attitudes, group_by, ScoreLevel::Respondent, ref);
  } else {
    throw Error(ErrorKind::NotFound, "no table '" + ref.table + "'");
  }
  ex.snapshot_id = s.id;
  return ex;
}

/// A project behind a reader/writer lock: one writer (edits, recluster),
/// any number of concurrent readers. When bound to a directory, every
/// mutation is persisted before it is acknowledged.
class Workbench {
 public:
  explicit Workbench(Project project, std::optional<std::filesystem::path> dir = std::nullopt)
      : project_(std::move(project)), dir_(std::move(dir)) {}

  Project snapshot_project() const {
    std::shared_lock lock(mu_);
    return project_;
  }

  nlohmann::json project_info() const {
    std::shared_lock lock(mu_);
    std::size_t turns = 0, sentences = 0;
    for (const auto& i : project_.corpus) {
      turns += i.turns.size();
      for (const auto& t : i.turns) sentences += t.sentences.size();
    }
    nlohmann::json concepts = nlohmann::json::array();
    for (const auto& [name, m] : project_.models.concepts) concepts.push_back(model_json(m));
    nlohmann::json attitudes = nlohmann::json::array();
    for (const auto& [name, m] : project_.models.attitudes) attitudes.push_back(model_json(m));
    return {{"engine_version", project_.engine_version},
            {"interviews", project_.corpus.size()},
            {"turns", turns},
            {"sentences", sentences},
            {"concepts", concepts},
            {"attitudes", attitudes},
            {"log_position", project_.log.size()},
            {"snapshot_id", project_.snapshot ? nlohmann::json(project_.snapshot->id) : nlohmann::json()},
            {"stale", !project_.fresh()},
            {"background", project_.background_ref}};
  }

  nlohmann::json clusters() const {
    std::shared_lock lock(mu_);
    const auto& s = project_.current_snapshot();
    const auto members = cluster_members(s.assignments);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [name, m] : project_.models.concepts) {
      const auto it = members.find(name);
      list.push_back({{"name", name},
                      {"priority", m.priority},
                      {"members", it == members.end() ? 0 : it->second.size()},
                      {"terms", m.terms.size()}});
    }
    const auto un = members.find(std::string(kUnclustered));
    return {{"clusters", list},
            {"unclustered", un == members.end() ? 0 : un->second.size()},
            {"snapshot_id", s.id}};
  }

  nlohmann::json cluster_sentences(const std::string& name) const {
    std::shared_lock lock(mu_);
    if (name != kUnclustered && !project_.models.concepts.contains(name)) {
      throw Error(ErrorKind::UnknownModel, "no concept '" + name + "'");
    }
    const auto& s = project_.current_snapshot();
    nlohmann::json sentences = nlohmann::json::array();
    for (const auto& a : s.assignments) {
      if (a.label != name) continue;
      const auto& turn = find_turn(a.sentence.turn());
      const auto& sentence = turn.sentences.at(a.sentence.sentence_index);
      nlohmann::json occ = nlohmann::json::array();
      for (const auto& o : a.support) occ.push_back(to_json(o));
      sentences.push_back({{"interview_id", a.sentence.interview_id},
                           {"turn_index", a.sentence.turn_index},
                           {"sentence_index", a.sentence.sentence_index},
                           {"text", std::string(turn.sentence_text(sentence))},
                           {"sentence_char_begin", sentence.span.begin},
                           {"score", a.score},
                           {"occurrences", occ}});
    }
    return {{"name", name}, {"sentences", sentences}, {"snapshot_id", s.id}};
  }

  /// Applies and logs an edit; returns the new edit-log position.
  std::size_t edit(Edit e) {
    std::unique_lock lock(mu_);
    Project next = project_;
    const auto pos = next.commit(std::move(e));
    persist(next);
    project_ = std::move(next);
    return pos;
  }

  nlohmann::json recluster() {
    std::unique_lock lock(mu_);
    const std::string before = project_.snapshot ? project_.snapshot->id : std::string();
    Project next = project_;
    const auto& s = turnlens::recluster(next);
    const bool changed = s.id != before;
    // Same content address: keep the published snapshot (and its creation time).
    if (!changed) next.snapshot->created = project_.snapshot->created;
    persist(next);
    project_ = std::move(next);
    return {{"snapshot_id", project_.snapshot->id},
            {"changed", changed},
            {"log_position", project_.log.size()}};
  }

  nlohmann::json suggest(const std::string& concept_name, std::size_t k) const {
    std::shared_lock lock(mu_);
    const auto it = project_.models.concepts.find(concept_name);
    if (it == project_.models.concepts.end()) throw Error(ErrorKind::UnknownModel, "no concept '" + concept_name + "'");
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : suggest_terms(it->second, project_.require_background(), k)) {
      list.push_back({{"term", s.term}, {"similarity", s.similarity}, {"anchor", s.anchor}});
    }
    return {{"concept", concept_name}, {"suggestions", list}, {"log_position", project_.log.size()}};
  }

  nlohmann::json discover(std::size_t max_proposals) const {
    std::shared_lock lock(mu_);
    const auto& s = project_.current_snapshot();
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : discover_clusters(project_.corpus, s.assignments, project_.require_background(), max_proposals)) {
      nlohmann::json companions = nlohmann::json::array();
      for (const auto& c : p.companions) companions.push_back(c.term);
      list.push_back({{"seed", p.seed}, {"salience", p.salience}, {"members", p.members.size()}, {"companions", companions}});
    }
    return {{"proposals", list}, {"snapshot_id", s.id}};
  }

  nlohmann::json stats(const std::string& group_by) const {
    std::shared_lock lock(mu_);
    return to_json(descriptive_stats(project_.corpus, group_by), current_id());
  }

  nlohmann::json mentions(const std::string& group_by) const {
    std::shared_lock lock(mu_);
    const auto& s = project_.current_snapshot();
    const auto concepts = project_.models.concept_list();
    return to_json(mention_rates(project_.corpus, s.assignments, concepts, group_by), s.id);
  }

  nlohmann::json attitudes(const std::string& group_by, ScoreLevel level) const {
    std::shared_lock lock(mu_);
    const auto& s = project_.current_snapshot();
    const auto models = project_.models.attitude_list();
    const auto scores = attitude_scores(project_.corpus, models, level, group_by);
    return to_json(std::span<const AttitudeScore>(scores), s.id);
  }

  nlohmann::json correlate(const std::string& x, const std::string& y) const {
    std::shared_lock lock(mu_);
    const auto& s = project_.current_snapshot();
    return to_json(turnlens::correlate(respondent_variable(project_, x), respondent_variable(project_, y), x, y), s.id);
  }

  nlohmann::json explain(const std::string& ref, const std::string& group_by) const {
    std::shared_lock lock(mu_);
    return to_json(turnlens::explain(project_, CellRef::parse(ref), group_by));
  }

  nlohmann::json log() const {
    std::shared_lock lock(mu_);
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < project_.log.size(); ++i) {
      nlohmann::json e = project_.log[i];
      e["seq"] = i + 1;
      entries.push_back(std::move(e));
    }
    return {{"entries", entries}, {"log_position", project_.log.size()}};
  }

 private:
  template <typename Model>
  static nlohmann::json model_json(const Model& m) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [t, w] : m.terms) terms.push_back({{"term", t.str()}, {"weight", w}});
    nlohmann::json j{{"name", m.name}, {"terms", terms}};
    if constexpr (std::is_same_v<Model, ConceptModel>) {
      j["priority"] = m.priority;
    } else {
      j["class"] = to_string(to_model_class(m.polarity_class));
    }
    return j;
  }

  std::string current_id() const { return project_.snapshot ? project_.snapshot->id : snapshot_id(project_); }

  const Turn& find_turn(const TurnRef& ref) const {
    for (const auto& i : project_.corpus) {
      if (i.id == ref.interview_id) return i.turns.at(ref.turn_index);
    }
    throw Error(ErrorKind::NotFound, "no interview '" + ref.interview_id + "'");
  }

  void persist(const Project& p) const {
    if (dir_) save_project(p, *dir_);
  }

  mutable std::shared_mutex mu_;
  Project project_;
  std::optional<std::filesystem::path> dir_;
};

}  // namespace turnlens
