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

// Persisted analysis state: corpus, models, the append-only edit log and
// the current assignment snapshot. Also the CSV/JSON exporters, since every
// exported number is tied to the snapshot that produced it.
//
// Directory layout:
//   meta.json           engine version, background reference, min_score
//   corpus/*.tlt        transcripts
//   models/*.model      current model set (materialized from the log)
//   log.jsonl           one edit per line, append-only
//   snapshot/           snapshot.json, assignments.csv, occurrences.csv
//   background.bg       optional copy of the background statistics

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "turnlens/analytics.hpp"
#include "turnlens/clusterer.hpp"
#include "turnlens/corpus.hpp"
#include "turnlens/format.hpp"
#include "turnlens/lexicon.hpp"
#include "turnlens/suggest.hpp"

namespace turnlens {

inline constexpr std::string_view kEngineVersion = "turnlens 1.0.0";
inline constexpr int kProjectFormat = 1;
inline constexpr std::string_view kBackgroundFile = "background.bg";

struct Snapshot {
  std::string id;
  std::vector<Assignment> assignments;
  std::string created;
  std::size_t log_position = 0;  // edit-log length the snapshot reflects

  bool operator==(const Snapshot&) const = default;
};

struct Project {
  Corpus corpus;
  ModelSet models;
  std::string background_ref;
  std::shared_ptr<const BackgroundStats> background;
  double min_score = kDefaultMinScore;
  std::optional<Snapshot> snapshot;
  std::vector<Edit> log;
  std::string engine_version{kEngineVersion};

  /// Applies the edit and appends it to the log; returns the new log length.
  /// A rejected edit leaves the project unchanged.
  std::size_t commit(Edit edit) {
    if (edit.timestamp.empty()) edit.timestamp = utc_timestamp();
    if (edit.engine_version.empty()) edit.engine_version = engine_version;
    models = apply_edit(models, edit);
    log.push_back(std::move(edit));
    return log.size();
  }

  /// Same corpus and settings, no models, no history.
  Project initial() const {
    Project p;
    p.corpus = corpus;
    p.background_ref = background_ref;
    p.background = background;
    p.min_score = min_score;
    p.engine_version = engine_version;
    return p;
  }

  bool fresh() const { return snapshot && snapshot->log_position == log.size(); }

  const Snapshot& current_snapshot() const {
    if (!snapshot) throw Error(ErrorKind::StaleAssignments, "no snapshot yet; run recluster");
    if (snapshot->log_position != log.size()) {
      throw Error(ErrorKind::StaleAssignments, "models were edited after snapshot " + snapshot->id +
                                                   "; run recluster");
    }
    return *snapshot;
  }

  const BackgroundStats& require_background() const {
    if (!background) throw Error(ErrorKind::BackgroundUnavailable, "no background statistics loaded");
    return *background;
  }

  bool operator==(const Project& o) const {
    return corpus == o.corpus && models == o.models && background_ref == o.background_ref &&
           min_score == o.min_score && snapshot == o.snapshot && log == o.log && engine_version == o.engine_version;
  }
};

/// Content address of the inputs that determine assignments.
inline std::string snapshot_id(const Project& p) {
  Fnv1a h;
  h.field(p.engine_version).field(format_exact(p.min_score));
  for (const auto& interview : p.corpus) h.field(to_tlt(interview));
  for (const auto& [_, m] : p.models.concepts) h.field(to_model_text(m));
  for (const auto& [_, m] : p.models.attitudes) h.field(to_model_text(m));
  return h.hex();
}

/// Recomputes all assignments from the current models and publishes them as
/// the project's snapshot.
inline const Snapshot& recluster(Project& p, std::string created = utc_timestamp()) {
  const auto concepts = p.models.concept_list();
  Snapshot s{snapshot_id(p), assign_sentences(p.corpus, concepts, p.min_score), std::move(created), p.log.size()};
  p.snapshot = std::move(s);
  return *p.snapshot;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayReport {
  Project project;
  std::vector<std::string> warnings;
  bool version_mismatch = false;
};

/// Applies `log` in order to `initial`. Any failing entry aborts with
/// ReplayDivergence naming it; entries written by another engine version
/// are reported but applied.
inline ReplayReport replay(const Project& initial, std::span<const Edit> log) {
  ReplayReport report{initial, {}, false};
  auto& p = report.project;
  p.snapshot.reset();
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    if (!e.engine_version.empty() && e.engine_version != p.engine_version) {
      report.version_mismatch = true;
      report.warnings.push_back("VersionMismatch: entry " + std::to_string(i + 1) + " was written by '" +
                                e.engine_version + "', replaying with '" + p.engine_version + "'");
    }
    try {
      p.models = apply_edit(p.models, e);
    } catch (const Error& err) {
      throw Error(ErrorKind::ReplayDivergence,
                  "entry " + std::to_string(i + 1) + " (" + e.describe() + ") failed: " + err.what());
    }
    p.log.push_back(e);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Exports

inline std::string assignments_csv(const Snapshot& s) {
  std::string out = csv_row({"interview_id", "turn_index", "sentence_index", "label", "score", "snapshot_id"});
  for (const auto& a : s.assignments) {
    out += csv_row({a.sentence.interview_id, std::to_string(a.sentence.turn_index),
                    std::to_string(a.sentence.sentence_index), a.label, format_exact(a.score), s.id});
  }
  return out;
}

inline std::string occurrences_csv(const Snapshot& s) {
  std::string out = csv_row({"interview_id", "turn_index", "sentence_index", "model", "term", "token_begin",
                             "token_end", "char_begin", "char_end", "weight", "snapshot_id"});
  for (const auto& a : s.assignments) {
    for (const auto& o : a.support) {
      out += csv_row({o.sentence.interview_id, std::to_string(o.sentence.turn_index),
                      std::to_string(o.sentence.sentence_index), o.model, o.term.str(), std::to_string(o.token_begin),
                      std::to_string(o.token_end), std::to_string(o.chars.begin), std::to_string(o.chars.end),
                      format_exact(o.weight), s.id});
    }
  }
  return out;
}

inline std::string mentions_csv(const MentionRateTable& t, std::string_view snapshot) {
  std::string out = csv_row({"group", "concept", "numerator", "denominator", "percent", "snapshot_id"});
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& cell = row.cells[c];
      out += csv_row({row.group, t.columns[c], std::to_string(cell.numerator), std::to_string(cell.denominator),
                      format_fixed(cell.percent, 2), std::string(snapshot)});
    }
  }
  return out;
}

inline std::string attitudes_csv(std::span<const AttitudeScore> scores, std::string_view snapshot) {
  std::string out = csv_row({"subject", "respondents", "words", "raw_positive", "raw_negative", "raw_hedge", "P", "N",
                             "H", "polarity", "intensity", "skepticism", "normalization", "snapshot_id"});
  for (const auto& s : scores) {
    out += csv_row({s.subject, std::to_string(s.respondents), std::to_string(s.words), format_fixed(s.raw_positive, 4),
                    format_fixed(s.raw_negative, 4), format_fixed(s.raw_hedge, 4), format_fixed(s.positive, 4),
                    format_fixed(s.negative, 4), format_fixed(s.hedge, 4), format_fixed(s.polarity, 4),
                    format_fixed(s.intensity, 4), format_fixed(s.skepticism, 4), "per_1000_respondent_words",
                    std::string(snapshot)});
  }
  return out;
}

inline nlohmann::json to_json(const OccurrenceRecord& o) {
  return {{"model", o.model},
          {"term", o.term.str()},
          {"interview_id", o.sentence.interview_id},
          {"turn_index", o.sentence.turn_index},
          {"sentence_index", o.sentence.sentence_index},
          {"token_begin", o.token_begin},
          {"token_end", o.token_end},
          {"char_begin", o.chars.begin},
          {"char_end", o.chars.end},
          {"weight", o.weight}};
}

inline nlohmann::json to_json(const Explanation& ex) {
  nlohmann::json occ = nlohmann::json::array();
  for (const auto& o : ex.occurrences) occ.push_back(to_json(o));
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : ex.turns) turns.push_back({{"interview_id", t.interview_id}, {"turn_index", t.turn_index}});
  return {{"ref", ex.ref},           {"snapshot_id", ex.snapshot_id}, {"value", ex.value},
          {"occurrences", occ},      {"turns", turns},                {"quantities", ex.quantities},
          {"trace", ex.trace}};
}

inline nlohmann::json to_json(const MentionRateTable& t, std::string_view snapshot) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& cell = row.cells[c];
      cells[t.columns[c]] = {{"numerator", cell.numerator}, {"denominator", cell.denominator}, {"percent", cell.percent}};
    }
    rows.push_back({{"group", row.group}, {"cells", cells}});
  }
  return {{"group_by", t.group_by}, {"columns", t.columns}, {"rows", rows}, {"snapshot_id", snapshot}};
}

inline nlohmann::json to_json(std::span<const AttitudeScore> scores, std::string_view snapshot) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : scores) {
    rows.push_back({{"subject", s.subject},       {"respondents", s.respondents}, {"words", s.words},
                    {"raw_positive", s.raw_positive}, {"raw_negative", s.raw_negative}, {"raw_hedge", s.raw_hedge},
                    {"P", s.positive},             {"N", s.negative},             {"H", s.hedge},
                    {"polarity", s.polarity},      {"intensity", s.intensity},    {"skepticism", s.skepticism}});
  }
  return {{"rows", rows}, {"normalization", "per_1000_respondent_words"}, {"snapshot_id", snapshot}};
}

inline nlohmann::json to_json(const StatsTable& t, std::string_view snapshot) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"group", r.group},         {"interviews", r.interviews},
                    {"words", r.words},         {"turns", r.turns},
                    {"turn_length", r.turn_length}, {"interview_length", r.interview_length}});
  }
  return {{"group_by", t.group_by},
          {"rows", rows},
          {"interview_length_unit", "avg turns per interview"},
          {"turn_length_unit", "avg words per turn"},
          {"snapshot_id", snapshot}};
}

inline nlohmann::json to_json(const CorrelationReport& r, std::string_view snapshot) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : r.values) values.push_back({{"respondent", v.key}, {"x", v.x}, {"y", v.y}});
  return {{"x", r.x_name},   {"y", r.y_name}, {"pearson", r.pearson}, {"spearman", r.spearman},
          {"n", r.n},        {"values", values}, {"snapshot_id", snapshot}};
}

// ---------------------------------------------------------------------------
// Persistence

namespace detail {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorKind::IoFailure, "failed writing " + path.string());
}

inline std::string safe_file_stem(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    out += ok ? c : '_';
    if (out.size() >= 40) break;
  }
  return out + "-" + Fnv1a().update(name).hex().substr(0, 8);
}

inline std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline void write_project_tree(const Project& p, const fs::path& root) {
  fs::create_directories(root / "corpus");
  fs::create_directories(root / "models");
  fs::create_directories(root / "snapshot");

  nlohmann::json meta{{"format", kProjectFormat},
                      {"engine_version", p.engine_version},
                      {"background", p.background_ref},
                      {"min_score", p.min_score}};
  write_file(root / "meta.json", meta.dump(2) + "\n");

  for (std::size_t i = 0; i < p.corpus.size(); ++i) {
    std::array<char, 16> prefix{};
    std::snprintf(prefix.data(), prefix.size(), "%05zu_", i);
    write_file(root / "corpus" / (std::string(prefix.data()) + safe_file_stem(p.corpus[i].id) + ".tlt"),
               to_tlt(p.corpus[i]));
  }
  for (const auto& [name, m] : p.models.concepts) {
    write_file(root / "models" / (safe_file_stem(name) + ".model"), to_model_text(m));
  }
  for (const auto& [name, m] : p.models.attitudes) {
    write_file(root / "models" / (safe_file_stem(name) + ".model"), to_model_text(m));
  }
  std::string log;
  for (const auto& e : p.log) log += nlohmann::json(e).dump() + "\n";
  write_file(root / "log.jsonl", log);

  if (p.snapshot) {
    const auto& s = *p.snapshot;
    nlohmann::json sj{{"id", s.id}, {"created", s.created}, {"log_position", s.log_position}};
    write_file(root / "snapshot" / "snapshot.json", sj.dump(2) + "\n");
    write_file(root / "snapshot" / "assignments.csv", assignments_csv(s));
    write_file(root / "snapshot" / "occurrences.csv", occurrences_csv(s));
  }
  if (p.background && p.background_ref == kBackgroundFile) {
    write_file(root / kBackgroundFile, to_text(*p.background));
  }
}

inline Snapshot read_snapshot(const fs::path& dir) {
  const auto sj = nlohmann::json::parse(read_file(dir / "snapshot.json"));
  Snapshot s;
  s.id = sj.at("id").get<std::string>();
  s.created = sj.at("created").get<std::string>();
  s.log_position = sj.at("log_position").get<std::size_t>();
  const auto rows = parse_csv(read_file(dir / "assignments.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 6) throw Error(ErrorKind::IoFailure, "bad assignments.csv row " + std::to_string(i));
    s.assignments.push_back({{r[0], parse_integer<std::size_t>(r[1]), parse_integer<std::size_t>(r[2])},
                             r[3],
                             parse_double(r[4]),
                             {}});
  }
  const auto occ = parse_csv(read_file(dir / "occurrences.csv"));
  for (std::size_t i = 1; i < occ.size(); ++i) {
    const auto& r = occ[i];
    if (r.size() != 11) throw Error(ErrorKind::IoFailure, "bad occurrences.csv row " + std::to_string(i));
    OccurrenceRecord o{r[3],
                       Term::parse(r[4]),
                       {r[0], parse_integer<std::size_t>(r[1]), parse_integer<std::size_t>(r[2])},
                       parse_integer<std::size_t>(r[5]),
                       parse_integer<std::size_t>(r[6]),
                       {parse_integer<std::size_t>(r[7]), parse_integer<std::size_t>(r[8])},
                       parse_double(r[9])};
    auto it = std::lower_bound(s.assignments.begin(), s.assignments.end(), o.sentence,
                               [](const Assignment& a, const SentenceRef& ref) { return a.sentence < ref; });
    if (it == s.assignments.end() || it->sentence != o.sentence) {
      throw Error(ErrorKind::IoFailure, "occurrence for unknown sentence in occurrences.csv row " + std::to_string(i));
    }
    it->support.push_back(std::move(o));
  }
  return s;
}

}  // namespace detail

/// Writes the project to `path` via a sibling temporary directory that is
/// renamed into place, so readers never see a half-written project.
inline void save_project(const Project& p, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  try {
    const fs::path target = fs::absolute(path).lexically_normal();
    const fs::path parent = target.parent_path();
    fs::create_directories(parent);
    const fs::path tmp = parent / ("." + target.filename().string() + ".tmp");
    const fs::path old = parent / ("." + target.filename().string() + ".old");
    fs::remove_all(tmp);
    fs::remove_all(old);
    detail::write_project_tree(p, tmp);
    if (fs::exists(target)) fs::rename(target, old);
    fs::rename(tmp, target);
    fs::remove_all(old);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::IoFailure, e.what());
  }
}

inline std::shared_ptr<const BackgroundStats> load_background(const std::filesystem::path& path) {
  return std::make_shared<const BackgroundStats>(background_from_text(detail::read_file(path)));
}

/// Loads a saved project. The background statistics are read when the
/// reference resolves to a file; a missing file is not an error until
/// something needs the statistics.
inline Project load_project(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  try {
    if (!fs::is_directory(path)) throw Error(ErrorKind::IoFailure, path.string() + " is not a project directory");
    Project p;
    const auto meta = nlohmann::json::parse(detail::read_file(path / "meta.json"));
    p.engine_version = meta.at("engine_version").get<std::string>();
    p.background_ref = meta.value("background", std::string());
    p.min_score = meta.value("min_score", kDefaultMinScore);

    for (const auto& file : detail::sorted_files(path / "corpus", ".tlt")) {
      p.corpus.push_back(parse_transcript(detail::read_file(file), TranscriptFormat::Tlt, file.stem().string()));
    }
    for (const auto& file : detail::sorted_files(path / "models", ".model")) {
      auto model = parse_model_text(detail::read_file(file), file.stem().string());
      std::visit(
          [&](auto& m) {
            if (p.models.contains(m.name)) throw Error(ErrorKind::DuplicateName, "model '" + m.name + "' twice");
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConceptModel>) {
              p.models.concepts.emplace(m.name, std::move(m));
            } else {
              p.models.attitudes.emplace(m.name, std::move(m));
            }
          },
          model);
    }
    const auto log_text = detail::read_file(path / "log.jsonl");
    std::istringstream lines(log_text);
    for (std::string line; std::getline(lines, line);) {
      if (trim(line).empty()) continue;
      p.log.push_back(nlohmann::json::parse(line).get<Edit>());
    }
    if (fs::exists(path / "snapshot" / "snapshot.json")) p.snapshot = detail::read_snapshot(path / "snapshot");
    if (!p.background_ref.empty()) {
      fs::path bg = p.background_ref;
      if (bg.is_relative()) bg = path / bg;
      if (fs::exists(bg)) p.background = load_background(bg);
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoFailure, std::string("corrupt project file: ") + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::IoFailure, e.what());
  }
}

}  // namespace turnlens
