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

// Quantitative outputs built from occurrences and assignments: mention-rate
// tables, attitude scores, correlations, and the explanations that let
// every reported number be recomputed from its evidence.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "turnlens/clusterer.hpp"
#include "turnlens/corpus.hpp"
#include "turnlens/format.hpp"
#include "turnlens/lexicon.hpp"
#include "turnlens/matcher.hpp"

namespace turnlens {

// ---------------------------------------------------------------------------
// Mention rates

struct MentionCell {
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  double percent = 0.0;

  bool operator==(const MentionCell&) const = default;
};

struct MentionRow {
  std::string group;
  std::vector<MentionCell> cells;  // parallel to MentionRateTable::columns

  bool operator==(const MentionRow&) const = default;
};

struct MentionRateTable {
  std::string group_by;
  std::vector<std::string> columns;  // concept names, lexicographic
  std::vector<MentionRow> rows;      // groups, then "all"

  const MentionCell* find(std::string_view group, std::string_view concept_name) const {
    const auto col = std::find(columns.begin(), columns.end(), concept_name);
    if (col == columns.end()) return nullptr;
    for (const auto& r : rows) {
      if (r.group == group) return &r.cells[static_cast<std::size_t>(col - columns.begin())];
    }
    return nullptr;
  }
};

struct MentionOptions {
  bool include_interviewer_turns = false;
};

inline double percentage(std::size_t numerator, std::size_t denominator) {
  return denominator == 0 ? 0.0 : 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

/// Turn → concept labels for every turn with at least one clustered sentence.
inline std::map<TurnRef, std::set<std::string>> turn_label_index(std::span<const Assignment> assignments) {
  std::map<TurnRef, std::set<std::string>> out;
  for (const auto& a : assignments) {
    if (a.clustered()) out[a.sentence.turn()].insert(a.label);
  }
  return out;
}

namespace detail {

inline void check_assignments(std::span<const Assignment> assignments, std::span<const ConceptModel> concepts) {
  std::set<std::string_view> names;
  for (const auto& c : concepts) names.insert(c.name);
  for (const auto& a : assignments) {
    if (a.clustered() && !names.contains(a.label)) {
      throw Error(ErrorKind::StaleAssignments,
                  "assignment label '" + a.label + "' is not a current concept; recluster first");
    }
  }
}

inline bool counts_turn(const Turn& turn, const MentionOptions& options) {
  return turn.role == Role::Respondent || options.include_interviewer_turns;
}

}  // namespace detail

/// Percentage of respondent turns per group whose sentences include each
/// concept's cluster.
inline MentionRateTable mention_rates(const Corpus& corpus, std::span<const Assignment> assignments,
                                      std::span<const ConceptModel> concepts, const std::string& group_by,
                                      const MentionOptions& options = {}) {
  detail::check_assignments(assignments, concepts);
  MentionRateTable table;
  table.group_by = group_by;
  for (const auto& c : concepts) table.columns.push_back(c.name);
  std::sort(table.columns.begin(), table.columns.end());
  const auto labels = turn_label_index(assignments);

  std::map<std::string, MentionRow> groups;
  MentionRow all{std::string(kAllGroup), std::vector<MentionCell>(table.columns.size())};
  for (const auto& interview : corpus) {
    const auto& group = group_of(interview, group_by);
    auto& row = groups.try_emplace(group, MentionRow{group, std::vector<MentionCell>(table.columns.size())})
                    .first->second;
    for (const auto& turn : interview.turns) {
      if (!detail::counts_turn(turn, options)) continue;
      const auto it = labels.find(TurnRef{interview.id, turn.index});
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        const bool hit = it != labels.end() && it->second.contains(table.columns[c]);
        for (MentionRow* r : {&row, &all}) {
          ++r->cells[c].denominator;
          r->cells[c].numerator += hit;
        }
      }
    }
  }
  for (auto& [_, row] : groups) table.rows.push_back(std::move(row));
  table.rows.push_back(std::move(all));
  for (auto& row : table.rows) {
    for (auto& cell : row.cells) cell.percent = percentage(cell.numerator, cell.denominator);
  }
  return table;
}

/// Percentage of one respondent's own turns that bring up the concept.
inline double concept_importance(const Corpus& corpus, std::span<const Assignment> assignments,
                                 const std::string& concept_name, const std::string& respondent) {
  const auto it = std::find_if(corpus.begin(), corpus.end(), [&](const Interview& i) { return i.id == respondent; });
  if (it == corpus.end()) throw Error(ErrorKind::UnknownRespondent, "no respondent '" + respondent + "'");
  std::size_t turns = 0, hits = 0;
  for (const auto& turn : it->turns) {
    if (turn.role != Role::Respondent) continue;
    ++turns;
    hits += turn_clusters(assignments, TurnRef{it->id, turn.index}).contains(concept_name);
  }
  return percentage(hits, turns);
}

// ---------------------------------------------------------------------------
// Attitudes

enum class ScoreLevel { Respondent, Group };

inline constexpr double kPerWords = 1000.0;

/// Masses are weighted occurrence counts per 1000 respondent words.
/// At respondent level polarity = P - N and intensity = P^2 + N^2; at group
/// level every field is the mean over the group's respondents.
struct AttitudeScore {
  std::string subject;
  std::size_t respondents = 1;
  std::size_t words = 0;
  double raw_positive = 0.0;
  double raw_negative = 0.0;
  double raw_hedge = 0.0;
  double positive = 0.0;
  double negative = 0.0;
  double hedge = 0.0;
  double polarity = 0.0;
  double intensity = 0.0;
  double skepticism = 0.0;

  bool operator==(const AttitudeScore&) const = default;
};

inline const std::vector<std::string>& attitude_columns() {
  static const std::vector<std::string> cols{"P", "N", "H", "polarity", "intensity", "skepticism"};
  return cols;
}

inline double attitude_value(const AttitudeScore& s, std::string_view column) {
  if (column == "P") return s.positive;
  if (column == "N") return s.negative;
  if (column == "H") return s.hedge;
  if (column == "polarity") return s.polarity;
  if (column == "intensity") return s.intensity;
  if (column == "skepticism") return s.skepticism;
  throw Error(ErrorKind::NotFound, "no attitude column '" + std::string(column) + "'");
}

/// Evidence behind one respondent's attitude score.
struct AttitudeEvidence {
  std::string respondent;
  std::size_t words = 0;
  std::vector<OccurrenceRecord> occurrences;  // POSITIVE, NEGATIVE and HEDGE models only
};

namespace detail {

struct AttitudeMatchers {
  std::vector<TermMatcher> matchers;
  std::map<std::string, Polarity, std::less<>> classes;

  explicit AttitudeMatchers(std::span<const AttitudeModel> models) {
    std::vector<const AttitudeModel*> sorted;
    for (const auto& m : models) {
      if (m.polarity_class != Polarity::Custom) sorted.push_back(&m);
    }
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->name < b->name; });
    for (const auto* m : sorted) {
      matchers.emplace_back(*m);
      classes.emplace(m->name, m->polarity_class);
    }
  }
};

inline AttitudeEvidence collect_evidence(const Interview& interview, const AttitudeMatchers& am) {
  AttitudeEvidence ev{interview.id, 0, {}};
  for (const auto& turn : interview.turns) {
    if (turn.role != Role::Respondent) continue;
    for (const auto& sentence : turn.sentences) {
      ev.words += sentence.tokens.size();
      for (const auto& m : am.matchers) {
        auto occ = m.match(sentence);
        ev.occurrences.insert(ev.occurrences.end(), occ.begin(), occ.end());
      }
    }
  }
  return ev;
}

}  // namespace detail

/// Score from evidence. `classes` maps model names to polarity classes.
template <typename ClassMap>
AttitudeScore score_evidence(const AttitudeEvidence& ev, const ClassMap& classes) {
  if (ev.words == 0) {
    throw Error(ErrorKind::EmptySubject, "respondent '" + ev.respondent + "' has no words");
  }
  AttitudeScore s;
  s.subject = ev.respondent;
  s.words = ev.words;
  for (const auto& o : ev.occurrences) {
    const auto it = classes.find(o.model);
    if (it == classes.end()) continue;
    switch (it->second) {
      case Polarity::Positive: s.raw_positive += o.weight; break;
      case Polarity::Negative: s.raw_negative += o.weight; break;
      case Polarity::Hedge: s.raw_hedge += o.weight; break;
      case Polarity::Custom: break;
    }
  }
  const double w = static_cast<double>(ev.words);
  s.positive = s.raw_positive * kPerWords / w;
  s.negative = s.raw_negative * kPerWords / w;
  s.hedge = s.raw_hedge * kPerWords / w;
  s.polarity = s.positive - s.negative;
  s.intensity = s.positive * s.positive + s.negative * s.negative;
  s.skepticism = s.hedge;
  return s;
}

inline AttitudeScore mean_score(std::string subject, std::span<const AttitudeScore> members) {
  AttitudeScore g;
  g.subject = std::move(subject);
  g.respondents = members.size();
  for (const auto& m : members) {
    g.words += m.words;
    g.raw_positive += m.raw_positive;
    g.raw_negative += m.raw_negative;
    g.raw_hedge += m.raw_hedge;
    g.positive += m.positive;
    g.negative += m.negative;
    g.hedge += m.hedge;
    g.polarity += m.polarity;
    g.intensity += m.intensity;
    g.skepticism += m.skepticism;
  }
  if (!members.empty()) {
    const double n = static_cast<double>(members.size());
    for (double* f : {&g.positive, &g.negative, &g.hedge, &g.polarity, &g.intensity, &g.skepticism}) *f /= n;
  }
  return g;
}

/// Per-respondent (ordered by id) or per-group (groups then "all") scores.
inline std::vector<AttitudeScore> attitude_scores(const Corpus& corpus, std::span<const AttitudeModel> models,
                                                  ScoreLevel level, const std::string& group_by = {}) {
  const detail::AttitudeMatchers am(models);
  std::vector<std::pair<std::string, AttitudeScore>> per_respondent;
  for (const auto& interview : corpus) {
    const std::string group = level == ScoreLevel::Group ? group_of(interview, group_by) : std::string();
    per_respondent.emplace_back(group, score_evidence(detail::collect_evidence(interview, am), am.classes));
  }
  if (level == ScoreLevel::Respondent) {
    std::vector<AttitudeScore> out;
    for (auto& [_, s] : per_respondent) out.push_back(std::move(s));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.subject < b.subject; });
    return out;
  }
  std::map<std::string, std::vector<AttitudeScore>> groups;
  std::vector<AttitudeScore> all;
  for (auto& [group, s] : per_respondent) {
    groups[group].push_back(s);
    all.push_back(s);
  }
  std::vector<AttitudeScore> out;
  for (const auto& [group, members] : groups) out.push_back(mean_score(group, members));
  out.push_back(mean_score(std::string(kAllGroup), all));
  return out;
}

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationValue {
  std::string key;
  double x = 0.0;
  double y = 0.0;
};

struct CorrelationReport {
  std::string x_name;
  std::string y_name;
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
  std::vector<CorrelationValue> values;
};

namespace detail {

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ZeroVariance, "a variable has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks; ties share the mean of their positions.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = rank;
    i = j + 1;
  }
  return r;
}

}  // namespace detail

inline constexpr std::size_t kMinCorrelationN = 3;

/// Pearson and Spearman coefficients over respondents present in both maps.
inline CorrelationReport correlate(const std::map<std::string, double>& x, const std::map<std::string, double>& y,
                                   std::string x_name = "x", std::string y_name = "y") {
  if (x.size() != y.size() ||
      !std::equal(x.begin(), x.end(), y.begin(), [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw Error(ErrorKind::KeyMismatch, "x and y must cover the same respondents");
  }
  if (x.size() < kMinCorrelationN) {
    throw Error(ErrorKind::InsufficientData, "need at least " + std::to_string(kMinCorrelationN) + " respondents");
  }
  CorrelationReport report{std::move(x_name), std::move(y_name), 0.0, 0.0, x.size(), {}};
  std::vector<double> xs, ys;
  for (const auto& [key, value] : x) {
    xs.push_back(value);
    ys.push_back(y.at(key));
    report.values.push_back({key, value, y.at(key)});
  }
  report.pearson = detail::pearson(xs, ys);
  const auto rx = detail::ranks(xs);
  const auto ry = detail::ranks(ys);
  report.spearman = detail::pearson(rx, ry);
  return report;
}

// ---------------------------------------------------------------------------
// Explanations

/// Evidence and arithmetic for one reported number. `quantities` holds the
/// named operands of `trace`, so the value can be recomputed from them.
struct Explanation {
  std::string ref;
  std::string snapshot_id;
  double value = 0.0;
  std::vector<OccurrenceRecord> occurrences;
  std::vector<TurnRef> turns;
  std::map<std::string, double> quantities;
  std::string trace;
};

/// A cell address: `table:row,column`. Tables are stats, mentions,
/// attitudes (group level), respondents (respondent-level attitudes),
/// importance (row = respondent, column = concept) and assignments (row =
/// `interview/turn/sentence`, column = score).
struct CellRef {
  std::string table;
  std::string row;
  std::string column;

  static CellRef parse(std::string_view text) {
    const auto colon = text.find(':');
    const auto comma = text.rfind(',');
    if (colon == std::string_view::npos || comma == std::string_view::npos || comma < colon) {
      throw Error(ErrorKind::InvalidArgument, "cell reference must look like table:row,column");
    }
    return {std::string(text.substr(0, colon)), std::string(text.substr(colon + 1, comma - colon - 1)),
            std::string(text.substr(comma + 1))};
  }

  std::string str() const { return table + ":" + row + "," + column; }
};

inline Explanation explain_stats(const Corpus& corpus, const std::string& group_by, const CellRef& ref) {
  const auto table = descriptive_stats(corpus, group_by);
  const auto* row = table.find(ref.row);
  if (!row) throw Error(ErrorKind::NotFound, "no stats row '" + ref.row + "'");
  Explanation ex;
  ex.ref = ref.str();
  ex.quantities = {{"interviews", static_cast<double>(row->interviews)},
                   {"words", static_cast<double>(row->words)},
                   {"turns", static_cast<double>(row->turns)}};
  if (ref.column == "interviews" || ref.column == "words" || ref.column == "turns") {
    ex.value = ex.quantities.at(ref.column);
    ex.trace = ref.column + " = " + format_exact(ex.value);
  } else if (ref.column == "turn_length") {
    ex.value = row->turn_length;
    ex.trace = "turn_length = words / turns = " + std::to_string(row->words) + " / " + std::to_string(row->turns) +
               " = " + format_exact(ex.value);
  } else if (ref.column == "interview_length") {
    ex.value = row->interview_length;
    ex.trace = "interview_length = turns / interviews = " + std::to_string(row->turns) + " / " +
               std::to_string(row->interviews) + " = " + format_exact(ex.value);
  } else {
    throw Error(ErrorKind::NotFound, "no stats column '" + ref.column + "'");
  }
  return ex;
}

namespace detail {

inline void add_turn_evidence(Explanation& ex, std::span<const Assignment> assignments, const TurnRef& turn,
                              const std::string& concept_name) {
  ex.turns.push_back(turn);
  auto it = std::lower_bound(assignments.begin(), assignments.end(), turn,
                             [](const Assignment& a, const TurnRef& t) { return a.sentence.turn() < t; });
  for (; it != assignments.end() && it->sentence.turn() == turn; ++it) {
    if (it->label == concept_name) ex.occurrences.insert(ex.occurrences.end(), it->support.begin(), it->support.end());
  }
}

inline std::string ratio_trace(std::size_t num, std::size_t den, double value) {
  return "100 * " + std::to_string(num) + " / " + std::to_string(den) + " = " + format_exact(value);
}

}  // namespace detail

inline Explanation explain_mention(const Corpus& corpus, std::span<const Assignment> assignments,
                                   std::span<const ConceptModel> concepts, const std::string& group_by,
                                   const CellRef& ref, const MentionOptions& options = {}) {
  detail::check_assignments(assignments, concepts);
  if (std::none_of(concepts.begin(), concepts.end(), [&](const auto& c) { return c.name == ref.column; })) {
    throw Error(ErrorKind::NotFound, "no concept '" + ref.column + "'");
  }
  Explanation ex;
  ex.ref = ref.str();
  std::size_t den = 0;
  bool row_found = ref.row == kAllGroup;
  for (const auto& interview : corpus) {
    const auto& group = group_of(interview, group_by);
    if (ref.row != kAllGroup && group != ref.row) continue;
    row_found = true;
    for (const auto& turn : interview.turns) {
      if (!detail::counts_turn(turn, options)) continue;
      ++den;
      const TurnRef tr{interview.id, turn.index};
      if (turn_clusters(assignments, tr).contains(ref.column)) {
        detail::add_turn_evidence(ex, assignments, tr, ref.column);
      }
    }
  }
  if (!row_found) throw Error(ErrorKind::NotFound, "no group '" + ref.row + "'");
  ex.value = percentage(ex.turns.size(), den);
  ex.quantities = {{"numerator", static_cast<double>(ex.turns.size())}, {"denominator", static_cast<double>(den)}};
  ex.trace = detail::ratio_trace(ex.turns.size(), den, ex.value);
  return ex;
}

inline Explanation explain_importance(const Corpus& corpus, std::span<const Assignment> assignments,
                                      const CellRef& ref) {
  const auto it = std::find_if(corpus.begin(), corpus.end(), [&](const Interview& i) { return i.id == ref.row; });
  if (it == corpus.end()) throw Error(ErrorKind::UnknownRespondent, "no respondent '" + ref.row + "'");
  Explanation ex;
  ex.ref = ref.str();
  std::size_t den = 0;
  for (const auto& turn : it->turns) {
    if (turn.role != Role::Respondent) continue;
    ++den;
    const TurnRef tr{it->id, turn.index};
    if (turn_clusters(assignments, tr).contains(ref.column)) detail::add_turn_evidence(ex, assignments, tr, ref.column);
  }
  ex.value = percentage(ex.turns.size(), den);
  ex.quantities = {{"numerator", static_cast<double>(ex.turns.size())}, {"denominator", static_cast<double>(den)}};
  ex.trace = detail::ratio_trace(ex.turns.size(), den, ex.value);
  return ex;
}

inline Explanation explain_assignment(std::span<const Assignment> assignments, const CellRef& ref) {
  // Row: interview/turn/sentence. The interview id itself may contain '/'.
  const auto last = ref.row.rfind('/');
  const auto mid = last == std::string::npos || last == 0 ? std::string::npos : ref.row.rfind('/', last - 1);
  if (mid == std::string::npos) throw Error(ErrorKind::InvalidArgument, "assignment row must be interview/turn/sentence");
  const SentenceRef sref{ref.row.substr(0, mid), parse_integer<std::size_t>(ref.row.substr(mid + 1, last - mid - 1)),
                         parse_integer<std::size_t>(ref.row.substr(last + 1))};
  const auto it = std::lower_bound(assignments.begin(), assignments.end(), sref,
                                   [](const Assignment& a, const SentenceRef& s) { return a.sentence < s; });
  if (it == assignments.end() || it->sentence != sref) throw Error(ErrorKind::NotFound, "no assignment for " + ref.row);
  if (ref.column != "score") throw Error(ErrorKind::NotFound, "assignment column must be 'score'");
  Explanation ex;
  ex.ref = ref.str();
  ex.value = it->score;
  ex.occurrences = it->support;
  std::string sum;
  for (const auto& o : it->support) sum += (sum.empty() ? "" : " + ") + format_exact(o.weight);
  ex.trace = it->label + ": " + (sum.empty() ? "0" : sum) + " = " + format_exact(ex.value);
  return ex;
}

inline Explanation explain_attitude(const Corpus& corpus, std::span<const AttitudeModel> models,
                                    const std::string& group_by, ScoreLevel level, const CellRef& ref) {
  const detail::AttitudeMatchers am(models);
  Explanation ex;
  ex.ref = ref.str();
  std::vector<AttitudeScore> members;
  for (const auto& interview : corpus) {
    const bool in_row = level == ScoreLevel::Respondent
                            ? interview.id == ref.row
                            : (ref.row == kAllGroup || group_of(interview, group_by) == ref.row);
    if (!in_row) continue;
    const auto ev = detail::collect_evidence(interview, am);
    members.push_back(score_evidence(ev, am.classes));
    ex.occurrences.insert(ex.occurrences.end(), ev.occurrences.begin(), ev.occurrences.end());
    ex.quantities["words:" + interview.id] = static_cast<double>(ev.words);
  }
  if (members.empty()) throw Error(ErrorKind::NotFound, "no attitude row '" + ref.row + "'");
  std::string trace;
  for (const auto& m : members) {
    if (!trace.empty()) trace += "; ";
    const double w = static_cast<double>(m.words);
    trace += m.subject + ": P = " + format_exact(m.raw_positive) + " * 1000 / " + format_exact(w) + " = " +
             format_exact(m.positive) + ", N = " + format_exact(m.raw_negative) + " * 1000 / " + format_exact(w) +
             " = " + format_exact(m.negative) + ", H = " + format_exact(m.raw_hedge) + " * 1000 / " +
             format_exact(w) + " = " + format_exact(m.hedge) + ", polarity = P - N = " + format_exact(m.polarity) +
             ", intensity = P^2 + N^2 = " + format_exact(m.intensity);
  }
  if (level == ScoreLevel::Respondent) {
    ex.value = attitude_value(members.front(), ref.column);
  } else {
    const auto g = mean_score(ref.row, members);
    ex.value = attitude_value(g, ref.column);
    trace += "; " + ref.column + " = mean over " + std::to_string(members.size()) + " respondents = " +
             format_exact(ex.value);
  }
  ex.trace = std::move(trace);
  return ex;
}

}  // namespace turnlens
