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

// Analyst-owned models: weighted term lists for concepts and attitudes, the
// edit vocabulary that changes them, and their plain-text file format.

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "turnlens/error.hpp"
#include "turnlens/format.hpp"
#include "turnlens/text.hpp"

namespace turnlens {

inline constexpr std::size_t kMaxTermWords = 5;
inline constexpr std::string_view kUnclustered = "UNCLUSTERED";

/// A word or multi-word expression in normalized form.
struct Term {
  std::vector<std::string> words;

  static Term from_words(std::vector<std::string> words) {
    if (words.empty() || words.size() > kMaxTermWords) {
      throw Error(ErrorKind::InvalidTerm, "a term has 1 to " + std::to_string(kMaxTermWords) + " words");
    }
    for (const auto& w : words) {
      const bool has_space = std::any_of(w.begin(), w.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r';
      });
      if (w.empty() || has_space || normalize(w) != w) {
        throw Error(ErrorKind::InvalidTerm, "term word '" + w + "' is not a normalized token");
      }
    }
    return Term{std::move(words)};
  }

  /// Tokenizes free text the same way transcripts are tokenized.
  static Term parse(std::string_view text) {
    std::vector<std::string> words;
    for (auto& tok : tokenize(text)) words.push_back(std::move(tok.normalized));
    if (words.empty()) throw Error(ErrorKind::InvalidTerm, "empty term '" + std::string(text) + "'");
    return from_words(std::move(words));
  }

  std::size_t size() const { return words.size(); }

  std::string str() const {
    std::string out;
    for (const auto& w : words) {
      if (!out.empty()) out += ' ';
      out += w;
    }
    return out;
  }

  auto operator<=>(const Term&) const = default;
};

using TermWeights = std::map<Term, double>;

enum class ModelClass { Concept, Positive, Negative, Hedge, Custom };
enum class Polarity { Positive, Negative, Hedge, Custom };

inline std::string_view to_string(ModelClass c) {
  switch (c) {
    case ModelClass::Concept: return "concept";
    case ModelClass::Positive: return "positive";
    case ModelClass::Negative: return "negative";
    case ModelClass::Hedge: return "hedge";
    case ModelClass::Custom: return "custom";
  }
  return "concept";
}

inline ModelClass parse_model_class(std::string_view text) {
  for (auto c : {ModelClass::Concept, ModelClass::Positive, ModelClass::Negative, ModelClass::Hedge,
                 ModelClass::Custom}) {
    if (normalize(text) == to_string(c)) return c;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model class '" + std::string(text) + "'");
}

inline Polarity to_polarity(ModelClass c) {
  switch (c) {
    case ModelClass::Positive: return Polarity::Positive;
    case ModelClass::Negative: return Polarity::Negative;
    case ModelClass::Hedge: return Polarity::Hedge;
    default: return Polarity::Custom;
  }
}

inline ModelClass to_model_class(Polarity p) {
  switch (p) {
    case Polarity::Positive: return ModelClass::Positive;
    case Polarity::Negative: return ModelClass::Negative;
    case Polarity::Hedge: return ModelClass::Hedge;
    case Polarity::Custom: return ModelClass::Custom;
  }
  return ModelClass::Custom;
}

struct ConceptModel {
  std::string name;
  TermWeights terms;
  int priority = 0;  // lower wins ties

  bool operator==(const ConceptModel&) const = default;
};

struct AttitudeModel {
  std::string name;
  Polarity polarity_class = Polarity::Custom;
  TermWeights terms;

  bool operator==(const AttitudeModel&) const = default;
};

/// Concept and attitude models share one name space.
struct ModelSet {
  std::map<std::string, ConceptModel> concepts;
  std::map<std::string, AttitudeModel> attitudes;

  bool contains(const std::string& name) const {
    return concepts.contains(name) || attitudes.contains(name);
  }

  std::vector<ConceptModel> concept_list() const {
    std::vector<ConceptModel> out;
    for (const auto& [_, m] : concepts) out.push_back(m);
    return out;
  }

  std::vector<AttitudeModel> attitude_list() const {
    std::vector<AttitudeModel> out;
    for (const auto& [_, m] : attitudes) out.push_back(m);
    return out;
  }

  bool operator==(const ModelSet&) const = default;
};

// ---------------------------------------------------------------------------
// Edits

enum class EditKind { AddTerm, RemoveTerm, SetWeight, Rename, Merge, Discard, Create, SetPriority };

inline std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::AddTerm: return "ADD_TERM";
    case EditKind::RemoveTerm: return "REMOVE_TERM";
    case EditKind::SetWeight: return "SET_WEIGHT";
    case EditKind::Rename: return "RENAME";
    case EditKind::Merge: return "MERGE";
    case EditKind::Discard: return "DISCARD";
    case EditKind::Create: return "CREATE";
    case EditKind::SetPriority: return "SET_PRIORITY";
  }
  return "?";
}

inline EditKind parse_edit_kind(std::string_view text) {
  for (auto k : {EditKind::AddTerm, EditKind::RemoveTerm, EditKind::SetWeight, EditKind::Rename,
                 EditKind::Merge, EditKind::Discard, EditKind::Create, EditKind::SetPriority}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorKind::InvalidEdit, "unknown edit kind '" + std::string(text) + "'");
}

/// One analyst action. Payload fields used per kind:
///   CREATE        model_class (default concept), priority (default: next free)
///   ADD_TERM      term, weight (default 1.0)
///   REMOVE_TERM   term
///   SET_WEIGHT    term, weight
///   RENAME        new_name
///   MERGE         other (second model), new_name
///   DISCARD       -
///   SET_PRIORITY  priority
struct Edit {
  EditKind kind = EditKind::Create;
  std::string target;
  std::optional<Term> term;
  std::optional<double> weight;
  std::optional<std::string> other;
  std::optional<std::string> new_name;
  std::optional<int> priority;
  std::optional<ModelClass> model_class;
  std::string timestamp;
  std::string author;
  std::string engine_version;

  bool operator==(const Edit&) const = default;

  std::string describe() const {
    std::string out = std::string(to_string(kind)) + " '" + target + "'";
    if (term) out += " term='" + term->str() + "'";
    if (weight) out += " weight=" + format_exact(*weight);
    if (other) out += " other='" + *other + "'";
    if (new_name) out += " new_name='" + *new_name + "'";
    if (priority) out += " priority=" + std::to_string(*priority);
    return out;
  }
};

inline void to_json(nlohmann::json& j, const Edit& e) {
  j = nlohmann::json{{"kind", to_string(e.kind)}, {"target", e.target}};
  if (e.term) j["term"] = e.term->str();
  if (e.weight) j["weight"] = *e.weight;
  if (e.other) j["other"] = *e.other;
  if (e.new_name) j["new_name"] = *e.new_name;
  if (e.priority) j["priority"] = *e.priority;
  if (e.model_class) j["class"] = to_string(*e.model_class);
  j["timestamp"] = e.timestamp;
  j["author"] = e.author;
  j["engine"] = e.engine_version;
}

inline void from_json(const nlohmann::json& j, Edit& e) {
  try {
    e = Edit{};
    e.kind = parse_edit_kind(j.at("kind").get<std::string>());
    e.target = j.at("target").get<std::string>();
    if (j.contains("term")) e.term = Term::parse(j.at("term").get<std::string>());
    if (j.contains("weight")) e.weight = j.at("weight").get<double>();
    if (j.contains("other")) e.other = j.at("other").get<std::string>();
    if (j.contains("new_name")) e.new_name = j.at("new_name").get<std::string>();
    if (j.contains("priority")) e.priority = j.at("priority").get<int>();
    if (j.contains("class")) e.model_class = parse_model_class(j.at("class").get<std::string>());
    e.timestamp = j.value("timestamp", std::string());
    e.author = j.value("author", std::string());
    e.engine_version = j.value("engine", std::string());
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::InvalidEdit, std::string("bad edit JSON: ") + ex.what());
  }
}

namespace detail {

inline void check_weight(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error(ErrorKind::InvalidWeight, "weight must be a positive finite number, got " + format_exact(w));
  }
}

inline void check_name(const std::string& name) {
  if (trim(name).empty()) throw Error(ErrorKind::InvalidName, "model name must not be empty");
  if (name == kUnclustered) {
    throw Error(ErrorKind::InvalidName, "'" + std::string(kUnclustered) + "' is reserved");
  }
}

template <typename Fn>
void with_terms(ModelSet& set, const std::string& name, Fn&& fn) {
  if (auto it = set.concepts.find(name); it != set.concepts.end()) return fn(it->second.terms);
  if (auto it = set.attitudes.find(name); it != set.attitudes.end()) return fn(it->second.terms);
  throw Error(ErrorKind::UnknownModel, "no model named '" + name + "'");
}

inline const Term& require_term(const Edit& e) {
  if (!e.term) throw Error(ErrorKind::InvalidEdit, std::string(to_string(e.kind)) + " needs a term");
  return *e.term;
}

}  // namespace detail

/// Union of term lists; on conflicting weights the larger one is kept.
inline TermWeights merge_terms(const TermWeights& a, const TermWeights& b) {
  TermWeights out = a;
  for (const auto& [term, w] : b) {
    auto [it, fresh] = out.try_emplace(term, w);
    if (!fresh) it->second = std::max(it->second, w);
  }
  return out;
}

inline ConceptModel merge_models(const ConceptModel& a, const ConceptModel& b, std::string new_name) {
  return ConceptModel{std::move(new_name), merge_terms(a.terms, b.terms), std::min(a.priority, b.priority)};
}

inline AttitudeModel merge_models(const AttitudeModel& a, const AttitudeModel& b, std::string new_name) {
  if (a.polarity_class != b.polarity_class) {
    throw Error(ErrorKind::InvalidEdit, "cannot merge attitude models of different classes");
  }
  return AttitudeModel{std::move(new_name), a.polarity_class, merge_terms(a.terms, b.terms)};
}

/// Applies one edit to a copy of `models`. The input is never modified, so a
/// failed edit leaves the caller's state as it was.
inline ModelSet apply_edit(const ModelSet& models, const Edit& edit) {
  ModelSet out = models;
  const auto& name = edit.target;
  switch (edit.kind) {
    case EditKind::Create: {
      detail::check_name(name);
      if (out.contains(name)) throw Error(ErrorKind::DuplicateName, "model '" + name + "' already exists");
      const auto cls = edit.model_class.value_or(ModelClass::Concept);
      if (cls == ModelClass::Concept) {
        int priority = 0;
        if (edit.priority) {
          priority = *edit.priority;
        } else {
          for (const auto& [_, c] : out.concepts) priority = std::max(priority, c.priority + 1);
        }
        out.concepts.emplace(name, ConceptModel{name, {}, priority});
      } else {
        out.attitudes.emplace(name, AttitudeModel{name, to_polarity(cls), {}});
      }
      break;
    }
    case EditKind::AddTerm: {
      const auto& term = detail::require_term(edit);
      const double w = edit.weight.value_or(1.0);
      detail::check_weight(w);
      detail::with_terms(out, name, [&](TermWeights& terms) {
        if (!terms.try_emplace(term, w).second) {
          throw Error(ErrorKind::DuplicateTerm, "'" + term.str() + "' is already in '" + name + "'");
        }
      });
      break;
    }
    case EditKind::RemoveTerm: {
      const auto& term = detail::require_term(edit);
      detail::with_terms(out, name, [&](TermWeights& terms) {
        if (terms.erase(term) == 0) {
          throw Error(ErrorKind::UnknownTerm, "'" + term.str() + "' is not in '" + name + "'");
        }
      });
      break;
    }
    case EditKind::SetWeight: {
      const auto& term = detail::require_term(edit);
      if (!edit.weight) throw Error(ErrorKind::InvalidEdit, "SET_WEIGHT needs a weight");
      detail::check_weight(*edit.weight);
      detail::with_terms(out, name, [&](TermWeights& terms) {
        auto it = terms.find(term);
        if (it == terms.end()) {
          throw Error(ErrorKind::UnknownTerm, "'" + term.str() + "' is not in '" + name + "'");
        }
        it->second = *edit.weight;
      });
      break;
    }
    case EditKind::Rename: {
      if (!edit.new_name) throw Error(ErrorKind::InvalidEdit, "RENAME needs new_name");
      const auto& to = *edit.new_name;
      if (!out.contains(name)) throw Error(ErrorKind::UnknownModel, "no model named '" + name + "'");
      detail::check_name(to);
      if (to == name) break;
      if (out.contains(to)) throw Error(ErrorKind::DuplicateName, "model '" + to + "' already exists");
      if (auto node = out.concepts.extract(name)) {
        node.mapped().name = to;
        node.key() = to;
        out.concepts.insert(std::move(node));
      } else {
        auto anode = out.attitudes.extract(name);
        anode.mapped().name = to;
        anode.key() = to;
        out.attitudes.insert(std::move(anode));
      }
      break;
    }
    case EditKind::Merge: {
      if (!edit.other || !edit.new_name) throw Error(ErrorKind::InvalidEdit, "MERGE needs other and new_name");
      const auto& other = *edit.other;
      const auto& to = *edit.new_name;
      detail::check_name(to);
      for (const auto* n : {&name, &other}) {
        if (!out.contains(*n)) throw Error(ErrorKind::UnknownModel, "no model named '" + *n + "'");
      }
      if (to != name && to != other && out.contains(to)) {
        throw Error(ErrorKind::DuplicateName, "model '" + to + "' already exists");
      }
      if (out.concepts.contains(name) && out.concepts.contains(other)) {
        auto merged = merge_models(out.concepts.at(name), out.concepts.at(other), to);
        out.concepts.erase(name);
        out.concepts.erase(other);
        out.concepts.emplace(to, std::move(merged));
      } else if (out.attitudes.contains(name) && out.attitudes.contains(other)) {
        auto merged = merge_models(out.attitudes.at(name), out.attitudes.at(other), to);
        out.attitudes.erase(name);
        out.attitudes.erase(other);
        out.attitudes.emplace(to, std::move(merged));
      } else {
        throw Error(ErrorKind::InvalidEdit, "cannot merge a concept with an attitude model");
      }
      break;
    }
    case EditKind::Discard: {
      if (out.concepts.erase(name) + out.attitudes.erase(name) == 0) {
        throw Error(ErrorKind::UnknownModel, "no model named '" + name + "'");
      }
      break;
    }
    case EditKind::SetPriority: {
      if (!edit.priority) throw Error(ErrorKind::InvalidEdit, "SET_PRIORITY needs a priority");
      auto it = out.concepts.find(name);
      if (it == out.concepts.end()) {
        if (out.attitudes.contains(name)) {
          throw Error(ErrorKind::InvalidEdit, "attitude models have no priority");
        }
        throw Error(ErrorKind::UnknownModel, "no model named '" + name + "'");
      }
      it->second.priority = *edit.priority;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model text format
//
//   # name: Friends
//   # class: concept
//   # priority: 2
//   1<TAB>friend
//   2.5<TAB>best friends
//
// A line without a tab is a term with weight 1, so a plain word list is a
// valid model file. Other `#` lines are comments.

namespace detail {

inline std::string write_terms(const TermWeights& terms) {
  std::string out;
  for (const auto& [term, w] : terms) out += format_exact(w) + "\t" + term.str() + "\n";
  return out;
}

}  // namespace detail

inline std::string to_model_text(const ConceptModel& m) {
  return "# name: " + m.name + "\n# class: concept\n# priority: " + std::to_string(m.priority) + "\n" +
         detail::write_terms(m.terms);
}

inline std::string to_model_text(const AttitudeModel& m) {
  return "# name: " + m.name + "\n# class: " + std::string(to_string(to_model_class(m.polarity_class))) +
         "\n" + detail::write_terms(m.terms);
}

using AnyModel = std::variant<ConceptModel, AttitudeModel>;

inline AnyModel parse_model_text(std::string_view text, std::string_view fallback_name = {}) {
  std::string name(fallback_name);
  ModelClass cls = ModelClass::Concept;
  int priority = 0;
  TermWeights terms;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos <= text.size();) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto where = "model line " + std::to_string(line_no) + ": ";
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = trim(line.substr(1, colon - 1));
      const auto value = trim(line.substr(colon + 1));
      if (key == "name") {
        name = value;
      } else if (key == "class") {
        cls = parse_model_class(value);
      } else if (key == "priority") {
        priority = parse_integer<int>(value);
      }
      continue;
    }
    double weight = 1.0;
    std::string_view term_text = line;
    if (const auto tab = line.find('\t'); tab != std::string_view::npos) {
      try {
        weight = parse_double(trim(line.substr(0, tab)));
      } catch (const Error&) {
        throw Error(ErrorKind::InvalidWeight, where + "bad weight");
      }
      term_text = trim(line.substr(tab + 1));
    }
    detail::check_weight(weight);
    auto term = Term::parse(term_text);
    if (!terms.try_emplace(std::move(term), weight).second) {
      throw Error(ErrorKind::DuplicateTerm, where + "duplicate term '" + std::string(term_text) + "'");
    }
  }
  detail::check_name(name);
  if (cls == ModelClass::Concept) return ConceptModel{name, std::move(terms), priority};
  return AttitudeModel{name, to_polarity(cls), std::move(terms)};
}

/// Edits that rebuild `model` from nothing: CREATE, then one ADD_TERM per
/// term. Importing model files this way keeps the edit log a complete
/// history of the model set.
inline std::vector<Edit> creation_edits(const AnyModel& model) {
  std::vector<Edit> edits;
  std::visit(
      [&](const auto& m) {
        Edit create;
        create.kind = EditKind::Create;
        create.target = m.name;
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ConceptModel>) {
          create.model_class = ModelClass::Concept;
          create.priority = m.priority;
        } else {
          create.model_class = to_model_class(m.polarity_class);
        }
        edits.push_back(std::move(create));
        for (const auto& [term, w] : m.terms) {
          Edit add;
          add.kind = EditKind::AddTerm;
          add.target = m.name;
          add.term = term;
          add.weight = w;
          edits.push_back(std::move(add));
        }
      },
      model);
  return edits;
}

}  // namespace turnlens
