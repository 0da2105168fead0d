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

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "turnlens/lexicon.hpp"

using namespace turnlens;
using fixture::error_of;

namespace {

Edit create(const std::string& name, std::optional<ModelClass> cls = std::nullopt,
            std::optional<int> priority = std::nullopt) {
  Edit e;
  e.kind = EditKind::Create;
  e.target = name;
  e.model_class = cls;
  e.priority = priority;
  return e;
}

Edit add(const std::string& name, const std::string& term, std::optional<double> weight = std::nullopt) {
  Edit e;
  e.kind = EditKind::AddTerm;
  e.target = name;
  e.term = Term::parse(term);
  e.weight = weight;
  return e;
}

Edit with_kind(EditKind kind, const std::string& name) {
  Edit e;
  e.kind = kind;
  e.target = name;
  return e;
}

ModelSet apply_all(ModelSet set, const std::vector<Edit>& edits) {
  for (const auto& e : edits) set = apply_edit(set, e);
  return set;
}

}  // namespace

TEST(Term, ParseNormalizes) {
  EXPECT_EQ(Term::parse("Best  Friends").words, (std::vector<std::string>{"best", "friends"}));
  EXPECT_EQ(Term::parse("Best Friends").str(), "best friends");
  EXPECT_EQ(error_of([] { Term::parse("  ,. "); }), ErrorKind::InvalidTerm);
  EXPECT_EQ(error_of([] { Term::parse("a b c d e f"); }), ErrorKind::InvalidTerm);
  EXPECT_EQ(Term::parse("a b c d e").size(), 5u);
  EXPECT_EQ(error_of([] { Term::from_words({"Upper"}); }), ErrorKind::InvalidTerm);
  EXPECT_EQ(error_of([] { Term::from_words({"two words"}); }), ErrorKind::InvalidTerm);
  EXPECT_EQ(error_of([] { Term::from_words({""}); }), ErrorKind::InvalidTerm);
}

TEST(ApplyEdit, AddTermDefaultsToWeightOne) {
  const auto set = apply_all({}, {create("Friends"), add("Friends", "best friends")});
  EXPECT_EQ(set.concepts.at("Friends").terms, fixture::terms({{"best friends", 1.0}}));
}

TEST(ApplyEdit, DuplicateTermRejected) {
  const auto set = apply_all({}, {create("Friends"), add("Friends", "best friends")});
  EXPECT_EQ(error_of([&] { apply_edit(set, add("Friends", "Best friends", 3.0)); }), ErrorKind::DuplicateTerm);
}

TEST(ApplyEdit, CreateAddSetWeightSequence) {
  Edit set_weight = with_kind(EditKind::SetWeight, "Sexual closeness");
  set_weight.term = Term::parse("sex");
  set_weight.weight = 2.0;
  const auto set = apply_all(
      {}, {create("Sexual closeness"), add("Sexual closeness", "sexual"), add("Sexual closeness", "sex"), set_weight});
  ASSERT_EQ(set.concepts.size(), 1u);
  EXPECT_EQ(set.concepts.at("Sexual closeness").terms, fixture::terms({{"sexual", 1.0}, {"sex", 2.0}}));
}

TEST(ApplyEdit, Errors) {
  const auto base = apply_all({}, {create("A"), add("A", "x"), create("Pos", ModelClass::Positive)});

  EXPECT_EQ(error_of([&] { apply_edit(base, add("Missing", "x")); }), ErrorKind::UnknownModel);
  EXPECT_EQ(error_of([&] { apply_edit(base, create("A")); }), ErrorKind::DuplicateName);
  EXPECT_EQ(error_of([&] { apply_edit(base, create("Pos")); }), ErrorKind::DuplicateName);
  EXPECT_EQ(error_of([&] { apply_edit(base, create("UNCLUSTERED")); }), ErrorKind::InvalidName);
  EXPECT_EQ(error_of([&] { apply_edit(base, create("  ")); }), ErrorKind::InvalidName);
  EXPECT_EQ(error_of([&] { apply_edit(base, add("A", "y", 0.0)); }), ErrorKind::InvalidWeight);
  EXPECT_EQ(error_of([&] { apply_edit(base, add("A", "y", -1.0)); }), ErrorKind::InvalidWeight);

  Edit remove = with_kind(EditKind::RemoveTerm, "A");
  remove.term = Term::parse("absent");
  EXPECT_EQ(error_of([&] { apply_edit(base, remove); }), ErrorKind::UnknownTerm);

  Edit weight = with_kind(EditKind::SetWeight, "A");
  weight.term = Term::parse("absent");
  weight.weight = 2.0;
  EXPECT_EQ(error_of([&] { apply_edit(base, weight); }), ErrorKind::UnknownTerm);
  weight.term = Term::parse("x");
  weight.weight = -2.0;
  EXPECT_EQ(error_of([&] { apply_edit(base, weight); }), ErrorKind::InvalidWeight);
  weight.weight.reset();
  EXPECT_EQ(error_of([&] { apply_edit(base, weight); }), ErrorKind::InvalidEdit);

  Edit rename = with_kind(EditKind::Rename, "A");
  rename.new_name = "Pos";
  EXPECT_EQ(error_of([&] { apply_edit(base, rename); }), ErrorKind::DuplicateName);

  Edit merge = with_kind(EditKind::Merge, "A");
  merge.other = "Pos";
  merge.new_name = "AP";
  EXPECT_EQ(error_of([&] { apply_edit(base, merge); }), ErrorKind::InvalidEdit);

  EXPECT_EQ(error_of([&] { apply_edit(base, with_kind(EditKind::Discard, "Nope")); }), ErrorKind::UnknownModel);
  EXPECT_EQ(error_of([&] { apply_edit(base, with_kind(EditKind::AddTerm, "A")); }), ErrorKind::InvalidEdit);
}

TEST(ApplyEdit, CreateAssignsNextPriority) {
  const auto set = apply_all({}, {create("A", std::nullopt, 4), create("B"), create("C", std::nullopt, 1)});
  EXPECT_EQ(set.concepts.at("A").priority, 4);
  EXPECT_EQ(set.concepts.at("B").priority, 5);
  EXPECT_EQ(set.concepts.at("C").priority, 1);
}

TEST(ApplyEdit, RenameDiscardPriority) {
  auto set = apply_all({}, {create("A"), add("A", "x"), create("Neg", ModelClass::Negative)});
  Edit rename = with_kind(EditKind::Rename, "A");
  rename.new_name = "B";
  set = apply_edit(set, rename);
  EXPECT_FALSE(set.contains("A"));
  EXPECT_EQ(set.concepts.at("B").name, "B");
  EXPECT_EQ(set.concepts.at("B").terms.size(), 1u);

  Edit priority = with_kind(EditKind::SetPriority, "B");
  priority.priority = 9;
  set = apply_edit(set, priority);
  EXPECT_EQ(set.concepts.at("B").priority, 9);
  priority.target = "Neg";
  EXPECT_EQ(error_of([&] { apply_edit(set, priority); }), ErrorKind::InvalidEdit);

  set = apply_edit(set, with_kind(EditKind::Discard, "Neg"));
  EXPECT_TRUE(set.attitudes.empty());
}

TEST(ApplyEdit, DoesNotMutateInput) {
  const auto base = apply_all({}, {create("A"), add("A", "x"), create("B"), add("B", "y", 2.0)});
  const auto copy = base;
  Edit merge = with_kind(EditKind::Merge, "A");
  merge.other = "B";
  merge.new_name = "AB";
  Edit rename = with_kind(EditKind::Rename, "A");
  rename.new_name = "Z";
  for (const auto& e : {merge, rename, add("A", "z"), with_kind(EditKind::Discard, "B")}) {
    const auto next = apply_edit(base, e);
    EXPECT_NE(next, base);
    EXPECT_EQ(base, copy);
  }
  EXPECT_THROW(apply_edit(base, add("A", "x")), Error);
  EXPECT_EQ(base, copy);
}

TEST(ApplyEdit, ReplayIsDeterministic) {
  std::mt19937 rng(3);
  const std::vector<std::string> words{"a", "b", "c", "d", "e"};
  std::vector<Edit> edits{create("M"), create("N")};
  ModelSet set;
  for (const auto& e : edits) set = apply_edit(set, e);
  for (int i = 0; i < 200; ++i) {
    Edit e = add(rng() % 2 ? "M" : "N", words[rng() % words.size()] + " " + words[rng() % words.size()],
                 1.0 + static_cast<double>(rng() % 4));
    if (rng() % 3 == 0) {
      e.kind = EditKind::RemoveTerm;
      e.weight.reset();
    }
    try {
      set = apply_edit(set, e);
      edits.push_back(e);
    } catch (const Error&) {
    }
  }
  EXPECT_EQ(apply_all({}, edits), set);
  EXPECT_EQ(apply_all({}, edits), apply_all({}, edits));
}

TEST(MergeModels, Examples) {
  const auto a = fixture::concept_model("A", {{"friend", 1.0}}, 3);
  const auto b = fixture::concept_model("B", {{"pal", 1.0}, {"friend", 2.0}}, 1);
  EXPECT_EQ(merge_models(a, a, "A"), a);
  const auto ab = merge_models(a, b, "AB");
  EXPECT_EQ(ab.terms, fixture::terms({{"friend", 2.0}, {"pal", 1.0}}));
  EXPECT_EQ(ab.priority, 1);
  EXPECT_EQ(ab.name, "AB");
}

TEST(MergeModels, CommutativeProperty) {
  std::mt19937 rng(17);
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 200; ++trial) {
    auto random_model = [&](const std::string& name) {
      ConceptModel m{name, {}, static_cast<int>(rng() % 5)};
      for (int i = static_cast<int>(rng() % 5); i > 0; --i) {
        m.terms[Term::parse(words[rng() % words.size()])] = 0.5 + static_cast<double>(rng() % 8);
      }
      return m;
    };
    const auto a = random_model("A");
    const auto b = random_model("B");
    EXPECT_EQ(merge_models(a, b, "X"), merge_models(b, a, "X"));
    EXPECT_EQ(merge_models(a, a, "A"), a);
  }
}

TEST(MergeModels, ThroughEdits) {
  const auto base = apply_all({}, {create("A", std::nullopt, 3), add("A", "friend"), create("B", std::nullopt, 1),
                                   add("B", "pal"), add("B", "friend", 2.0), create("C")});
  Edit merge = with_kind(EditKind::Merge, "A");
  merge.other = "B";
  merge.new_name = "A";
  const auto set = apply_edit(base, merge);
  EXPECT_FALSE(set.contains("B"));
  EXPECT_EQ(set.concepts.at("A"), (ConceptModel{"A", fixture::terms({{"friend", 2.0}, {"pal", 1.0}}), 1}));

  merge.new_name = "C";
  EXPECT_EQ(error_of([&] { apply_edit(base, merge); }), ErrorKind::DuplicateName);

  Edit self = with_kind(EditKind::Merge, "A");
  self.other = "A";
  self.new_name = "A";
  EXPECT_EQ(apply_edit(base, self), base);

  const auto att = apply_all({}, {create("P", ModelClass::Positive), add("P", "good"), create("Q", ModelClass::Positive),
                                  add("Q", "great"), create("H", ModelClass::Hedge)});
  Edit amerge = with_kind(EditKind::Merge, "P");
  amerge.other = "Q";
  amerge.new_name = "PQ";
  EXPECT_EQ(apply_edit(att, amerge).attitudes.at("PQ").terms.size(), 2u);
  amerge.other = "H";
  EXPECT_EQ(error_of([&] { apply_edit(att, amerge); }), ErrorKind::InvalidEdit);
}

TEST(ModelText, RoundTrip) {
  const ConceptModel c{"Physical closeness", fixture::terms({{"hug", 1.0}, {"hold hands", 2.5}, {"kiss", 0.1}}), 7};
  EXPECT_EQ(to_model_text(c),
            "# name: Physical closeness\n# class: concept\n# priority: 7\n"
            "2.5\thold hands\n1\thug\n0.1\tkiss\n");
  EXPECT_EQ(std::get<ConceptModel>(parse_model_text(to_model_text(c))), c);

  const AttitudeModel a{"Doubt", Polarity::Hedge, fixture::terms({{"maybe", 1.0}, {"i guess", 1.0 / 3.0}})};
  EXPECT_EQ(std::get<AttitudeModel>(parse_model_text(to_model_text(a))), a);

  std::mt19937 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    ConceptModel m{"m" + std::to_string(trial), {}, static_cast<int>(rng() % 100) - 50};
    for (int i = 0; i < 10; ++i) {
      m.terms[Term::parse("w" + std::to_string(rng() % 30))] = std::ldexp(static_cast<double>(rng() % 1000 + 1), -7);
    }
    EXPECT_EQ(std::get<ConceptModel>(parse_model_text(to_model_text(m))), m);
  }
}

TEST(ModelText, PlainWordList) {
  const auto m = std::get<ConceptModel>(parse_model_text("hug\nHold Hands\n\n# a comment\n", "Touch"));
  EXPECT_EQ(m, (ConceptModel{"Touch", fixture::terms({{"hug", 1.0}, {"hold hands", 1.0}}), 0}));
  EXPECT_EQ(error_of([] { parse_model_text("hug\nhug\n", "T"); }), ErrorKind::DuplicateTerm);
  EXPECT_EQ(error_of([] { parse_model_text("-1\thug\n", "T"); }), ErrorKind::InvalidWeight);
  EXPECT_EQ(error_of([] { parse_model_text("abc\thug\n", "T"); }), ErrorKind::InvalidWeight);
  EXPECT_EQ(error_of([] { parse_model_text("hug\n"); }), ErrorKind::InvalidName);
}

TEST(ModelText, CreationEditsRebuildModel) {
  const AnyModel m = ConceptModel{"Friends", fixture::terms({{"friend", 2.0}, {"best friends", 1.0}}), 4};
  const auto set = apply_all({}, creation_edits(m));
  EXPECT_EQ(set.concepts.at("Friends"), std::get<ConceptModel>(m));
  const AnyModel a = AttitudeModel{"Joy", Polarity::Positive, fixture::terms({{"happy", 1.5}})};
  EXPECT_EQ(apply_all({}, creation_edits(a)).attitudes.at("Joy"), std::get<AttitudeModel>(a));
}

TEST(EditJson, RoundTrip) {
  Edit e = add("Friends", "best friends", 2.25);
  e.timestamp = "2026-01-02T03:04:05Z";
  e.author = "ana";
  e.engine_version = "v";
  nlohmann::json j = e;
  EXPECT_EQ(j.at("kind"), "ADD_TERM");
  EXPECT_EQ(j.at("term"), "best friends");
  EXPECT_EQ(j.get<Edit>(), e);

  Edit m = with_kind(EditKind::Merge, "A");
  m.other = "B";
  m.new_name = "C";
  EXPECT_EQ(nlohmann::json(m).get<Edit>(), m);
  Edit c = create("P", ModelClass::Hedge, 3);
  EXPECT_EQ(nlohmann::json(c).get<Edit>(), c);
  EXPECT_EQ(error_of([] { nlohmann::json{{"kind", "FLY"}, {"target", "A"}}.get<Edit>(); }), ErrorKind::InvalidEdit);
}
