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

// turnlens: command-line front end for interview projects.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "turnlens/project.hpp"
#include "turnlens/server.hpp"
#include "turnlens/workbench.hpp"

namespace fs = std::filesystem;
using namespace turnlens;

namespace {

struct Options {
  std::string project = ".";
  std::string stats_file;
  std::string group_by{kDefaultGroupBy};
  std::string format = "csv";
  std::string out;
};

Project open_project(const Options& opt) {
  Project p = load_project(opt.project);
  if (!opt.stats_file.empty()) p.background = load_background(opt.stats_file);
  return p;
}

void emit(const Options& opt, const std::string& content) {
  if (opt.out.empty()) {
    std::cout << content;
  } else {
    detail::write_file(opt.out, content);
  }
}

TranscriptFormat format_for(const fs::path& file) {
  return file.extension() == ".json" ? TranscriptFormat::Json : TranscriptFormat::Tlt;
}

int cmd_ingest(const Options& opt, const std::vector<std::string>& files, const std::vector<std::string>& models,
               const std::string& background, const std::string& author, double min_score) {
  Project p;
  p.min_score = min_score;
  std::vector<std::string> warnings;
  for (const auto& f : files) {
    const fs::path path(f);
    p.corpus.push_back(parse_transcript(detail::read_file(path), format_for(path), path.stem().string(), &warnings));
  }
  std::sort(p.corpus.begin(), p.corpus.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < p.corpus.size(); ++i) {
    if (p.corpus[i].id == p.corpus[i - 1].id) {
      throw Error(ErrorKind::MalformedTranscript, "duplicate interview id '" + p.corpus[i].id + "'");
    }
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& f : models) {
    const fs::path path(f);
    for (auto& e : creation_edits(parse_model_text(detail::read_file(path), path.stem().string()))) {
      e.author = author;
      p.commit(std::move(e));
    }
  }
  if (!background.empty()) {
    p.background = load_background(background);
    p.background_ref = std::string(kBackgroundFile);
  }
  recluster(p);
  save_project(p, opt.out);
  std::cout << "project " << opt.out << ": " << p.corpus.size() << " interviews, " << p.models.concepts.size()
            << " concepts, " << p.models.attitudes.size() << " attitude models, snapshot " << p.snapshot->id << "\n";
  return 0;
}

int cmd_background(const Options& opt, const std::vector<std::string>& files, int window) {
  std::vector<std::vector<std::string>> sentences;
  for (const auto& f : files) {
    auto s = reference_sentences(detail::read_file(f));
    sentences.insert(sentences.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  const auto stats = build_background(sentences, window);
  emit(opt, to_text(stats));
  std::cerr << "background: " << stats.vocabulary_size() << " words, " << stats.total << " tokens\n";
  return 0;
}

int cmd_cluster(const Options& opt, std::size_t discover) {
  Workbench wb(open_project(opt), fs::path(opt.project));
  const auto result = wb.recluster();
  const auto clusters = wb.clusters();
  std::cout << "snapshot " << result["snapshot_id"].get<std::string>()
            << (result["changed"].get<bool>() ? "" : " (unchanged)") << "\n";
  for (const auto& c : clusters["clusters"]) {
    std::cout << c["name"].get<std::string>() << "\t" << c["members"] << "\n";
  }
  std::cout << kUnclustered << "\t" << clusters["unclustered"] << "\n";
  if (discover > 0) {
    const auto proposals = wb.discover(discover);
    for (const auto& p : proposals["proposals"]) {
      std::cout << "proposal\t" << p["seed"].get<std::string>() << "\t" << format_fixed(p["salience"].get<double>(), 4)
                << "\t" << p["members"] << "\t";
      std::string companions;
      for (const auto& c : p["companions"]) companions += (companions.empty() ? "" : " ") + c.get<std::string>();
      std::cout << companions << "\n";
    }
  }
  return 0;
}

int cmd_tabulate(const Options& opt, const std::string& which, const std::string& level) {
  const Project p = open_project(opt);
  const auto& s = p.current_snapshot();
  if (which == "mentions") {
    const auto concepts = p.models.concept_list();
    const auto table = mention_rates(p.corpus, s.assignments, concepts, opt.group_by);
    emit(opt, opt.format == "json" ? to_json(table, s.id).dump(2) + "\n" : mentions_csv(table, s.id));
  } else {
    const auto models = p.models.attitude_list();
    const auto scores = attitude_scores(p.corpus, models, level == "respondent" ? ScoreLevel::Respondent : ScoreLevel::Group,
                                        opt.group_by);
    emit(opt, opt.format == "json" ? to_json(std::span<const AttitudeScore>(scores), s.id).dump(2) + "\n"
                                   : attitudes_csv(scores, s.id));
  }
  return 0;
}

int cmd_replay(const Options& opt, const std::string& log_file, bool write) {
  const Project recorded = open_project(opt);
  std::vector<Edit> log;
  std::istringstream lines(detail::read_file(log_file));
  for (std::string line; std::getline(lines, line);) {
    if (!trim(line).empty()) log.push_back(nlohmann::json::parse(line).get<Edit>());
  }
  auto report = replay(recorded.initial(), log);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  recluster(report.project);
  const bool models_equal = report.project.models == recorded.models;
  const std::string recorded_id = recorded.snapshot ? recorded.snapshot->id : std::string("none");
  const bool snapshot_equal = report.project.snapshot->id == recorded_id;
  std::cout << "entries replayed: " << log.size() << "\n"
            << "version mismatch: " << (report.version_mismatch ? "yes" : "no") << "\n"
            << "models equal: " << (models_equal ? "yes" : "no") << "\n"
            << "snapshot id: " << report.project.snapshot->id << " (recorded " << recorded_id << ")"
            << (snapshot_equal ? " match" : " DIFFERENT") << "\n";
  if (write) save_project(report.project, opt.project);
  return models_equal && snapshot_equal ? 0 : 3;
}

int cmd_export(const Options& opt) {
  const Project p = open_project(opt);
  const auto& s = p.current_snapshot();
  const auto concepts = p.models.concept_list();
  const auto attitudes = p.models.attitude_list();
  const auto stats = descriptive_stats(p.corpus, opt.group_by);
  const auto mentions = mention_rates(p.corpus, s.assignments, concepts, opt.group_by);
  const auto groups = attitude_scores(p.corpus, attitudes, ScoreLevel::Group, opt.group_by);
  const auto respondents = attitude_scores(p.corpus, attitudes, ScoreLevel::Respondent);
  const fs::path out = opt.out.empty() ? fs::path("export") : fs::path(opt.out);
  fs::create_directories(out);
  if (opt.format == "json") {
    nlohmann::json doc{{"snapshot_id", s.id},
                       {"engine_version", p.engine_version},
                       {"stats", to_json(stats, s.id)},
                       {"mentions", to_json(mentions, s.id)},
                       {"attitudes", to_json(std::span<const AttitudeScore>(groups), s.id)},
                       {"respondents", to_json(std::span<const AttitudeScore>(respondents), s.id)}};
    nlohmann::json assignments = nlohmann::json::array();
    for (const auto& a : s.assignments) {
      nlohmann::json support = nlohmann::json::array();
      for (const auto& o : a.support) support.push_back(to_json(o));
      assignments.push_back({{"interview_id", a.sentence.interview_id},
                             {"turn_index", a.sentence.turn_index},
                             {"sentence_index", a.sentence.sentence_index},
                             {"label", a.label},
                             {"score", a.score},
                             {"occurrences", support}});
    }
    doc["assignments"] = assignments;
    detail::write_file(out / "export.json", doc.dump(2) + "\n");
  } else {
    detail::write_file(out / "stats.csv", stats_to_csv(stats, s.id));
    detail::write_file(out / "assignments.csv", assignments_csv(s));
    detail::write_file(out / "occurrences.csv", occurrences_csv(s));
    detail::write_file(out / "mentions.csv", mentions_csv(mentions, s.id));
    detail::write_file(out / "attitudes.csv", attitudes_csv(groups, s.id));
    detail::write_file(out / "respondents.csv", attitudes_csv(respondents, s.id));
  }
  std::cout << "exported snapshot " << s.id << " to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"turnlens: term-list analysis of interview transcripts"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--project,-p", opt.project, "Project directory")->capture_default_str();
  app.add_option("--stats", opt.stats_file, "Background statistics file (overrides the project's)");

  std::vector<std::string> files, model_files;
  std::string background, author;
  double min_score = kDefaultMinScore;
  auto* ingest = app.add_subcommand("ingest", "Create a project from transcripts");
  ingest->add_option("files", files, "Transcript files (.tlt or .json)")->required();
  ingest->add_option("--out", opt.out, "Project directory to create")->required();
  ingest->add_option("--models", model_files, "Model files to import");
  ingest->add_option("--background", background, "Background statistics file");
  ingest->add_option("--author", author, "Author recorded on imported edits");
  ingest->add_option("--min-score", min_score, "Minimum concept score for a label")->capture_default_str();

  int window = kDefaultWindow;
  auto* bg = app.add_subcommand("background", "Build background statistics from plain text");
  bg->add_option("files", files, "Reference text files")->required();
  bg->add_option("--out", opt.out, "Output file (default: stdout)");
  bg->add_option("--window", window, "Co-occurrence window")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Descriptive statistics");
  stats->add_option("--group-by", opt.group_by)->capture_default_str();
  stats->add_option("--format", opt.format)->check(CLI::IsMember({"csv", "json"}));
  stats->add_option("--out", opt.out);

  std::size_t discover = 0;
  auto* cluster = app.add_subcommand("cluster", "Recluster and list clusters");
  cluster->add_option("--discover", discover, "Also propose up to N new clusters");

  std::string concept_name;
  std::size_t k = 10;
  auto* suggest = app.add_subcommand("suggest", "Suggest related terms for a concept");
  suggest->add_option("--concept", concept_name)->required();
  suggest->add_option("-k", k)->capture_default_str();

  std::string which, level = "group";
  auto* tabulate = app.add_subcommand("tabulate", "Mention-rate or attitude tables");
  tabulate->add_option("table", which)->required()->check(CLI::IsMember({"mentions", "attitudes"}));
  tabulate->add_option("--group-by", opt.group_by)->capture_default_str();
  tabulate->add_option("--level", level)->check(CLI::IsMember({"group", "respondent"}))->capture_default_str();
  tabulate->add_option("--format", opt.format)->check(CLI::IsMember({"csv", "json"}));
  tabulate->add_option("--out", opt.out);

  std::string x, y;
  auto* corr = app.add_subcommand("correlate", "Correlate two per-respondent variables");
  corr->add_option("--x", x, "concept name, or attitude column (polarity, intensity, ...)")->required();
  corr->add_option("--y", y)->required();

  std::string cell, table = "mentions";
  auto* expl = app.add_subcommand("explain", "Show the evidence behind a table cell");
  expl->add_option("--cell", cell, "ROW,COL or TABLE:ROW,COL")->required();
  expl->add_option("--table", table, "stats, mentions, attitudes, respondents, importance, assignments")
      ->capture_default_str();
  expl->add_option("--group-by", opt.group_by)->capture_default_str();

  std::string log_file;
  bool write = false;
  auto* rep = app.add_subcommand("replay", "Replay an edit log against the project's corpus");
  rep->add_option("--log", log_file)->required();
  rep->add_flag("--write", write, "Save the replayed project");

  auto* exp = app.add_subcommand("export", "Export all tables");
  exp->add_option("--format", opt.format)->check(CLI::IsMember({"csv", "json"}));
  exp->add_option("--out", opt.out);
  exp->add_option("--group-by", opt.group_by)->capture_default_str();

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();

  std::string kind, term_text, other, new_name, model_class;
  std::optional<double> weight;
  std::optional<int> priority;
  auto* edit = app.add_subcommand("edit", "Apply one model edit and log it");
  edit->add_option("--kind", kind)->required()->check(CLI::IsMember(
      {"ADD_TERM", "REMOVE_TERM", "SET_WEIGHT", "RENAME", "MERGE", "DISCARD", "CREATE", "SET_PRIORITY"}));
  edit->add_option("--model", concept_name)->required();
  edit->add_option("--term", term_text);
  edit->add_option("--weight", weight);
  edit->add_option("--other", other);
  edit->add_option("--new-name", new_name);
  edit->add_option("--priority", priority);
  edit->add_option("--class", model_class);
  edit->add_option("--author", author);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(opt, files, model_files, background, author, min_score);
    if (*bg) return cmd_background(opt, files, window);
    if (*stats) {
      const Project p = open_project(opt);
      const std::string id = p.snapshot ? p.snapshot->id : snapshot_id(p);
      const auto table = descriptive_stats(p.corpus, opt.group_by);
      emit(opt, opt.format == "json" ? to_json(table, id).dump(2) + "\n" : stats_to_csv(table, id));
      return 0;
    }
    if (*cluster) return cmd_cluster(opt, discover);
    if (*suggest) {
      const Workbench wb(open_project(opt));
      const auto result = wb.suggest(concept_name, k);
      for (const auto& s : result["suggestions"]) {
        std::cout << s["term"].get<std::string>() << "\t" << format_fixed(s["similarity"].get<double>(), 4) << "\t"
                  << s["anchor"].get<std::string>() << "\n";
      }
      return 0;
    }
    if (*tabulate) return cmd_tabulate(opt, which, level);
    if (*corr) {
      const Workbench wb(open_project(opt));
      std::cout << wb.correlate(x, y).dump(2) << "\n";
      return 0;
    }
    if (*expl) {
      const std::string ref = cell.find(':') == std::string::npos ? table + ":" + cell : cell;
      const Workbench wb(open_project(opt));
      std::cout << wb.explain(ref, opt.group_by).dump(2) << "\n";
      return 0;
    }
    if (*rep) return cmd_replay(opt, log_file, write);
    if (*exp) return cmd_export(opt);
    if (*serve) {
      Workbench wb(open_project(opt), fs::path(opt.project));
      Service service(wb);
      const int bound = service.bind(host, port);
      std::cerr << "serving " << opt.project << " on http://" << host << ":" << bound << "\n";
      service.run();
      return 0;
    }
    if (*edit) {
      Edit e;
      e.kind = parse_edit_kind(kind);
      e.target = concept_name;
      if (!term_text.empty()) e.term = Term::parse(term_text);
      e.weight = weight;
      if (!other.empty()) e.other = other;
      if (!new_name.empty()) e.new_name = new_name;
      e.priority = priority;
      if (!model_class.empty()) e.model_class = parse_model_class(model_class);
      e.author = author;
      Workbench wb(open_project(opt), fs::path(opt.project));
      std::cout << "log position " << wb.edit(std::move(e)) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
