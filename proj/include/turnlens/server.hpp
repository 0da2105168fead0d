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

// JSON-over-HTTP front for a Workbench. Mutating endpoints answer with the
// new edit-log position; errors answer {"error": KIND, "message": ...}.

#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "turnlens/workbench.hpp"

namespace turnlens {

inline int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownModel:
    case ErrorKind::UnknownTerm:
    case ErrorKind::UnknownRespondent:
    case ErrorKind::NotFound:
    case ErrorKind::OutOfVocabulary:
      return 404;
    case ErrorKind::DuplicateName:
    case ErrorKind::DuplicateTerm:
    case ErrorKind::StaleAssignments:
    case ErrorKind::ReplayDivergence:
      return 409;
    case ErrorKind::BackgroundUnavailable:
      return 503;
    case ErrorKind::IoFailure:
      return 500;
    default:
      return 400;
  }
}

class Service {
 public:
  explicit Service(Workbench& workbench) : wb_(workbench) { routes(); }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ~Service() { stop(); }

  /// Binds to `port` (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorKind::PortUnavailable, "cannot listen on " + host + ":" + std::to_string(port));
    return bound;
  }

  /// Serves until stop(); blocks.
  void run() { server_.listen_after_bind(); }

  void start() {
    thread_ = std::thread([this] { run(); });
    server_.wait_until_ready();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  using Handler = std::function<nlohmann::json(const httplib::Request&)>;

  static std::string param(const httplib::Request& req, const std::string& key, std::string fallback = {}) {
    return req.has_param(key) ? req.get_param_value(key) : fallback;
  }

  static nlohmann::json body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::InvalidArgument, std::string("request body is not JSON: ") + e.what());
    }
  }

  template <typename T>
  static T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorKind::InvalidArgument, std::string("missing field '") + key + "'");
    try {
      return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::InvalidArgument, std::string("bad field '") + key + "'");
    }
  }

  static Edit make_edit(const httplib::Request& req, EditKind kind, std::string target) {
    Edit e;
    e.kind = kind;
    e.target = std::move(target);
    e.author = req.get_header_value("X-Author");
    return e;
  }

  static httplib::Server::Handler wrap(Handler fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
      try {
        res.set_content(fn(req).dump(), "application/json");
      } catch (const Error& e) {
        res.status = http_status(e.kind());
        res.set_content(nlohmann::json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump(),
                        "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump(), "application/json");
      }
    };
  }

  nlohmann::json mutation(Edit e) { return {{"log_position", wb_.edit(std::move(e))}}; }

  void routes() {
    server_.Get("/project", wrap([this](const auto&) { return wb_.project_info(); }));
    server_.Get("/clusters", wrap([this](const auto&) { return wb_.clusters(); }));
    server_.Get(R"(/clusters/([^/]+)/sentences)",
                wrap([this](const httplib::Request& req) { return wb_.cluster_sentences(req.matches[1]); }));

    server_.Post("/concepts/merge", wrap([this](const httplib::Request& req) {
                   const auto j = body(req);
                   auto e = make_edit(req, EditKind::Merge, field<std::string>(j, "a"));
                   e.other = field<std::string>(j, "b");
                   e.new_name = j.value("new_name", e.target);
                   return mutation(std::move(e));
                 }));
    server_.Post("/concepts", wrap([this](const httplib::Request& req) {
                   const auto j = body(req);
                   auto e = make_edit(req, EditKind::Create, field<std::string>(j, "name"));
                   if (j.contains("priority")) e.priority = field<int>(j, "priority");
                   if (j.contains("class")) e.model_class = parse_model_class(field<std::string>(j, "class"));
                   return mutation(std::move(e));
                 }));
    server_.Post(R"(/concepts/([^/]+)/terms)", wrap([this](const httplib::Request& req) {
                   const auto j = body(req);
                   auto e = make_edit(req, EditKind::AddTerm, req.matches[1]);
                   e.term = Term::parse(field<std::string>(j, "term"));
                   if (j.contains("weight")) e.weight = field<double>(j, "weight");
                   return mutation(std::move(e));
                 }));
    server_.Put(R"(/concepts/([^/]+)/terms/([^/]+))", wrap([this](const httplib::Request& req) {
                  const auto j = body(req);
                  auto e = make_edit(req, EditKind::SetWeight, req.matches[1]);
                  e.term = Term::parse(std::string(req.matches[2]));
                  e.weight = field<double>(j, "weight");
                  return mutation(std::move(e));
                }));
    server_.Delete(R"(/concepts/([^/]+)/terms/([^/]+))", wrap([this](const httplib::Request& req) {
                     auto e = make_edit(req, EditKind::RemoveTerm, req.matches[1]);
                     e.term = Term::parse(std::string(req.matches[2]));
                     return mutation(std::move(e));
                   }));
    server_.Post(R"(/concepts/([^/]+)/rename)", wrap([this](const httplib::Request& req) {
                   auto e = make_edit(req, EditKind::Rename, req.matches[1]);
                   e.new_name = field<std::string>(body(req), "new_name");
                   return mutation(std::move(e));
                 }));
    server_.Post(R"(/concepts/([^/]+)/priority)", wrap([this](const httplib::Request& req) {
                   auto e = make_edit(req, EditKind::SetPriority, req.matches[1]);
                   e.priority = field<int>(body(req), "priority");
                   return mutation(std::move(e));
                 }));
    server_.Delete(R"(/concepts/([^/]+))", wrap([this](const httplib::Request& req) {
                     return mutation(make_edit(req, EditKind::Discard, req.matches[1]));
                   }));

    server_.Get("/suggest", wrap([this](const httplib::Request& req) {
                  return wb_.suggest(param(req, "concept"), parse_integer<std::size_t>(param(req, "k", "10")));
                }));
    server_.Get("/discover", wrap([this](const httplib::Request& req) {
                  return wb_.discover(parse_integer<std::size_t>(param(req, "max", "10")));
                }));
    server_.Post("/recluster", wrap([this](const auto&) { return wb_.recluster(); }));
    server_.Get("/tables/stats", wrap([this](const httplib::Request& req) {
                  return wb_.stats(param(req, "group_by", std::string(kDefaultGroupBy)));
                }));
    server_.Get("/tables/mentions", wrap([this](const httplib::Request& req) {
                  return wb_.mentions(param(req, "group_by", std::string(kDefaultGroupBy)));
                }));
    server_.Get("/tables/attitudes", wrap([this](const httplib::Request& req) {
                  const auto level = param(req, "level", "group") == "respondent" ? ScoreLevel::Respondent
                                                                                  : ScoreLevel::Group;
                  return wb_.attitudes(param(req, "group_by", std::string(kDefaultGroupBy)), level);
                }));
    server_.Get("/correlate", wrap([this](const httplib::Request& req) {
                  return wb_.correlate(param(req, "x"), param(req, "y"));
                }));
    server_.Get("/explain", wrap([this](const httplib::Request& req) {
                  return wb_.explain(param(req, "ref"), param(req, "group_by", std::string(kDefaultGroupBy)));
                }));
    server_.Get("/log", wrap([this](const auto&) { return wb_.log(); }));
  }

  Workbench& wb_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace turnlens
