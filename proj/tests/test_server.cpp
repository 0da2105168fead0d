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

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "turnlens/server.hpp"

using namespace turnlens;
using nlohmann::json;

namespace {

Project spouse_project() {
  Project p;
  p.corpus = {
      fixture::interview("r1", "NA", {{Role::Interviewer, "Who cooks?"},
                                      {Role::Respondent, "My husband cooks dinner at home. I hug my friends."}}),
      fixture::interview("r2", "NE", {{Role::Interviewer, "And you?"},
                                      {Role::Respondent, "My wife reads books every night. We like it."}}),
  };
  p.background = std::make_shared<const BackgroundStats>(build_background(reference_sentences(
      "My husband cooks dinner at home. My wife cooks dinner at home. My husband reads books every night. "
      "My wife reads books every night. My husband walks the dog daily. My wife walks the dog daily.")));
  p.background_ref = std::string(kBackgroundFile);
  return p;
}

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    wb_ = std::make_unique<Workbench>(spouse_project());
    service_ = std::make_unique<Service>(*wb_);
    port_ = service_->bind("127.0.0.1", 0);
    service_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    service_->stop();
  }

  std::pair<int, json> get(const std::string& path) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res) << path;
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> post(const std::string& path, const json& body = json::object()) {
    auto res = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    return {res->status, json::parse(res->body)};
  }

  std::unique_ptr<Workbench> wb_;
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

}  // namespace

TEST_F(ServerTest, ProjectInfo) {
  const auto [status, j] = get("/project");
  EXPECT_EQ(status, 200);
  EXPECT_EQ(j["interviews"], 2);
  EXPECT_EQ(j["log_position"], 0);
  EXPECT_TRUE(j["stale"].get<bool>());
}

TEST_F(ServerTest, ClustersNeedRecluster) {
  auto [status, j] = get("/clusters");
  EXPECT_EQ(status, 409);
  EXPECT_EQ(j["error"], "StaleAssignments");
  std::tie(status, j) = post("/recluster");
  EXPECT_EQ(status, 200);
  std::tie(status, j) = get("/clusters");
  EXPECT_EQ(status, 200);
  EXPECT_TRUE(j["clusters"].empty());
  EXPECT_EQ(j["unclustered"], 4);
}

TEST_F(ServerTest, EditReclusterAndBrowse) {
  EXPECT_EQ(post("/concepts", {{"name", "Spouse"}}).second["log_position"], 1);
  EXPECT_EQ(post("/concepts/Spouse/terms", {{"term", "husband"}}).second["log_position"], 2);
  const auto first = post("/recluster").second;
  EXPECT_TRUE(first["changed"].get<bool>());
  const auto second = post("/recluster").second;
  EXPECT_EQ(second["snapshot_id"], first["snapshot_id"]);
  EXPECT_FALSE(second["changed"].get<bool>());

  const auto [status, j] = get("/clusters/Spouse/sentences");
  EXPECT_EQ(status, 200);
  ASSERT_EQ(j["sentences"].size(), 1u);
  EXPECT_EQ(j["sentences"][0]["text"], "My husband cooks dinner at home.");
  EXPECT_EQ(j["sentences"][0]["occurrences"][0]["term"], "husband");
}

TEST_F(ServerTest, SuggestExcludesAnchorsAndFindsWife) {
  post("/concepts", {{"name", "Spouse"}});
  post("/concepts/Spouse/terms", {{"term", "husband"}});
  const auto [status, j] = get("/suggest?concept=Spouse&k=5");
  EXPECT_EQ(status, 200);
  ASSERT_FALSE(j["suggestions"].empty());
  EXPECT_EQ(j["suggestions"][0]["term"], "wife");
  for (const auto& s : j["suggestions"]) EXPECT_NE(s["term"], "husband");
}

TEST_F(ServerTest, LogListsEntriesInOrder) {
  post("/concepts", {{"name", "A"}});
  client_->Post("/concepts/A/terms", {{"X-Author", "ana"}}, json{{"term", "hug"}, {"weight", 2}}.dump(),
                "application/json");
  post("/concepts/A/rename", {{"new_name", "Touch"}});
  const auto [status, j] = get("/log");
  EXPECT_EQ(status, 200);
  ASSERT_EQ(j["entries"].size(), 3u);
  EXPECT_EQ(j["entries"][0]["kind"], "CREATE");
  EXPECT_EQ(j["entries"][1]["seq"], 2);
  EXPECT_EQ(j["entries"][1]["weight"], 2.0);
  EXPECT_EQ(j["entries"][2]["kind"], "RENAME");
  EXPECT_EQ(wb_->snapshot_project().log[1].author, "ana");
}

TEST_F(ServerTest, ErrorStatuses) {
  EXPECT_EQ(get("/clusters/Nope/sentences").first, 404);
  EXPECT_EQ(post("/concepts/Nope/terms", {{"term", "x"}}).first, 404);
  post("/concepts", {{"name", "A"}});
  const auto dup = post("/concepts", {{"name", "A"}});
  EXPECT_EQ(dup.first, 409);
  EXPECT_EQ(dup.second["error"], "DuplicateName");
  EXPECT_EQ(post("/concepts", json::object()).first, 400);
  EXPECT_EQ(post("/concepts/A/terms", {{"term", "x"}, {"weight", -1}}).first, 400);
  auto res = client_->Post("/concepts", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(get("/explain?ref=nosuch:all,x").first, 409);  // no snapshot yet
  post("/recluster");
  EXPECT_EQ(get("/explain?ref=nosuch:all,x").first, 404);
  EXPECT_EQ(get("/explain?ref=broken").first, 400);
  // Failed edits leave the log alone.
  EXPECT_EQ(get("/log").second["log_position"], 1);
}

TEST_F(ServerTest, TablesAndExplain) {
  post("/concepts", {{"name", "Spouse"}});
  post("/concepts/Spouse/terms", {{"term", "husband"}});
  post("/concepts/Spouse/terms", {{"term", "wife"}});
  const auto id = post("/recluster").second["snapshot_id"];
  const auto stats = get("/tables/stats").second;
  EXPECT_EQ(stats["rows"].back()["group"], "all");
  const auto mentions = get("/tables/mentions").second;
  EXPECT_EQ(mentions["snapshot_id"], id);
  const auto [status, ex] = get("/explain?ref=mentions:all,Spouse");
  EXPECT_EQ(status, 200);
  EXPECT_EQ(ex["value"], 100.0);
  EXPECT_EQ(ex["trace"], "100 * 2 / 2 = 100");
  EXPECT_EQ(ex["occurrences"].size(), 2u);
  EXPECT_EQ(get("/tables/attitudes").first, 200);
}

TEST_F(ServerTest, ConcurrentReadersDuringEdits) {
  post("/concepts", {{"name", "A"}});
  post("/recluster");
  std::vector<std::thread> readers;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      httplib::Client c("127.0.0.1", port_);
      for (int i = 0; i < 20; ++i) {
        auto r = c.Get("/project");
        if (r && r->status == 200) ++ok;
      }
    });
  }
  for (const char* w : {"hug", "home", "books", "dog", "night"}) post("/concepts/A/terms", {{"term", w}});
  for (auto& r : readers) r.join();
  EXPECT_EQ(ok.load(), 80);
  EXPECT_EQ(get("/log").second["log_position"], 6);
}
