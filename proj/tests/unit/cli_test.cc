// Copyright 2026 The avsearch Authors
//
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

#include <gtest/gtest.h>
#include <httplib.h>

#include "avsearch/wire.hpp"
#include "corpus.hpp"
#include "process.hpp"

namespace avsearch {
namespace {

using nlohmann::json;
using testing::run_command;

const std::string kCli = AVSEARCH_CLI;

class CliFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    media_ = tmp_.path() / "media";
    project_ = (tmp_.path() / "project").string();
    testing::write_wisedesc(media_, "one", {{"kind", "video"}, {"duration_sec", 4},
                                            {"scene_text", {{{"start", 0}, {"text", "horse field"}}}},
                                            {"transcript", {{{"start", 1}, {"end", 2}, {"text", "world war"}}}},
                                            {"metadata", {{"country", "Germany"}}}});
    testing::write_wisedesc(media_, "two", {{"kind", "image"},
                                            {"scene_text", {{{"start", 0}, {"text", "horse"}}}},
                                            {"metadata", {{"country", "France"}}}});
    testing::write_wisedesc(media_, "three", {{"kind", "audio"}, {"duration_sec", 8},
                                              {"audio_text", {{{"start", 0}, {"text", "gunshot"}}}}});
  }

  testing::CommandResult cli(std::vector<std::string> args, const std::string& env = {}) {
    args.insert(args.begin(), kCli);
    return run_command(args, env);
  }

  void init_and_index() {
    ASSERT_EQ(cli({"init", project_}).exit_code, 0);
    auto r = cli({"index", project_, media_.string(), "--quiet"});
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }

  testing::TempDir tmp_;
  std::filesystem::path media_;
  std::string project_;
};

TEST_F(CliFixture, IndexReportsThenSkipsUnchangedMedia) {
  ASSERT_EQ(cli({"init", project_}).exit_code, 0);
  auto first = cli({"index", project_, media_.string()});
  ASSERT_EQ(first.exit_code, 0) << first.err;
  EXPECT_NE(first.out.find("3 new items"), std::string::npos) << first.out;
  auto second = cli({"index", project_});
  ASSERT_EQ(second.exit_code, 0) << second.err;
  EXPECT_NE(second.out.find("0 new items"), std::string::npos) << second.out;
}

TEST_F(CliFixture, MissingMediaRootFails) {
  ASSERT_EQ(cli({"init", project_}).exit_code, 0);
  auto r = cli({"index", project_, (tmp_.path() / "nowhere").string()});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_FALSE(r.err.empty());
  r = cli({"index", project_});
  EXPECT_EQ(r.exit_code, 2);  // no media root configured at all
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliFixture, ExitCodesAreDistinct) {
  ASSERT_EQ(cli({"init", project_}).exit_code, 0);
  EXPECT_EQ(cli({"init", project_}).exit_code, 2);
  EXPECT_EQ(cli({"query", (tmp_.path() / "absent").string(), "horse"}).exit_code, 3);
  EXPECT_EQ(cli({"index", project_, media_.string()}, "AVSEARCH_EXTRACTOR_ENDPOINT=http://127.0.0.1:1").exit_code, 4);
  EXPECT_EQ(cli({"aggregate", "--shards", "127.0.0.1:1", "--timeout-ms", "200"}).exit_code, 5);
  EXPECT_EQ(cli({"frobnicate"}).exit_code, 2);
}

TEST_F(CliFixture, QueryPrintsJsonLines) {
  init_and_index();
  auto r = cli({"query", project_, "horse"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto lines = testing::lines_of(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(json::parse(lines[0])["name"], "two.wisedesc");
  EXPECT_EQ(json::parse(lines[1])["name"], "one.wisedesc");

  r = cli({"query", project_, "-m", "speech", "world war"});
  ASSERT_EQ(r.exit_code, 0);
  ASSERT_EQ(testing::lines_of(r.out).size(), 1u);
  EXPECT_EQ(json::parse(r.out)["snippet"], "world war");

  r = cli({"query", project_, "-m", "metadata", "country:Germany"});
  ASSERT_EQ(testing::lines_of(r.out).size(), 1u);
  EXPECT_FALSE(json::parse(r.out).contains("t_start"));

  r = cli({"query", project_, "-m", "audio", "gunshot", "--table"});
  EXPECT_NE(r.out.find("three.wisedesc"), std::string::npos);

  EXPECT_EQ(cli({"query", project_, "  "}).exit_code, 1);
  EXPECT_EQ(cli({"query", project_, "horse", "-m", "smell"}).exit_code, 1);
}

TEST_F(CliFixture, QueryOutputEqualsServedSearch) {
  init_and_index();
  testing::ChildProcess server({kCli, "serve", project_, "--port", "0"});
  const int port = testing::port_from_banner(server.read_line());
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  httplib::Client http("127.0.0.1", port);
  for (const auto& [modality, text] : std::vector<std::pair<std::string, std::string>>{
           {"scene", "horse"}, {"scene", "horse country:Germany"}, {"speech", "world war"},
           {"metadata", "country:France"}, {"audio", "gunshot"}}) {
    Query q;
    q.modality = *parse_query_modality(modality);
    q.text = text;
    auto res = http.Post("/search", to_json(q).dump(), "application/json");
    ASSERT_TRUE(res);
    std::vector<std::string> expected;
    const json body = json::parse(res->body);
    for (const auto& hit : body["results"]) expected.push_back(hit.dump());

    auto local = cli({"query", project_, "-m", modality, text});
    ASSERT_EQ(local.exit_code, 0) << local.err;
    EXPECT_EQ(testing::lines_of(local.out), expected) << modality << " " << text;
    auto remote = cli({"query", url, "-m", modality, text});
    ASSERT_EQ(remote.exit_code, 0) << remote.err;
    EXPECT_EQ(testing::lines_of(remote.out), expected);
  }
}

TEST_F(CliFixture, ExemplarQueryFromFile) {
  init_and_index();
  testing::write_json(tmp_.path() / "query.wisedesc",
                      {{"kind", "image"}, {"scene_text", {{{"start", 0}, {"text", "field"}}}}});
  auto r = cli({"query", project_, "--exemplar", (tmp_.path() / "query.wisedesc").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto lines = testing::lines_of(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(json::parse(lines[0])["name"], "one.wisedesc");
}

TEST_F(CliFixture, PortComesFromEnvironment) {
  init_and_index();
  const int port = testing::free_port();
  setenv("AVSEARCH_PORT", std::to_string(port).c_str(), 1);
  testing::ChildProcess server({kCli, "serve", project_});
  unsetenv("AVSEARCH_PORT");
  EXPECT_EQ(testing::port_from_banner(server.read_line()), port);
}

}  // namespace
}  // namespace avsearch
