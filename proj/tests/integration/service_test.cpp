#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>

#include "server.hpp"
#include "uaml/scenario.hpp"
#include "uaml/service.hpp"

namespace uaml {
namespace {

std::string data(const std::string& rel) { return std::string(UAML_DATA_DIR) + "/" + rel; }

NetworkSpec route_network() { return spec_from_json(read_json_file(data("route_network.json"))); }

std::string row_body(int row) {
  return dump_json(read_json_file(data("evidence/row" + std::to_string(row) + ".json")));
}

TEST(Session, Model) {
  const service::Session s(route_network());
  const auto r = s.get_model();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "application/json");
  const Json j = parse_json(r.body);
  EXPECT_EQ(j["nodes"].size(), 8u);
}

TEST(Session, RejectsNonPolytree) {
  NetworkSpec net = route_network();
  std::vector<NodeSpec> nodes = net.structure.nodes();
  for (auto& n : nodes) {
    if (n.name == "RB") n.parents.push_back("CD");
  }
  net.structure = Structure(nodes);
  EXPECT_THROW(service::Session{net}, Error);
}

TEST(Session, ScenarioRows) {
  const service::Session s(route_network());
  const Json j = parse_json(s.get_scenario_rows().body);
  ASSERT_EQ(j.size(), 5u);
  EXPECT_EQ(j[3]["evidence"]["hard"]["CCA"], "norm");
}

TEST(Session, InferMatchesSharedPath) {
  const NetworkSpec net = route_network();
  const service::Session s(net);
  const auto r = s.post_infer(row_body(2));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, dump_json(service::infer_document(net, scenario::canonical_rows()[1].evidence)));
}

TEST(Session, UnknownNodeIs400NamingIt) {
  const service::Session s(route_network());
  const auto r = s.post_infer(R"({"hard": {"BRIDGE": "up"}})");
  EXPECT_EQ(r.status, 400);
  const Json j = parse_json(r.body);
  EXPECT_EQ(j["error"]["code"], "invalid-evidence");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("BRIDGE"), std::string::npos);
}

TEST(Session, MalformedJsonIs400WithPosition) {
  const service::Session s(route_network());
  const auto r = s.post_infer("{\"hard\": {\n  \"CD\": }");
  EXPECT_EQ(r.status, 400);
  const Json j = parse_json(r.body);
  EXPECT_EQ(j["error"]["line"], 2);
  EXPECT_TRUE(j["error"].contains("column"));
}

TEST(Session, ImpossibleEvidenceIs422) {
  // RA = safe is impossible given CD = neg.
  NetworkSpec net = route_network();
  const std::size_t ra = *net.structure.find("RA");
  net.cpts[ra][1] = Opinion({0.0, 1.0}, 0.0);
  const service::Session s(net);
  const auto r = s.post_infer(R"({"hard": {"CD": "neg", "RA": "safe"}})");
  EXPECT_EQ(r.status, 422);
  const Json j = parse_json(r.body);
  EXPECT_EQ(j["error"]["code"], "inconsistent-evidence");
  EXPECT_FALSE(j["diagnostics"].empty());
}

TEST(Session, ConcurrentRequestsAgree) {
  const service::Session s(route_network());
  std::vector<std::string> bodies;
  for (int row = 1; row <= 5; ++row) bodies.push_back(row_body(row));
  std::vector<std::string> expected;
  for (const auto& b : bodies) expected.push_back(s.post_infer(b).body);
  std::vector<std::jthread> workers;
  std::vector<int> mismatches(8, 0);
  for (int w = 0; w < 8; ++w) {
    workers.emplace_back([&, w] {
      for (int i = 0; i < 10; ++i) {
        const std::size_t k = (w + i) % bodies.size();
        mismatches[w] += s.post_infer(bodies[k]).body != expected[k];
      }
    });
  }
  workers.clear();
  for (int m : mismatches) EXPECT_EQ(m, 0);
}

class LiveServer : public ::testing::Test {
 protected:
  void SetUp() override {
    session_ = std::make_unique<service::Session>(route_network());
    server_ = std::make_unique<cli::ApiServer>(*session_, std::filesystem::path());
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::jthread([this] { server_->listen(); });
  }
  void TearDown() override {
    server_->stop();
    thread_ = {};
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_connection_timeout(5);
    return c;
  }

  std::unique_ptr<service::Session> session_;
  std::unique_ptr<cli::ApiServer> server_;
  int port_ = 0;
  std::jthread thread_;
};

TEST_F(LiveServer, Endpoints) {
  auto c = client();
  auto model = c.Get("/api/model");
  ASSERT_TRUE(model);
  EXPECT_EQ(model->status, 200);
  EXPECT_EQ(model->body, session_->get_model().body);

  auto rows = c.Get("/api/scenario/rows");
  ASSERT_TRUE(rows);
  EXPECT_EQ(parse_json(rows->body).size(), 5u);

  const std::string body = row_body(4);
  auto infer = c.Post("/api/infer", body, "application/json");
  ASSERT_TRUE(infer);
  EXPECT_EQ(infer->status, 200);
  EXPECT_EQ(infer->body, session_->post_infer(body).body);

  auto bad = c.Post("/api/infer", R"({"hard": {"BRIDGE": "up"}})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto index = c.Get("/");
  ASSERT_TRUE(index);
  EXPECT_EQ(index->status, 200);
  EXPECT_NE(index->body.find("/api/infer"), std::string::npos);
}

}  // namespace
}  // namespace uaml
