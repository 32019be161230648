#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "groundsql/refine/backend.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/sql/printer.hpp"
#include "support.hpp"

using namespace groundsql;
using refine::ClauseRequest;
using sql::ClauseKind;

namespace {

const sql::Schema& travel_schema() {
  static const sql::Schema schema = testkit::open_fixture("travel_flights").schema;
  return schema;
}

ClauseRequest request(std::string text, ClauseKind hint, std::vector<std::string> scope = {"flight", "travel"}) {
  return {std::move(text), hint, &travel_schema(), std::move(scope)};
}

// Normalizes through the parser so the test does not depend on spacing.
std::string canonical(const std::optional<std::string>& clause, const std::vector<std::string>& scope) {
  if (!clause) return "<none>";
  auto f = sql::parse_clause_fragment(*clause);
  sql::resolve_fragment(f, scope, travel_schema());
  return sql::print_fragment(f);
}

// Small stand-in for a remote model.
class StubServer {
 public:
  explicit StubServer(httplib::Server::Handler handler) {
    server_.Post("/clause", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/clause"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(RuleBackend, ConstraintSentences) {
  refine::RuleBackend rules;
  const std::vector<std::string> scope{"flight", "travel"};
  auto ask = [&](const std::string& text, ClauseKind hint) { return canonical(rules.propose(request(text, hint)), scope); };
  EXPECT_EQ(ask("Make sure the year in 2022.", ClauseKind::kWhere), "WHERE flight.year = 2022");
  EXPECT_EQ(ask("only flights where month is between January and March", ClauseKind::kWhere),
            R"(WHERE flight.month BETWEEN "January" AND "March")");
  EXPECT_EQ(ask("the year should be at least 2021", ClauseKind::kWhere), "WHERE flight.year >= 2021");
  EXPECT_EQ(ask("year greater than 2020", ClauseKind::kWhere), "WHERE flight.year > 2020");
  EXPECT_EQ(ask("month is not January", ClauseKind::kWhere), R"(WHERE flight.month != "January")");
  EXPECT_EQ(ask("group them by destination", ClauseKind::kGroupBy), "GROUP BY travel.destination");
  EXPECT_EQ(ask("order by year descending, keep 3", ClauseKind::kOrderLimit), "ORDER BY flight.year DESC LIMIT 3");
  EXPECT_EQ(ask("show the airport name", ClauseKind::kSelect), "SELECT travel.airport_name");
  EXPECT_EQ(ask("lorem ipsum", ClauseKind::kWhere), "<none>");
}

TEST(RuleBackend, FromWithInferredJoin) {
  refine::RuleBackend rules;
  const auto out = rules.propose(request("use flight together with travel", ClauseKind::kJoin));
  ASSERT_TRUE(out.has_value());
  const auto f = sql::parse_clause_fragment(*out);
  EXPECT_EQ(f.body.from.tables.size(), 2u);
  EXPECT_EQ(f.body.from.joins.size(), 1u);
}

TEST(Backends, EchoRefusingChain) {
  refine::EchoTemplateBackend echo;
  EXPECT_EQ(echo.propose(request("WHERE year = 1", ClauseKind::kWhere)), "WHERE year = 1");
  refine::RefusingBackend none;
  EXPECT_FALSE(none.propose(request("WHERE year = 1", ClauseKind::kWhere)).has_value());

  refine::ChainBackend chain({std::make_shared<refine::RefusingBackend>(), std::make_shared<refine::EchoTemplateBackend>()});
  EXPECT_EQ(chain.name(), "refusing+echo");
  EXPECT_EQ(chain.propose(request("x", ClauseKind::kWhere)), "x");
}

TEST(Backends, MakeBackend) {
  EXPECT_EQ(refine::make_backend("rules+echo")->name(), "rules+echo");
  EXPECT_EQ(refine::make_backend("refusing")->name(), "refusing");
  EXPECT_EQ(refine::make_backend("http", "http://127.0.0.1:1/x")->name(), "http");
  for (const char* bad : {"oracle", "http", "", "rules+"}) {
    try {
      refine::make_backend(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), "ConfigError") << bad;
    }
  }
}

TEST(HttpBackend, PostsRequestAndReadsFragment) {
  nlohmann::json seen;
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"clause_sql_fragment": "WHERE flight.year = 2022"})", "application/json");
  });
  refine::HttpBackend http(stub.url(), 2000);
  EXPECT_EQ(http.propose(request("Make sure the year in 2022.", ClauseKind::kWhere)), "WHERE flight.year = 2022");
  EXPECT_EQ(seen["step_text"], "Make sure the year in 2022.");
  EXPECT_EQ(seen["kind_hint"], "where");
  EXPECT_TRUE(seen["schema"]["tables"].is_array());
}

TEST(HttpBackend, NullFragmentMeansNoAnswer) {
  StubServer stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"clause_sql_fragment": null})", "application/json");
  });
  refine::HttpBackend http(stub.url(), 2000);
  EXPECT_FALSE(http.propose(request("x", ClauseKind::kWhere)).has_value());
}

TEST(HttpBackend, Failures) {
  StubServer broken([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  EXPECT_THROW(refine::HttpBackend(broken.url(), 2000).propose(request("x", ClauseKind::kWhere)), refine::BackendError);

  StubServer garbled([](const httplib::Request&, httplib::Response& res) { res.set_content("{not json", "application/json"); });
  EXPECT_THROW(refine::HttpBackend(garbled.url(), 2000).propose(request("x", ClauseKind::kWhere)), refine::BackendError);

  StubServer slow([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"clause_sql_fragment": "WHERE flight.year = 1"})", "application/json");
  });
  EXPECT_THROW(refine::HttpBackend(slow.url(), 150).propose(request("x", ClauseKind::kWhere)), refine::BackendError);

  // nothing listens on port 1
  EXPECT_THROW(refine::HttpBackend("http://127.0.0.1:1/clause", 500).propose(request("x", ClauseKind::kWhere)),
               refine::BackendError);
}
