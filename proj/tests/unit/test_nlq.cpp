#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "groundsql/nlq/provider.hpp"
#include "support.hpp"

using namespace groundsql;

namespace {

class ScriptedProvider final : public nlq::NlqProvider {
 public:
  explicit ScriptedProvider(std::string sql) : sql_(std::move(sql)) {}
  std::string name() const override { return "scripted"; }
  std::string raw_sql(const nlq::NlqRequest&) override { return sql_; }

 private:
  std::string sql_;
};

nlq::NlqRequest request_for(const std::string& database, const std::string& question) {
  return {question, testkit::open_fixture(database).schema, database};
}

const char* kJetBlue = "What is the abbreviation for airline \"JetBlue Airways\"?";

}  // namespace

TEST(FixtureProvider, ReturnsGroundTruth) {
  nlq::FixtureProvider fixtures({testkit::corpus_dir() + "/questions.json"});
  EXPECT_EQ(fixtures.size(), 14u);
  const auto out = nlq::generate_sql(request_for("flight_2", kJetBlue), fixtures);
  EXPECT_EQ(out.sql, R"(SELECT Abbreviation FROM AIRLINES WHERE Airline = "JetBlue Airways")");
  EXPECT_EQ(out.provider, "fixture");
  EXPECT_EQ(out.ast.units.size(), 1u);
  // lookups ignore case and spacing
  auto loose = request_for("flight_2", "  what is the ABBREVIATION for airline \"JetBlue Airways\"?");
  EXPECT_EQ(fixtures.raw_sql(loose), out.sql);
}

TEST(FixtureProvider, EarlierFilesWin) {
  nlq::FixtureProvider mutated(
      {testkit::corpus_dir() + "/questions_mutated.json", testkit::corpus_dir() + "/questions.json"});
  EXPECT_EQ(mutated.raw_sql(request_for("flight_2", kJetBlue)),
            R"(SELECT Abbreviation FROM AIRLINES WHERE Airline = "JetBlue")");
  EXPECT_EQ(mutated.raw_sql(request_for("travel_flights", testkit::kScenarioQuestion)), testkit::kScenarioSql);
}

TEST(FixtureProvider, UnknownQuestionOrDatabase) {
  nlq::FixtureProvider fixtures({testkit::corpus_dir() + "/questions.json"});
  EXPECT_THROW(fixtures.raw_sql(request_for("flight_2", "How tall is the tower?")), nlq::ProviderError);
  EXPECT_THROW(fixtures.raw_sql(request_for("car_1", kJetBlue)), nlq::ProviderError);
  EXPECT_THROW(nlq::FixtureProvider({testkit::scratch_dir() + "/none.json"}), Error);
}

TEST(GenerateSql, RejectsNonSelect) {
  ScriptedProvider p("DELETE FROM flight");
  try {
    nlq::generate_sql(request_for("flight_prices", "drop it"), p);
    FAIL();
  } catch (const nlq::InvalidSqlFromProvider& e) {
    EXPECT_EQ(e.raw(), "DELETE FROM flight");
    ASSERT_EQ(e.diagnostics().size(), 1u);
  }
}

TEST(GenerateSql, RejectsUnknownColumn) {
  ScriptedProvider p("SELECT altitude FROM flight");
  try {
    nlq::generate_sql(request_for("flight_prices", "how high"), p);
    FAIL();
  } catch (const nlq::InvalidSqlFromProvider& e) {
    ASSERT_FALSE(e.diagnostics().empty());
    EXPECT_EQ(e.diagnostics()[0].code, "ResolveError");
  }
}

TEST(GenerateSql, RejectsMalformedAndInvalid) {
  ScriptedProvider garbage("SELECT FROM WHERE");
  EXPECT_THROW(nlq::generate_sql(request_for("flight_prices", "q"), garbage), nlq::InvalidSqlFromProvider);
  ScriptedProvider having("SELECT price FROM flight HAVING price > 1");
  EXPECT_THROW(nlq::generate_sql(request_for("flight_prices", "q"), having), nlq::InvalidSqlFromProvider);
}

TEST(GenerateSql, BlankQuestion) {
  ScriptedProvider p("SELECT price FROM flight");
  try {
    nlq::generate_sql(request_for("flight_prices", " \t"), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "InvalidQuestion");
  }
}

TEST(HttpProvider, RoundTrip) {
  httplib::Server server;
  nlohmann::json seen;
  server.Post("/sql", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"sql": "SELECT MIN(price) FROM flight"})", "application/json");
  });
  server.Post("/bad", [](const httplib::Request&, httplib::Response& res) { res.set_content(R"({"text": 1})", "application/json"); });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  nlq::HttpProvider http(base + "/sql", 2000);
  const auto out = nlq::generate_sql(request_for("flight_prices", "cheapest fare"), http);
  EXPECT_EQ(out.sql, "SELECT MIN(price) FROM flight");
  EXPECT_EQ(seen["question"], "cheapest fare");
  EXPECT_EQ(seen["schema"]["tables"][0]["name"], "flight");

  nlq::HttpProvider bad(base + "/bad", 2000);
  EXPECT_THROW(bad.raw_sql(request_for("flight_prices", "q")), nlq::ProviderError);
  nlq::HttpProvider missing(base + "/nothing-here", 2000);
  EXPECT_THROW(missing.raw_sql(request_for("flight_prices", "q")), nlq::ProviderError);
  server.stop();
  t.join();
  nlq::HttpProvider down(base + "/sql", 300);
  EXPECT_THROW(down.raw_sql(request_for("flight_prices", "q")), nlq::ProviderError);
}
