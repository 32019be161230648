#include "groundsql/nlq/provider.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "groundsql/sql/parser.hpp"
#include "util/http_json.hpp"

namespace groundsql::nlq {

namespace {

std::string describe(const std::vector<sql::Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) out += (out.empty() ? "" : "; ") + sql::to_string(d);
  return out;
}

// Case and spacing differences between the typed question and the fixture
// key are ignored.
std::string question_key(const std::string& q) { return sql::normalize_identifier(q); }

std::shared_ptr<spdlog::logger> audit_log() {
  auto logger = spdlog::get("groundsql.nlq");
  return logger ? logger : spdlog::default_logger();
}

}  // namespace

InvalidSqlFromProvider::InvalidSqlFromProvider(std::string raw, std::vector<sql::Diagnostic> diagnostics)
    : Error("InvalidSqlFromProvider", "provider returned unusable SQL: " + describe(diagnostics)),
      raw_(std::move(raw)),
      diagnostics_(std::move(diagnostics)) {}

FixtureProvider::FixtureProvider(const std::vector<std::string>& files, std::string name) : name_(std::move(name)) {
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw ProviderError("cannot read question fixture " + file);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      for (const auto& e : j.at("entries")) {
        entries_.push_back({question_key(e.at("question").get<std::string>()), e.value("database", ""),
                            e.at("sql").get<std::string>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError("malformed question fixture " + file + ": " + e.what());
    }
  }
}

std::string FixtureProvider::raw_sql(const NlqRequest& request) {
  const std::string key = question_key(request.question);
  for (const auto& e : entries_) {
    if (e.question_key != key) continue;
    if (!request.database.empty() && !e.database.empty() && e.database != request.database) continue;
    return e.sql;
  }
  throw ProviderError("no fixture answer for question: " + request.question);
}

std::string HttpProvider::raw_sql(const NlqRequest& request) {
  nlohmann::json body = {{"question", request.question}, {"schema", sql::to_json(request.schema)}};
  nlohmann::json reply;
  try {
    reply = util::post_json(url_, body, timeout_ms_, "ProviderError");
  } catch (const Error& e) {
    throw ProviderError(e.what());
  }
  if (!reply.is_object() || !reply.contains("sql") || !reply["sql"].is_string()) {
    throw ProviderError("provider reply has no sql string");
  }
  return reply["sql"].get<std::string>();
}

NlqResponse generate_sql(const NlqRequest& request, NlqProvider& provider) {
  bool blank = true;
  for (char c : request.question) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw Error("InvalidQuestion", "the question is empty");

  const std::string raw = provider.raw_sql(request);
  audit_log()->info("nlq provider={} database={} question=\"{}\" raw_sql=\"{}\"", provider.name(), request.database,
                    request.question, raw);

  auto reject = [&](const std::string& code, const std::string& message) {
    throw InvalidSqlFromProvider(raw, {sql::Diagnostic{code, 0, std::nullopt, message}});
  };
  const std::string keyword = sql::leading_keyword(raw);
  if (keyword != "SELECT") reject("NonSelectRejected", "statement starts with " + (keyword.empty() ? "nothing" : keyword));

  NlqResponse out;
  out.sql = raw;
  out.provider = provider.name();
  try {
    out.ast = sql::parse_sql(raw, &request.schema);
  } catch (const Error& e) {
    reject(e.kind(), e.what());
  }
  auto diagnostics = sql::validate(out.ast, request.schema);
  if (!diagnostics.empty()) throw InvalidSqlFromProvider(raw, std::move(diagnostics));
  return out;
}

}  // namespace groundsql::nlq
