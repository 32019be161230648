#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "groundsql/error.hpp"
#include "groundsql/sql/analysis.hpp"
#include "groundsql/sql/ast.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::nlq {

class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what) : Error("ProviderError", what) {}
};

class InvalidSqlFromProvider : public Error {
 public:
  InvalidSqlFromProvider(std::string raw, std::vector<sql::Diagnostic> diagnostics);
  const std::string& raw() const noexcept { return raw_; }
  const std::vector<sql::Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string raw_;
  std::vector<sql::Diagnostic> diagnostics_;
};

struct NlqRequest {
  std::string question;
  sql::Schema schema;
  /// Registry id of the database, when known. Fixture lookups use it to tell
  /// apart identical questions asked of different databases.
  std::string database;
};

struct NlqResponse {
  std::string sql;
  std::string provider;
  sql::QueryAst ast;  // parsed and resolved against the request schema
};

class NlqProvider {
 public:
  virtual ~NlqProvider() = default;
  virtual std::string name() const = 0;
  /// Raw SQL text as the model returned it. Throws ProviderError.
  virtual std::string raw_sql(const NlqRequest& request) = 0;
};

/// Question -> SQL tables read from JSON files of the form
/// {"entries": [{"question", "database", "sql"}]}. Earlier files win.
class FixtureProvider final : public NlqProvider {
 public:
  explicit FixtureProvider(const std::vector<std::string>& files, std::string name = "fixture");
  std::string name() const override { return name_; }
  std::string raw_sql(const NlqRequest& request) override;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::string question_key;
    std::string database;
    std::string sql;
  };
  std::vector<Entry> entries_;
  std::string name_;
};

/// POSTs {question, schema} and expects {sql}.
class HttpProvider final : public NlqProvider {
 public:
  HttpProvider(std::string url, int timeout_ms) : url_(std::move(url)), timeout_ms_(timeout_ms) {}
  std::string name() const override { return "http"; }
  std::string raw_sql(const NlqRequest& request) override;

 private:
  std::string url_;
  int timeout_ms_;
};

/// Asks the provider, writes the raw answer to the audit log, then accepts it
/// only if it is a single SELECT that parses and validates against the schema.
NlqResponse generate_sql(const NlqRequest& request, NlqProvider& provider);

}  // namespace groundsql::nlq
