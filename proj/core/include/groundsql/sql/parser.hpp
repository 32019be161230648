#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundsql/error.hpp"
#include "groundsql/sql/ast.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::sql {

class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::string expected, const std::string& found)
      : Error("ParseError", "parse error at offset " + std::to_string(position) + ": expected " + expected +
                                ", found " + found),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class ResolveError : public Error {
 public:
  explicit ResolveError(std::string name, const std::string& detail = "unknown reference")
      : Error("ResolveError", detail + ": " + name), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

enum class TokenKind { kWord, kQuotedIdentifier, kString, kNumber, kSymbol, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;  // unquoted contents for strings and quoted identifiers
  std::size_t offset = 0;
};

/// Splits SQL text into tokens. Throws ParseError on characters outside the
/// dialect (unterminated quotes, stray symbols).
std::vector<Token> tokenize(std::string_view text);

/// First keyword of the statement, uppercased ("SELECT", "DELETE", ...), or
/// empty when the text does not start with a word.
std::string leading_keyword(std::string_view text);

/// Parses one statement of the supported dialect. Nested subqueries are
/// lifted into their own units (inner first). When `schema` is given every
/// reference is resolved and canonicalized to the schema's spelling;
/// otherwise unqualified columns are attributed only when the FROM clause
/// names a single table.
QueryAst parse_sql(std::string_view text, const Schema* schema = nullptr);

/// Parses a single clause such as "WHERE year = 2022" or "ORDER BY x DESC
/// LIMIT 1". Column references stay unresolved (table set only when written
/// qualified). Subqueries are rejected.
ClauseFragment parse_clause_fragment(std::string_view text);

/// Resolves every reference in `unit` against `schema`: canonicalizes table
/// and column spelling and attributes unqualified columns to the single FROM
/// table that declares them. Throws ResolveError.
void resolve_unit(SubqueryUnit& unit, const Schema& schema);

/// Resolves the columns of a detached clause against the FROM tables given.
void resolve_fragment(ClauseFragment& fragment, const std::vector<std::string>& scope_tables, const Schema& schema);

}  // namespace groundsql::sql
