#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groundsql/sql/ast.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::sql {

struct UnitClauses {
  std::size_t unit = 0;
  std::vector<ClauseRef> clauses;
};

/// Per unit, the clauses present in canonical explanation order: FROM/JOIN,
/// WHERE, GROUP BY, HAVING, ORDER BY (+LIMIT), SELECT. Top-level members after
/// the first start with the set-operator connector.
std::vector<UnitClauses> decompose(const QueryAst& ast);

struct Diagnostic {
  std::string code;  // "ResolveError" or "InvariantViolation"
  std::size_t unit = 0;
  std::optional<ClauseKind> clause;
  std::string message;
};

/// Empty iff every reference resolves against `schema` and the AST invariants
/// hold. Checks are stricter than the grammar in a few places where the
/// execution engine would reject the query (HAVING needs GROUP BY, scalar
/// subqueries must return one column, compound members need equal arity).
std::vector<Diagnostic> validate(const QueryAst& ast, const Schema& schema);

std::string to_string(const Diagnostic& diagnostic);

}  // namespace groundsql::sql
