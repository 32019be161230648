#pragma once

#include <string>

#include "groundsql/sql/ast.hpp"

namespace groundsql::sql {

/// Canonical SQL text: uppercase keywords, table-qualified columns, double
/// quoted string literals, single spaces. Nested units are printed inline in
/// parentheses where their SubqueryRef appears.
std::string print_sql(const QueryAst& ast);

/// One unit with its nested units inlined.
std::string print_unit(const QueryAst& ast, std::size_t unit);

/// A detached clause ("WHERE flight.year = 2022"). `ast` is only needed when
/// the clause contains subquery references.
std::string print_fragment(const ClauseFragment& fragment, const QueryAst* ast = nullptr);

std::string print_column(const ColumnRef& column);
std::string print_literal(const Literal& literal);
std::string print_aggregate(const Aggregate& aggregate);
std::string print_predicate(const Predicate& predicate, const QueryAst* ast = nullptr);

}  // namespace groundsql::sql
