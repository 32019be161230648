#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groundsql/error.hpp"
#include "groundsql/explain/plan.hpp"
#include "groundsql/sql/ast.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::explain {

class UnsupportedConstruct : public Error {
 public:
  explicit UnsupportedConstruct(const std::string& what) : Error("UnsupportedConstruct", what) {}
};

struct RenderContext {
  const sql::Schema& schema;
  const sql::QueryAst& ast;
  std::size_t unit_index = 0;
  bool multi_unit = false;
};

struct RenderedText {
  std::string text;
  std::vector<EntitySpan> spans;
};

/// Text and entity spans for one clause of a unit. kSetOp renders the
/// connector that joins this unit to the preceding top-level members.
RenderedText render_clause(const sql::ClauseRef& clause, const RenderContext& context);

/// Builds the step-by-step plan, one block per unit in unit order. The AST is
/// resolved against the schema first; the plan keeps the resolved copy.
ExplanationPlan explain(const sql::QueryAst& ast, const sql::Schema& schema);

/// FNV-1a over the canonical JSON form of the plan, as 16 hex digits.
std::string explanation_digest(const ExplanationPlan& plan);

/// "first" ... "tenth"; empty past ten.
std::string ordinal_word(std::size_t n);
/// "Start the first query", ..., "Start query 11".
std::string block_header(std::size_t unit_index);
/// "the first query", ..., "query 11".
std::string query_reference(std::size_t unit_index);

/// Join conditions implied by the schema's foreign keys for tables joined in
/// this order, or nullopt when some table cannot be attached unambiguously.
std::optional<std::vector<sql::JoinCondition>> infer_join_conditions(const std::vector<std::string>& tables,
                                                                    const sql::Schema& schema);

/// Whether two join-condition lists denote the same set of equalities.
bool same_join_conditions(const std::vector<sql::JoinCondition>& a, const std::vector<sql::JoinCondition>& b);

/// Spoken form of an identifier: lowercase with '_' as space.
std::string phrase_of(const std::string& identifier);

/// True when a string value can be written without quotes and still be read
/// back unambiguously by the step grammar.
bool bare_value_ok(const std::string& value);

}  // namespace groundsql::explain
