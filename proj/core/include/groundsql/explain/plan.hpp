#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundsql/sql/ast.hpp"

namespace groundsql::explain {

struct TableTarget {
  std::string table;
};

struct ColumnTarget {
  std::string table;
  std::string column;
};

struct ValueTarget {
  sql::Literal literal;
  std::optional<sql::ColumnRef> column_hint;
};

struct SubqueryResultTarget {
  std::size_t unit_index = 0;
};

using SpanTarget = std::variant<TableTarget, ColumnTarget, ValueTarget, SubqueryResultTarget>;

bool same_target(const SpanTarget& a, const SpanTarget& b);

/// [start, end) in code points of the owning step's text.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  SpanTarget target;
};

enum class Origin { kGenerated, kUserEdited, kUserAdded };

std::string_view to_string(Origin origin);

struct ExplanationStep {
  std::size_t unit_index = 0;
  std::size_t step_index = 1;  // 1-based within the block
  sql::ClauseKind clause_kind = sql::ClauseKind::kSelect;
  std::string text;
  std::vector<EntitySpan> spans;
  Origin origin = Origin::kGenerated;
  std::string raw_text;  // what the user typed, kept when origin != generated
};

struct ExplanationBlock {
  std::size_t unit_index = 0;
  std::string header;
  std::vector<ExplanationStep> steps;
};

struct ExplanationPlan {
  std::vector<ExplanationBlock> blocks;
  sql::QueryAst source_ast;

  const ExplanationStep* find_step(std::size_t unit_index, std::size_t step_index) const;
};

nlohmann::json to_json(const SpanTarget& target);
SpanTarget target_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EntitySpan& span);
nlohmann::json to_json(const ExplanationStep& step);
nlohmann::json to_json(const ExplanationPlan& plan);

/// Inverse of to_json(plan). The source AST travels as canonical SQL text.
/// Throws groundsql::Error("PlanFormatError") on malformed input.
ExplanationPlan plan_from_json(const nlohmann::json& j);

}  // namespace groundsql::explain
