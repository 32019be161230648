#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundsql/explain/plan.hpp"
#include "groundsql/link/similarity.hpp"
#include "groundsql/sql/ast.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::explain {

// Reads step texts back into clauses. The grammar accepts exactly the
// sentences the explainer produces, plus some slack: entity names may be
// misspelled (similarity above the threshold), "the" before a column is
// optional, and the final period may be dropped.

enum class StepTokenKind { kWord, kNumber, kQuoted, kPunct };

struct StepToken {
  StepTokenKind kind = StepTokenKind::kWord;
  std::string text;   // as written; unescaped contents for quoted tokens
  std::string lower;  // ASCII-lowercased text
  std::size_t start = 0;  // code points, covers quotes for kQuoted
  std::size_t end = 0;
};

/// Returns nullopt for an unterminated quote.
std::optional<std::vector<StepToken>> tokenize_step(std::string_view text);

struct GrammarContext {
  const sql::Schema* schema = nullptr;
  /// FROM tables of the unit the step belongs to (unused for FROM/JOIN steps).
  std::vector<std::string> scope_tables;
  /// References to "the result of the N-th query" must point before this unit.
  std::size_t unit_index = 0;
  double min_similarity = link::kDefaultMinSimilarity;
};

struct ParsedStep {
  sql::ClauseFragment fragment;
  std::vector<EntitySpan> spans;
  /// Sum of (1 - similarity) over entity slots; 0 when every name matched exactly.
  double cost = 0.0;
};

/// Parses a step sentence into a clause. `only` restricts the attempt to one
/// clause kind (kFrom and kJoin are interchangeable). Returns nullopt when no
/// template matches.
std::optional<ParsedStep> parse_step_text(std::string_view text, const GrammarContext& context,
                                          std::optional<sql::ClauseKind> only = std::nullopt);

}  // namespace groundsql::explain
