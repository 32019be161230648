#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundsql/error.hpp"
#include "groundsql/explain/plan.hpp"
#include "groundsql/link/similarity.hpp"
#include "groundsql/refine/backend.hpp"
#include "groundsql/sql/analysis.hpp"
#include "groundsql/sql/ast.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::refine {

class UnparsableStep : public Error {
 public:
  UnparsableStep(std::size_t unit, std::size_t step, const std::string& text, const std::string& why = {})
      : Error("UnparsableStep", "cannot read step " + std::to_string(step) + " of block " + std::to_string(unit) +
                                    ": \"" + text + "\"" + (why.empty() ? "" : " (" + why + ")")),
        unit_(unit),
        step_(step) {}
  std::size_t unit() const noexcept { return unit_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t unit_;
  std::size_t step_;
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& what, std::vector<sql::Diagnostic> diagnostics = {})
      : Error("ConflictError", what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<sql::Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<sql::Diagnostic> diagnostics_;
};

/// Guess the clause a free-form step describes from its opening words.
sql::ClauseKind classify_step(std::string_view text);

enum class Confidence { kExact, kBackend };

struct ClauseParse {
  sql::ClauseFragment fragment;
  Confidence confidence = Confidence::kExact;
  std::vector<explain::EntitySpan> spans;  // only for exact parses
};

struct StepParseContext {
  const sql::Schema* schema = nullptr;
  std::vector<std::string> scope_tables;
  std::size_t unit_index = 0;
  double min_similarity = link::kDefaultMinSimilarity;
};

/// Step grammar first, then the backend. Backend answers are parsed as SQL
/// and resolved against the scope before they are accepted. Throws
/// UnparsableStep (unit/step taken from `where`).
ClauseParse parse_step(std::string_view text, const StepParseContext& context, sql::ClauseKind kind_hint,
                       ClauseBackend& backend, std::pair<std::size_t, std::size_t> where = {0, 0});

struct EditOp {
  enum class Kind { kUpdate, kAdd, kDelete };
  Kind kind = Kind::kUpdate;
  std::size_t unit_index = 0;
  /// 1-based; for add, the insertion position (at most one past the end).
  std::size_t step_index = 1;
  std::string new_text;
};

nlohmann::json to_json(const EditOp& op);
/// Throws groundsql::Error("FormatError").
EditOp edit_from_json(const nlohmann::json& j);

struct EditOutcome {
  sql::QueryAst ast;
  explain::ExplanationPlan plan;
};

/// Applies a batch of edits to the plan's query and regenerates the plan.
/// All or nothing: any failure throws and nothing is changed.
EditOutcome apply_edits(const explain::ExplanationPlan& plan, const std::vector<EditOp>& edits,
                        const sql::Schema& schema, ClauseBackend& backend,
                        double min_similarity = link::kDefaultMinSimilarity);

struct Snapshot {
  explain::ExplanationPlan plan;
  std::string digest;

  const sql::QueryAst& ast() const { return plan.source_ast; }
};

/// Linear undo/redo over plan snapshots. A push after undo drops the redo tail.
class History {
 public:
  explicit History(explain::ExplanationPlan initial);

  const Snapshot& current() const { return snapshots_[cursor_]; }
  std::size_t cursor() const { return cursor_; }
  std::size_t size() const { return snapshots_.size(); }
  bool can_undo() const { return cursor_ > 0; }
  bool can_redo() const { return cursor_ + 1 < snapshots_.size(); }

  void push(explain::ExplanationPlan plan);
  /// Throw groundsql::Error("NothingToUndo") / ("NothingToRedo").
  const Snapshot& undo();
  const Snapshot& redo();

 private:
  std::vector<Snapshot> snapshots_;
  std::size_t cursor_ = 0;
};

}  // namespace groundsql::refine
