#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundsql/error.hpp"
#include "groundsql/explain/plan.hpp"
#include "groundsql/link/similarity.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::link {

struct StepId {
  std::size_t unit = 0;
  std::size_t index = 1;

  friend bool operator==(const StepId&, const StepId&) = default;
  friend auto operator<=>(const StepId&, const StepId&) = default;
};

class UnknownStep : public Error {
 public:
  explicit UnknownStep(StepId id)
      : Error("UnknownStep", "no step " + std::to_string(id.index) + " in block " + std::to_string(id.unit)) {}
};

struct LinkEntry {
  StepId step;
  explain::EntitySpan span;
};

/// Span-to-entity table for one plan. Built once, then only read.
class LinkMap {
 public:
  LinkMap() = default;

  const std::vector<LinkEntry>& entries() const { return entries_; }
  const std::vector<StepId>& steps() const { return steps_; }
  bool has_step(StepId id) const;
  std::vector<explain::EntitySpan> spans_for(StepId id) const;

  /// Entities keyed by identifier normal form (tables and columns).
  const std::map<std::string, std::vector<explain::SpanTarget>>& schema_index() const { return schema_index_; }

  /// Copy with the spans of one step replaced.
  LinkMap with_step(StepId id, const std::vector<explain::EntitySpan>& spans) const;

 private:
  friend LinkMap build_links(const explain::ExplanationPlan& plan, const sql::Schema& schema);

  std::vector<StepId> steps_;
  std::vector<LinkEntry> entries_;
  std::map<std::string, std::vector<explain::SpanTarget>> schema_index_;
};

LinkMap build_links(const explain::ExplanationPlan& plan, const sql::Schema& schema);

struct RelinkOptions {
  /// Block the text belongs to; gives column lookups their table scope and
  /// bounds "the result of the N-th query" references.
  std::optional<std::size_t> unit_index;
  double min_similarity = kDefaultMinSimilarity;
};

/// Spans for free text. A sentence that fits the explanation grammar keeps the
/// grammar's spans; anything else falls back to fuzzy matching of word runs
/// against table and column names.
std::vector<explain::EntitySpan> relink_step(std::string_view edited_text, const sql::Schema& schema,
                                             const explain::ExplanationPlan& plan_context,
                                             const RelinkOptions& options = {});

/// The fuzzy fallback on its own.
std::vector<explain::EntitySpan> fuzzy_link(std::string_view text, const sql::Schema& schema,
                                            const std::vector<std::string>& scope_tables,
                                            double min_similarity = kDefaultMinSimilarity);

struct HighlightTarget {
  enum class Kind { kTable, kColumn, kSubqueryResult };
  Kind kind = Kind::kTable;
  std::optional<std::string> table;
  std::optional<std::string> column;
  std::optional<std::size_t> unit_index;

  friend bool operator==(const HighlightTarget&, const HighlightTarget&) = default;
};

/// Value spans highlight the column they were compared against, if any.
std::optional<HighlightTarget> highlight_of(const explain::SpanTarget& target);

/// Target of the span covering `offset` (code points). Throws UnknownStep.
std::optional<HighlightTarget> resolve_hover(const LinkMap& links, StepId step, std::size_t offset);

nlohmann::json to_json(const HighlightTarget& target);
HighlightTarget highlight_from_json(const nlohmann::json& j);

}  // namespace groundsql::link
