#include "groundsql/link/linker.hpp"

#include <algorithm>
#include <tuple>

#include <nlohmann/json.hpp>

#include "groundsql/explain/grammar.hpp"

namespace groundsql::link {

using explain::EntitySpan;
using explain::SpanTarget;

bool LinkMap::has_step(StepId id) const { return std::find(steps_.begin(), steps_.end(), id) != steps_.end(); }

std::vector<EntitySpan> LinkMap::spans_for(StepId id) const {
  std::vector<EntitySpan> out;
  for (const auto& e : entries_) {
    if (e.step == id) out.push_back(e.span);
  }
  return out;
}

LinkMap LinkMap::with_step(StepId id, const std::vector<EntitySpan>& spans) const {
  LinkMap copy = *this;
  std::erase_if(copy.entries_, [&](const LinkEntry& e) { return e.step == id; });
  if (!copy.has_step(id)) {
    copy.steps_.push_back(id);
    std::sort(copy.steps_.begin(), copy.steps_.end());
  }
  for (const auto& s : spans) copy.entries_.push_back({id, s});
  std::stable_sort(copy.entries_.begin(), copy.entries_.end(),
                   [](const LinkEntry& a, const LinkEntry& b) { return a.step < b.step; });
  return copy;
}

LinkMap build_links(const explain::ExplanationPlan& plan, const sql::Schema& schema) {
  LinkMap map;
  for (const auto& block : plan.blocks) {
    for (const auto& step : block.steps) {
      const StepId id{step.unit_index, step.step_index};
      map.steps_.push_back(id);
      for (const auto& span : step.spans) map.entries_.push_back({id, span});
    }
  }
  for (const auto& table : schema.tables) {
    map.schema_index_[sql::normalize_identifier(table.name)].push_back(explain::TableTarget{table.name});
    for (const auto& column : table.columns) {
      map.schema_index_[sql::normalize_identifier(column.name)].push_back(explain::ColumnTarget{table.name, column.name});
    }
  }
  return map;
}

namespace {

struct Candidate {
  std::size_t first_token = 0;
  std::size_t token_count = 0;
  double sim = 0.0;
  SpanTarget target;
};

// Best entity for one phrase: highest similarity, then columns before tables,
// then the shorter name, then declaration order (tables walked in order).
std::optional<std::pair<double, SpanTarget>> best_entity(const std::string& phrase, const sql::Schema& schema,
                                                         const std::vector<std::string>& scope, double threshold) {
  std::optional<std::pair<double, SpanTarget>> best;
  std::tuple<double, int, long long, int> best_key{};
  auto in_scope = [&](const std::string& table) {
    return std::any_of(scope.begin(), scope.end(), [&](const std::string& t) { return sql::same_identifier(t, table); });
  };
  auto consider = [&](double sim, bool is_column, const std::string& name, bool scoped, SpanTarget target) {
    if (sim < threshold) return;
    // Larger key wins; earlier declarations win exact ties.
    std::tuple<double, int, long long, int> key{sim, is_column ? 1 : 0, -static_cast<long long>(name.size()),
                                                scoped ? 1 : 0};
    if (!best || key > best_key) {
      best_key = key;
      best = std::make_pair(sim, std::move(target));
    }
  };
  for (const auto& table : schema.tables) {
    consider(similarity(phrase, table.name), false, table.name, in_scope(table.name), explain::TableTarget{table.name});
  }
  for (const auto& table : schema.tables) {
    for (const auto& column : table.columns) {
      consider(similarity(phrase, column.name), true, column.name, in_scope(table.name),
               explain::ColumnTarget{table.name, column.name});
    }
  }
  return best;
}

}  // namespace

std::vector<EntitySpan> fuzzy_link(std::string_view text, const sql::Schema& schema,
                                   const std::vector<std::string>& scope_tables, double min_similarity) {
  auto tokens = explain::tokenize_step(text);
  if (!tokens) {
    // A stray double quote; blank it out so the words around it still link.
    std::string patched(text);
    patched[patched.rfind('"')] = ' ';
    tokens = explain::tokenize_step(patched);
    if (!tokens) return {};
  }
  const auto& toks = *tokens;
  auto linkable = [&](std::size_t i) {
    return toks[i].kind == explain::StepTokenKind::kWord || toks[i].kind == explain::StepTokenKind::kNumber;
  };

  std::vector<Candidate> candidates;
  constexpr std::size_t kMaxRun = 4;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::string phrase;
    bool has_word = false;
    for (std::size_t n = 1; n <= kMaxRun && i + n <= toks.size() && linkable(i + n - 1); ++n) {
      if (n > 1) phrase += ' ';
      phrase += toks[i + n - 1].text;
      has_word = has_word || toks[i + n - 1].kind == explain::StepTokenKind::kWord;
      if (!has_word) continue;
      // Plain numbers standing alone are values, not names.
      if (auto hit = best_entity(phrase, schema, scope_tables, min_similarity)) {
        candidates.push_back({i, n, hit->first, std::move(hit->second)});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.token_count != b.token_count) return a.token_count > b.token_count;
    return a.first_token < b.first_token;
  });

  std::vector<bool> taken(toks.size(), false);
  std::vector<EntitySpan> out;
  for (auto& c : candidates) {
    bool free = true;
    for (std::size_t k = c.first_token; k < c.first_token + c.token_count; ++k) free = free && !taken[k];
    if (!free) continue;
    for (std::size_t k = c.first_token; k < c.first_token + c.token_count; ++k) taken[k] = true;
    out.push_back({toks[c.first_token].start, toks[c.first_token + c.token_count - 1].end, std::move(c.target)});
  }
  std::sort(out.begin(), out.end(), [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  return out;
}

std::vector<EntitySpan> relink_step(std::string_view edited_text, const sql::Schema& schema,
                                    const explain::ExplanationPlan& plan_context, const RelinkOptions& options) {
  explain::GrammarContext ctx;
  ctx.schema = &schema;
  ctx.min_similarity = options.min_similarity;
  ctx.unit_index = options.unit_index.value_or(plan_context.source_ast.units.size());
  if (options.unit_index && *options.unit_index < plan_context.source_ast.units.size()) {
    ctx.scope_tables = plan_context.source_ast.units[*options.unit_index].from.tables;
  }
  if (auto parsed = explain::parse_step_text(edited_text, ctx)) return parsed->spans;
  return fuzzy_link(edited_text, schema, ctx.scope_tables, options.min_similarity);
}

std::optional<HighlightTarget> highlight_of(const SpanTarget& target) {
  HighlightTarget h;
  if (auto* t = std::get_if<explain::TableTarget>(&target)) {
    h.kind = HighlightTarget::Kind::kTable;
    h.table = t->table;
  } else if (auto* c = std::get_if<explain::ColumnTarget>(&target)) {
    h.kind = HighlightTarget::Kind::kColumn;
    h.table = c->table;
    h.column = c->column;
  } else if (auto* v = std::get_if<explain::ValueTarget>(&target)) {
    if (!v->column_hint || v->column_hint->table.empty()) return std::nullopt;
    h.kind = HighlightTarget::Kind::kColumn;
    h.table = v->column_hint->table;
    h.column = v->column_hint->column;
  } else {
    h.kind = HighlightTarget::Kind::kSubqueryResult;
    h.unit_index = std::get<explain::SubqueryResultTarget>(target).unit_index;
  }
  return h;
}

std::optional<HighlightTarget> resolve_hover(const LinkMap& links, StepId step, std::size_t offset) {
  if (!links.has_step(step)) throw UnknownStep(step);
  const EntitySpan* hit = nullptr;
  for (const auto& e : links.entries()) {
    if (e.step != step || offset < e.span.start || offset >= e.span.end) continue;
    if (hit != nullptr) return std::nullopt;  // overlapping spans: no unique answer
    hit = &e.span;
  }
  if (hit == nullptr) return std::nullopt;
  return highlight_of(hit->target);
}

nlohmann::json to_json(const HighlightTarget& target) {
  nlohmann::json j;
  switch (target.kind) {
    case HighlightTarget::Kind::kTable: j["kind"] = "table"; break;
    case HighlightTarget::Kind::kColumn: j["kind"] = "column"; break;
    case HighlightTarget::Kind::kSubqueryResult: j["kind"] = "subquery_result"; break;
  }
  if (target.table) j["table"] = *target.table;
  if (target.column) j["column"] = *target.column;
  if (target.unit_index) j["unit_index"] = *target.unit_index;
  return j;
}

HighlightTarget highlight_from_json(const nlohmann::json& j) {
  HighlightTarget t;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "table") {
    t.kind = HighlightTarget::Kind::kTable;
  } else if (kind == "column") {
    t.kind = HighlightTarget::Kind::kColumn;
  } else if (kind == "subquery_result") {
    t.kind = HighlightTarget::Kind::kSubqueryResult;
  } else {
    throw Error("FormatError", "unknown highlight kind: " + kind);
  }
  if (j.contains("table")) t.table = j["table"].get<std::string>();
  if (j.contains("column")) t.column = j["column"].get<std::string>();
  if (j.contains("unit_index")) t.unit_index = j["unit_index"].get<std::size_t>();
  return t;
}

}  // namespace groundsql::link
