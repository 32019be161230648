#include "groundsql/stepwise/prefix.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "groundsql/sql/printer.hpp"

namespace groundsql::stepwise {

using sql::ClauseKind;
using sql::QueryAst;
using sql::SubqueryUnit;

namespace {

std::vector<std::size_t> direct_refs(const SubqueryUnit& unit) {
  std::vector<std::size_t> out;
  auto add = [&](const sql::SubqueryRef& r) { out.push_back(r.unit); };
  if (unit.where) sql::for_each_subquery(*unit.where, add);
  if (unit.having) sql::for_each_subquery(*unit.having, add);
  return out;
}

// Builds an AST from selected members of `source` (one of them optionally
// replaced), pulling in every unit they depend on and renumbering references.
QueryAst assemble(const QueryAst& source, const std::vector<std::size_t>& members, std::size_t replaced,
                  const SubqueryUnit* replacement, std::vector<sql::SetOperator> set_ops) {
  auto unit_at = [&](std::size_t i) -> const SubqueryUnit& {
    return replacement != nullptr && i == replaced ? *replacement : source.units.at(i);
  };
  std::set<std::size_t> needed;
  std::vector<std::size_t> stack(members.begin(), members.end());
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (!needed.insert(i).second) continue;
    for (std::size_t dep : direct_refs(unit_at(i))) stack.push_back(dep);
  }
  std::map<std::size_t, std::size_t> renumber;
  QueryAst out;
  for (std::size_t i : needed) {
    renumber[i] = out.units.size();
    out.units.push_back(unit_at(i));
  }
  auto fix = [&](sql::SubqueryRef& r) { r.unit = renumber.at(r.unit); };
  for (auto& unit : out.units) {
    if (unit.where) sql::for_each_subquery(*unit.where, fix);
    if (unit.having) sql::for_each_subquery(*unit.having, fix);
  }
  out.set_ops = std::move(set_ops);
  return out;
}

bool contains_aggregate(const sql::SelectClause& select, const sql::Aggregate& agg) {
  return std::any_of(select.items.begin(), select.items.end(), [&](const sql::Projection& p) {
    auto* a = std::get_if<sql::Aggregate>(&p.expr);
    return a != nullptr && sql::structurally_equal(*a, agg);
  });
}

void fill_placeholder_select(SubqueryUnit& unit) {
  unit.select = {};
  if (unit.group_by.empty()) return;  // SELECT *
  for (const auto& key : unit.group_by) unit.select.items.push_back({key, ""});
  const sql::Aggregate count_all{sql::AggregateFn::kCount, std::nullopt, false};
  unit.select.items.push_back({count_all, "record_count"});
  for (const auto& item : unit.order_by) {
    auto* agg = std::get_if<sql::Aggregate>(&item.expr);
    if (agg != nullptr && !contains_aggregate(unit.select, *agg)) unit.select.items.push_back({*agg, ""});
  }
}

}  // namespace

PrefixQuery prefix_query(const explain::ExplanationPlan& plan, std::size_t unit_index, std::size_t step_index) {
  const QueryAst& source = plan.source_ast;
  const explain::ExplanationBlock* block = nullptr;
  for (const auto& b : plan.blocks) {
    if (b.unit_index == unit_index) block = &b;
  }
  if (block == nullptr || unit_index >= source.units.size() || step_index < 1 || step_index > block->steps.size()) {
    throw InvalidPrefix("no step " + std::to_string(step_index) + " in block " + std::to_string(unit_index));
  }

  PrefixQuery out;
  out.unit_index = unit_index;
  out.step_index = step_index;

  std::set<ClauseKind> kinds;
  for (std::size_t k = 0; k < step_index; ++k) kinds.insert(block->steps[k].clause_kind);
  const ClauseKind current = block->steps[step_index - 1].clause_kind;

  const auto top = source.top_level_units();
  const auto position = source.top_level_position(unit_index);
  auto earlier_members = [&](std::size_t count) {
    return std::vector<std::size_t>(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(count));
  };
  auto leading_ops = [&](std::size_t members) {
    const std::size_t n = members == 0 ? 0 : std::min(members - 1, source.set_ops.size());
    return std::vector<sql::SetOperator>(source.set_ops.begin(), source.set_ops.begin() + static_cast<std::ptrdiff_t>(n));
  };

  // The connector step shows what the earlier members produce together.
  if (current == ClauseKind::kSetOp) {
    if (!position || *position == 0) throw InvalidPrefix("set operation step outside a compound query");
    out.ast = assemble(source, earlier_members(*position), 0, nullptr, leading_ops(*position));
    return out;
  }

  SubqueryUnit partial;
  const SubqueryUnit& original = source.units[unit_index];
  for (ClauseKind kind : sql::present_clauses(original)) {
    const bool wanted = kinds.count(kind) > 0 || (kind == ClauseKind::kFrom && kinds.count(ClauseKind::kJoin) > 0) ||
                        (kind == ClauseKind::kJoin && kinds.count(ClauseKind::kFrom) > 0);
    if (wanted) sql::install_clause(partial, sql::extract_clause(original, kind));
  }
  if (partial.from.tables.empty()) throw InvalidPrefix("prefix has no FROM clause");
  if (partial.having && partial.group_by.empty()) throw InvalidPrefix("HAVING without its GROUP BY");

  const bool has_select = kinds.count(ClauseKind::kSelect) > 0;
  if (!has_select) {
    fill_placeholder_select(partial);
    out.synthesized_select = true;
  }

  if (has_select && position && *position > 0) {
    // Once the member is complete, show the compound up to and including it.
    auto members = earlier_members(*position + 1);
    out.ast = assemble(source, members, unit_index, &partial, leading_ops(members.size()));
  } else {
    out.ast = assemble(source, {unit_index}, unit_index, &partial, {});
  }
  return out;
}

IntermediateResult intermediate_result(const db::Database& database, const explain::ExplanationPlan& plan,
                                       std::size_t unit_index, std::size_t step_index, const db::ExecLimits& limits) {
  IntermediateResult out;
  out.prefix = prefix_query(plan, unit_index, step_index);
  out.sql = sql::print_sql(out.prefix.ast);
  out.result = database.execute_readonly(out.sql, limits);
  return out;
}

}  // namespace groundsql::stepwise
