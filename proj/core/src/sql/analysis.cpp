#include "groundsql/sql/analysis.hpp"

#include <map>
#include <set>

namespace groundsql::sql {

std::vector<UnitClauses> decompose(const QueryAst& ast) {
  std::vector<UnitClauses> out;
  for (std::size_t u = 0; u < ast.units.size(); ++u) {
    UnitClauses entry;
    entry.unit = u;
    if (auto pos = ast.top_level_position(u); pos && *pos > 0) entry.clauses.push_back({u, ClauseKind::kSetOp});
    for (auto kind : present_clauses(ast.units[u])) entry.clauses.push_back({u, kind});
    out.push_back(std::move(entry));
  }
  return out;
}

namespace {

class Validator {
 public:
  Validator(const QueryAst& ast, const Schema& schema) : ast_(ast), schema_(schema) {}

  std::vector<Diagnostic> run() {
    if (ast_.units.empty()) {
      report("InvariantViolation", 0, std::nullopt, "query has no units");
      return diags_;
    }
    std::map<std::size_t, std::size_t> ref_counts;
    for (std::size_t u = 0; u < ast_.units.size(); ++u) {
      check_unit(u);
      for (auto r : ast_.subquery_refs(u)) {
        ++ref_counts[r];
        if (r >= u) report("InvariantViolation", u, ClauseKind::kWhere, "subquery reference must point at an earlier unit");
      }
    }
    for (const auto& [target, count] : ref_counts) {
      if (count > 1) report("InvariantViolation", target, std::nullopt, "unit is referenced more than once");
    }
    check_compound();
    return diags_;
  }

 private:
  void report(std::string code, std::size_t unit, std::optional<ClauseKind> clause, std::string message) {
    diags_.push_back({std::move(code), unit, clause, std::move(message)});
  }

  void check_unit(std::size_t u) {
    const SubqueryUnit& unit = ast_.units[u];
    std::vector<const TableDef*> scope;
    const ClauseKind from_kind = unit.from.tables.size() > 1 ? ClauseKind::kJoin : ClauseKind::kFrom;
    if (unit.from.tables.empty()) report("InvariantViolation", u, ClauseKind::kFrom, "unit has no FROM table");
    std::set<std::string> seen;
    for (const auto& name : unit.from.tables) {
      if (!seen.insert(normalize_identifier(name)).second) {
        report("InvariantViolation", u, from_kind, "table " + name + " appears twice");
      }
      const TableDef* t = schema_.find_table(name);
      if (t == nullptr) {
        report("ResolveError", u, from_kind, "unknown table " + name);
      } else {
        scope.push_back(t);
      }
    }
    if (unit.from.tables.size() == 1 && !unit.from.joins.empty()) {
      report("InvariantViolation", u, ClauseKind::kFrom, "join condition without a joined table");
    }

    for_each_column(unit, [&](const ColumnRef& c, ClauseKind kind) { check_column(u, c, kind, scope); });

    if (unit.where) {
      for_each_aggregate(*unit.where, [&](const Aggregate&) {
        report("InvariantViolation", u, ClauseKind::kWhere, "aggregate in WHERE");
      });
    }
    if (unit.having && unit.group_by.empty()) {
      report("InvariantViolation", u, ClauseKind::kHaving, "HAVING requires GROUP BY");
    }
    if (unit.limit && *unit.limit < 0) report("InvariantViolation", u, ClauseKind::kOrderLimit, "negative LIMIT");

    auto check_subquery = [&](const SubqueryRef& ref, ClauseKind kind) {
      if (ref.unit >= ast_.units.size()) {
        report("InvariantViolation", u, kind, "subquery reference out of range");
        return;
      }
      const auto& items = ast_.units[ref.unit].select.items;
      bool single = items.size() == 1 && !std::holds_alternative<Star>(items.front().expr);
      if (!single) report("InvariantViolation", ref.unit, ClauseKind::kSelect, "subquery must return exactly one column");
    };
    if (unit.where) for_each_subquery(*unit.where, [&](const SubqueryRef& r) { check_subquery(r, ClauseKind::kWhere); });
    if (unit.having) {
      for_each_subquery(*unit.having, [&](const SubqueryRef& r) { check_subquery(r, ClauseKind::kHaving); });
    }
  }

  void check_column(std::size_t u, const ColumnRef& c, ClauseKind kind, const std::vector<const TableDef*>& scope) {
    if (!c.table.empty()) {
      const TableDef* owner = nullptr;
      for (const auto* t : scope) {
        if (same_identifier(t->name, c.table)) owner = t;
      }
      if (owner == nullptr) {
        // Unknown tables were already reported; a known table outside FROM is its own problem.
        bool in_from = false;
        for (const auto& name : ast_.units[u].from.tables) in_from = in_from || same_identifier(name, c.table);
        if (!in_from) report("ResolveError", u, kind, "table " + c.table + " is not in FROM");
        return;
      }
      if (owner->find_column(c.column) == nullptr) {
        report("ResolveError", u, kind, "unknown column " + c.table + "." + c.column);
      }
      return;
    }
    int matches = 0;
    for (const auto* t : scope) matches += t->find_column(c.column) != nullptr ? 1 : 0;
    if (matches == 0) report("ResolveError", u, kind, "unknown column " + c.column);
    if (matches > 1) report("ResolveError", u, kind, "ambiguous column " + c.column);
  }

  std::optional<std::size_t> result_arity(const SubqueryUnit& unit) const {
    std::size_t n = 0;
    for (const auto& item : unit.select.items) {
      if (!std::holds_alternative<Star>(item.expr)) {
        ++n;
        continue;
      }
      for (const auto& name : unit.from.tables) {
        const TableDef* t = schema_.find_table(name);
        if (t == nullptr) return std::nullopt;
        n += t->columns.size();
      }
    }
    if (unit.select.items.empty()) {
      for (const auto& name : unit.from.tables) {
        const TableDef* t = schema_.find_table(name);
        if (t == nullptr) return std::nullopt;
        n += t->columns.size();
      }
    }
    return n;
  }

  void check_compound() {
    const auto top = ast_.top_level_units();
    if (ast_.set_ops.size() + 1 != top.size()) {
      report("InvariantViolation", top.empty() ? 0 : top.back(), ClauseKind::kSetOp,
             "expected " + std::to_string(top.size() == 0 ? 0 : top.size() - 1) + " set operators, found " +
                 std::to_string(ast_.set_ops.size()));
    }
    if (top.size() < 2) return;
    std::optional<std::size_t> arity;
    for (auto u : top) {
      const auto& unit = ast_.units[u];
      if (!unit.order_by.empty() || unit.limit) {
        report("InvariantViolation", u, ClauseKind::kOrderLimit, "ORDER BY/LIMIT inside a compound query");
      }
      auto a = result_arity(unit);
      if (!a) continue;
      if (arity && *arity != *a) {
        report("InvariantViolation", u, ClauseKind::kSelect, "compound members return different column counts");
      }
      arity = a;
    }
  }

  const QueryAst& ast_;
  const Schema& schema_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> validate(const QueryAst& ast, const Schema& schema) { return Validator(ast, schema).run(); }

std::string to_string(const Diagnostic& d) {
  std::string out = d.code + " in unit " + std::to_string(d.unit);
  if (d.clause) out += " (" + std::string(to_string(*d.clause)) + ")";
  return out + ": " + d.message;
}

}  // namespace groundsql::sql
