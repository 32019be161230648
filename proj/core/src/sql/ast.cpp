#include "groundsql/sql/ast.hpp"

#include <algorithm>
#include <set>

#include "groundsql/sql/schema.hpp"

namespace groundsql::sql {

std::string_view to_string(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::kMin: return "MIN";
    case AggregateFn::kMax: return "MAX";
    case AggregateFn::kCount: return "COUNT";
    case AggregateFn::kSum: return "SUM";
    case AggregateFn::kAvg: return "AVG";
  }
  return "COUNT";
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq: return "=";
    case CompareOp::kNe: return "!=";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
  }
  return "=";
}

std::string_view to_string(SetOperator op) {
  switch (op) {
    case SetOperator::kUnion: return "union";
    case SetOperator::kUnionAll: return "union_all";
    case SetOperator::kIntersect: return "intersect";
    case SetOperator::kExcept: return "except";
  }
  return "union";
}

std::optional<SetOperator> set_operator_from_string(std::string_view name) {
  if (name == "union") return SetOperator::kUnion;
  if (name == "union_all") return SetOperator::kUnionAll;
  if (name == "intersect") return SetOperator::kIntersect;
  if (name == "except") return SetOperator::kExcept;
  return std::nullopt;
}

std::string_view to_string(ClauseKind kind) {
  switch (kind) {
    case ClauseKind::kFrom: return "from";
    case ClauseKind::kJoin: return "join";
    case ClauseKind::kWhere: return "where";
    case ClauseKind::kGroupBy: return "group_by";
    case ClauseKind::kHaving: return "having";
    case ClauseKind::kOrderLimit: return "order_limit";
    case ClauseKind::kSelect: return "select";
    case ClauseKind::kSetOp: return "set_op";
  }
  return "select";
}

std::optional<ClauseKind> clause_kind_from_string(std::string_view name) {
  for (auto kind : {ClauseKind::kFrom, ClauseKind::kJoin, ClauseKind::kWhere, ClauseKind::kGroupBy,
                    ClauseKind::kHaving, ClauseKind::kOrderLimit, ClauseKind::kSelect, ClauseKind::kSetOp}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

Predicate Predicate::leaf(Atom atom) {
  Predicate p;
  p.kind = Kind::kAtom;
  p.atom = std::move(atom);
  return p;
}

namespace {

Predicate combine(Predicate::Kind kind, std::vector<Predicate> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  Predicate p;
  p.kind = kind;
  for (auto& part : parts) {
    if (part.kind == kind) {
      for (auto& child : part.children) p.children.push_back(std::move(child));
    } else {
      p.children.push_back(std::move(part));
    }
  }
  return p;
}

}  // namespace

Predicate Predicate::all_of(std::vector<Predicate> parts) { return combine(Kind::kAnd, std::move(parts)); }
Predicate Predicate::any_of(std::vector<Predicate> parts) { return combine(Kind::kOr, std::move(parts)); }

Predicate Predicate::negate(Predicate inner) {
  Predicate p;
  p.kind = Kind::kNot;
  p.children.push_back(std::move(inner));
  return p;
}

std::vector<std::size_t> QueryAst::top_level_units() const {
  std::set<std::size_t> consumed;
  for (std::size_t u = 0; u < units.size(); ++u) {
    for (auto ref : subquery_refs(u)) consumed.insert(ref);
  }
  std::vector<std::size_t> top;
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (!consumed.contains(u)) top.push_back(u);
  }
  return top;
}

std::vector<std::size_t> QueryAst::subquery_refs(std::size_t unit) const {
  std::vector<std::size_t> refs;
  const auto& u = units.at(unit);
  auto collect = [&](const SubqueryRef& r) { refs.push_back(r.unit); };
  if (u.where) for_each_subquery(*u.where, collect);
  if (u.having) for_each_subquery(*u.having, collect);
  return refs;
}

std::optional<std::size_t> QueryAst::top_level_position(std::size_t unit) const {
  const auto top = top_level_units();
  auto it = std::find(top.begin(), top.end(), unit);
  if (it == top.end()) return std::nullopt;
  return static_cast<std::size_t>(it - top.begin());
}

bool has_clause(const SubqueryUnit& unit, ClauseKind kind) {
  switch (kind) {
    case ClauseKind::kFrom: return unit.from.tables.size() == 1;
    case ClauseKind::kJoin: return unit.from.tables.size() > 1;
    case ClauseKind::kWhere: return unit.where.has_value();
    case ClauseKind::kGroupBy: return !unit.group_by.empty();
    case ClauseKind::kHaving: return unit.having.has_value();
    case ClauseKind::kOrderLimit: return !unit.order_by.empty() || unit.limit.has_value();
    case ClauseKind::kSelect: return true;
    case ClauseKind::kSetOp: return false;
  }
  return false;
}

ClauseFragment extract_clause(const SubqueryUnit& unit, ClauseKind kind) {
  ClauseFragment f;
  f.kind = kind;
  switch (kind) {
    case ClauseKind::kFrom:
    case ClauseKind::kJoin: f.body.from = unit.from; break;
    case ClauseKind::kWhere: f.body.where = unit.where; break;
    case ClauseKind::kGroupBy: f.body.group_by = unit.group_by; break;
    case ClauseKind::kHaving: f.body.having = unit.having; break;
    case ClauseKind::kOrderLimit:
      f.body.order_by = unit.order_by;
      f.body.limit = unit.limit;
      break;
    case ClauseKind::kSelect: f.body.select = unit.select; break;
    case ClauseKind::kSetOp: break;
  }
  return f;
}

void remove_clause(SubqueryUnit& unit, ClauseKind kind) {
  switch (kind) {
    case ClauseKind::kFrom:
    case ClauseKind::kJoin: unit.from = {}; break;
    case ClauseKind::kWhere: unit.where.reset(); break;
    case ClauseKind::kGroupBy: unit.group_by.clear(); break;
    case ClauseKind::kHaving: unit.having.reset(); break;
    case ClauseKind::kOrderLimit:
      unit.order_by.clear();
      unit.limit.reset();
      break;
    case ClauseKind::kSelect: unit.select = {}; break;
    case ClauseKind::kSetOp: break;
  }
}

void install_clause(SubqueryUnit& unit, const ClauseFragment& fragment) {
  switch (fragment.kind) {
    case ClauseKind::kFrom:
    case ClauseKind::kJoin: unit.from = fragment.body.from; break;
    case ClauseKind::kWhere: unit.where = fragment.body.where; break;
    case ClauseKind::kGroupBy: unit.group_by = fragment.body.group_by; break;
    case ClauseKind::kHaving: unit.having = fragment.body.having; break;
    case ClauseKind::kOrderLimit:
      unit.order_by = fragment.body.order_by;
      unit.limit = fragment.body.limit;
      break;
    case ClauseKind::kSelect: unit.select = fragment.body.select; break;
    case ClauseKind::kSetOp: break;
  }
}

std::vector<ClauseKind> present_clauses(const SubqueryUnit& unit) {
  std::vector<ClauseKind> kinds;
  for (auto kind : {ClauseKind::kFrom, ClauseKind::kJoin, ClauseKind::kWhere, ClauseKind::kGroupBy,
                    ClauseKind::kHaving, ClauseKind::kOrderLimit, ClauseKind::kSelect}) {
    if (has_clause(unit, kind)) kinds.push_back(kind);
  }
  return kinds;
}

namespace {

template <typename Op, typename Fn>
void visit_operand_columns(Op& op, const Fn& fn) {
  if (auto* c = std::get_if<ColumnRef>(&op)) {
    fn(*c);
  } else if (auto* a = std::get_if<Aggregate>(&op)) {
    if (a->arg) fn(*a->arg);
  }
}

template <typename P, typename Fn>
void visit_predicate_columns(P& pred, const Fn& fn) {
  if (pred.kind != Predicate::Kind::kAtom) {
    for (auto& child : pred.children) visit_predicate_columns(child, fn);
    return;
  }
  std::visit(
      [&](auto& atom) {
        using T = std::decay_t<decltype(atom)>;
        visit_operand_columns(atom.lhs, fn);
        if constexpr (std::is_same_v<T, Compare>) {
          visit_operand_columns(atom.rhs, fn);
        } else if constexpr (std::is_same_v<T, Between>) {
          visit_operand_columns(atom.low, fn);
          visit_operand_columns(atom.high, fn);
        }
      },
      pred.atom);
}

template <typename P, typename Fn>
void visit_predicate_subqueries(P& pred, const Fn& fn) {
  if (pred.kind != Predicate::Kind::kAtom) {
    for (auto& child : pred.children) visit_predicate_subqueries(child, fn);
    return;
  }
  std::visit(
      [&](auto& atom) {
        using T = std::decay_t<decltype(atom)>;
        if constexpr (std::is_same_v<T, InSubquery> || std::is_same_v<T, CompareSubquery>) fn(atom.subquery);
      },
      pred.atom);
}

template <typename U, typename Fn>
void visit_unit_columns(U& unit, const Fn& fn) {
  for (auto& item : unit.select.items) {
    if (auto* c = std::get_if<ColumnRef>(&item.expr)) {
      fn(*c, ClauseKind::kSelect);
    } else if (auto* a = std::get_if<Aggregate>(&item.expr)) {
      if (a->arg) fn(*a->arg, ClauseKind::kSelect);
    }
  }
  const ClauseKind from_kind = unit.from.tables.size() > 1 ? ClauseKind::kJoin : ClauseKind::kFrom;
  for (auto& j : unit.from.joins) {
    fn(j.left, from_kind);
    fn(j.right, from_kind);
  }
  if (unit.where) visit_predicate_columns(*unit.where, [&](auto& c) { fn(c, ClauseKind::kWhere); });
  for (auto& c : unit.group_by) fn(c, ClauseKind::kGroupBy);
  if (unit.having) visit_predicate_columns(*unit.having, [&](auto& c) { fn(c, ClauseKind::kHaving); });
  for (auto& o : unit.order_by) {
    if (auto* c = std::get_if<ColumnRef>(&o.expr)) {
      fn(*c, ClauseKind::kOrderLimit);
    } else if (auto* a = std::get_if<Aggregate>(&o.expr)) {
      if (a->arg) fn(*a->arg, ClauseKind::kOrderLimit);
    }
  }
}

}  // namespace

void for_each_column(SubqueryUnit& unit, const std::function<void(ColumnRef&, ClauseKind)>& fn) {
  visit_unit_columns(unit, fn);
}
void for_each_column(const SubqueryUnit& unit, const std::function<void(const ColumnRef&, ClauseKind)>& fn) {
  visit_unit_columns(unit, fn);
}
void for_each_column(Predicate& pred, const std::function<void(ColumnRef&)>& fn) { visit_predicate_columns(pred, fn); }
void for_each_column(const Predicate& pred, const std::function<void(const ColumnRef&)>& fn) {
  visit_predicate_columns(pred, fn);
}
void for_each_subquery(Predicate& pred, const std::function<void(SubqueryRef&)>& fn) {
  visit_predicate_subqueries(pred, fn);
}
void for_each_subquery(const Predicate& pred, const std::function<void(const SubqueryRef&)>& fn) {
  visit_predicate_subqueries(pred, fn);
}

void for_each_aggregate(const Predicate& pred, const std::function<void(const Aggregate&)>& fn) {
  if (pred.kind != Predicate::Kind::kAtom) {
    for (const auto& child : pred.children) for_each_aggregate(child, fn);
    return;
  }
  auto visit_op = [&](const Operand& op) {
    if (const auto* a = std::get_if<Aggregate>(&op)) fn(*a);
  };
  std::visit(
      [&](const auto& atom) {
        using T = std::decay_t<decltype(atom)>;
        visit_op(atom.lhs);
        if constexpr (std::is_same_v<T, Compare>) {
          visit_op(atom.rhs);
        } else if constexpr (std::is_same_v<T, Between>) {
          visit_op(atom.low);
          visit_op(atom.high);
        }
      },
      pred.atom);
}

// ---------------------------------------------------------------------------
// Structural equality

bool structurally_equal(const ColumnRef& a, const ColumnRef& b) {
  return same_identifier(a.table, b.table) && same_identifier(a.column, b.column);
}

namespace {

bool optional_column_equal(const std::optional<ColumnRef>& a, const std::optional<ColumnRef>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || structurally_equal(*a, *b);
}

bool select_expr_equal(const SelectExpr& a, const SelectExpr& b) {
  if (a.index() != b.index()) return false;
  if (const auto* c = std::get_if<ColumnRef>(&a)) return structurally_equal(*c, std::get<ColumnRef>(b));
  if (const auto* g = std::get_if<Aggregate>(&a)) return structurally_equal(*g, std::get<Aggregate>(b));
  return true;
}

bool order_expr_equal(const OrderExpr& a, const OrderExpr& b) {
  if (a.index() != b.index()) return false;
  if (const auto* c = std::get_if<ColumnRef>(&a)) return structurally_equal(*c, std::get<ColumnRef>(b));
  return structurally_equal(std::get<Aggregate>(a), std::get<Aggregate>(b));
}

bool atom_equal(const Atom& a, const Atom& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, Compare>) {
          return x.op == y.op && structurally_equal(x.lhs, y.lhs) && structurally_equal(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, Between>) {
          return structurally_equal(x.lhs, y.lhs) && structurally_equal(x.low, y.low) &&
                 structurally_equal(x.high, y.high);
        } else if constexpr (std::is_same_v<T, Like>) {
          return structurally_equal(x.lhs, y.lhs) && structurally_equal(x.pattern, y.pattern);
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          return structurally_equal(x.lhs, y.lhs) && x.subquery.unit == y.subquery.unit;
        } else {
          return x.op == y.op && structurally_equal(x.lhs, y.lhs) && x.subquery.unit == y.subquery.unit;
        }
      },
      a);
}

bool joins_equal(const std::vector<JoinCondition>& a, const std::vector<JoinCondition>& b) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& ja : a) {
    bool found = false;
    for (std::size_t i = 0; i < b.size() && !found; ++i) {
      if (used[i]) continue;
      const auto& jb = b[i];
      const bool same = (structurally_equal(ja.left, jb.left) && structurally_equal(ja.right, jb.right)) ||
                        (structurally_equal(ja.left, jb.right) && structurally_equal(ja.right, jb.left));
      if (same) used[i] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

bool optional_predicate_equal(const std::optional<Predicate>& a, const std::optional<Predicate>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || structurally_equal(*a, *b);
}

}  // namespace

bool structurally_equal(const Aggregate& a, const Aggregate& b) {
  return a.fn == b.fn && a.distinct == b.distinct && optional_column_equal(a.arg, b.arg);
}

bool structurally_equal(const Literal& a, const Literal& b) { return a.kind == b.kind && a.text == b.text; }

bool structurally_equal(const Operand& a, const Operand& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        return structurally_equal(x, std::get<T>(b));
      },
      a);
}

bool structurally_equal(const Predicate& a, const Predicate& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Predicate::Kind::kAtom) return atom_equal(a.atom, b.atom);
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

bool equal_up_to_conjunct_order(const Predicate& a, const Predicate& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Predicate::Kind::kAtom) return atom_equal(a.atom, b.atom);
  if (a.children.size() != b.children.size()) return false;
  if (a.kind == Predicate::Kind::kNot) return equal_up_to_conjunct_order(a.children[0], b.children[0]);
  std::vector<bool> used(b.children.size(), false);
  for (const auto& ca : a.children) {
    bool found = false;
    for (std::size_t i = 0; i < b.children.size() && !found; ++i) {
      if (!used[i] && equal_up_to_conjunct_order(ca, b.children[i])) used[i] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

static bool select_equal(const SelectClause& a, const SelectClause& b) {
  // An empty projection list and a lone `*` print identically.
  auto items_of = [](const SelectClause& s) {
    if (!s.items.empty()) return s.items;
    return std::vector<Projection>{Projection{Star{}, ""}};
  };
  const auto ia = items_of(a);
  const auto ib = items_of(b);
  if (a.distinct != b.distinct || ia.size() != ib.size()) return false;
  for (std::size_t i = 0; i < ia.size(); ++i) {
    if (!select_expr_equal(ia[i].expr, ib[i].expr)) return false;
    if (!same_identifier(ia[i].alias, ib[i].alias)) return false;
  }
  return true;
}

bool structurally_equal(const SubqueryUnit& a, const SubqueryUnit& b) {
  if (!select_equal(a.select, b.select)) return false;
  if (a.from.tables.size() != b.from.tables.size()) return false;
  for (std::size_t i = 0; i < a.from.tables.size(); ++i) {
    if (!same_identifier(a.from.tables[i], b.from.tables[i])) return false;
  }
  if (!joins_equal(a.from.joins, b.from.joins)) return false;
  if (!optional_predicate_equal(a.where, b.where)) return false;
  if (a.group_by.size() != b.group_by.size()) return false;
  for (std::size_t i = 0; i < a.group_by.size(); ++i) {
    if (!structurally_equal(a.group_by[i], b.group_by[i])) return false;
  }
  if (!optional_predicate_equal(a.having, b.having)) return false;
  if (a.order_by.size() != b.order_by.size()) return false;
  for (std::size_t i = 0; i < a.order_by.size(); ++i) {
    if (a.order_by[i].direction != b.order_by[i].direction) return false;
    if (!order_expr_equal(a.order_by[i].expr, b.order_by[i].expr)) return false;
  }
  return a.limit == b.limit;
}

bool structurally_equal(const QueryAst& a, const QueryAst& b) {
  if (a.units.size() != b.units.size() || a.set_ops != b.set_ops) return false;
  for (std::size_t i = 0; i < a.units.size(); ++i) {
    if (!structurally_equal(a.units[i], b.units[i])) return false;
  }
  return true;
}

bool structurally_equal(const ClauseFragment& a, const ClauseFragment& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == ClauseKind::kSetOp) return a.set_op == b.set_op;
  SubqueryUnit ua;
  SubqueryUnit ub;
  install_clause(ua, a);
  install_clause(ub, b);
  return structurally_equal(ua, ub);
}

}  // namespace groundsql::sql
