#include "groundsql/sql/printer.hpp"

#include "groundsql/sql/schema.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace groundsql::sql {

namespace {

bool plain_identifier(const std::string& name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string identifier(const std::string& name) {
  static const char* const kKeywords[] = {"select", "from",  "where",  "group",     "by",     "having", "order",
                                          "limit",  "join",  "on",     "as",        "and",    "or",     "not",
                                          "in",     "like",  "between", "union",    "all",    "except", "intersect",
                                          "distinct", "asc", "desc",   "inner",     "left",   "right",  "is",
                                          "null",   "case",  "when",   "then",      "else",   "end",    "offset",
                                          "natural", "cross", "full",  "outer",     "using",  "exists", "with"};
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  const bool keyword = std::find(std::begin(kKeywords), std::end(kKeywords), lower) != std::end(kKeywords);
  if (plain_identifier(name) && !keyword) return name;
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  out.push_back('`');
  return out;
}

std::string print_operand(const Operand& op) {
  if (auto* c = std::get_if<ColumnRef>(&op)) return print_column(*c);
  if (auto* a = std::get_if<Aggregate>(&op)) return print_aggregate(*a);
  return print_literal(std::get<Literal>(op));
}

std::string compare_symbol(CompareOp op) { return std::string(to_string(op)); }

std::string print_subquery(const SubqueryRef& ref, const QueryAst* ast) {
  if (ast == nullptr || ref.unit >= ast->units.size()) return "(<unit " + std::to_string(ref.unit) + ">)";
  return "(" + print_unit(*ast, ref.unit) + ")";
}

std::string print_atom(const Atom& atom, const QueryAst* ast, bool negated) {
  const std::string no = negated ? "NOT " : "";
  return std::visit(
      [&](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Compare>) {
          return print_operand(a.lhs) + " " + compare_symbol(a.op) + " " + print_operand(a.rhs);
        } else if constexpr (std::is_same_v<T, Between>) {
          return print_operand(a.lhs) + " " + no + "BETWEEN " + print_operand(a.low) + " AND " + print_operand(a.high);
        } else if constexpr (std::is_same_v<T, Like>) {
          return print_operand(a.lhs) + " " + no + "LIKE " + print_literal(a.pattern);
        } else if constexpr (std::is_same_v<T, InSubquery>) {
          return print_operand(a.lhs) + " " + no + "IN " + print_subquery(a.subquery, ast);
        } else {
          return print_operand(a.lhs) + " " + compare_symbol(a.op) + " " + print_subquery(a.subquery, ast);
        }
      },
      atom);
}

bool negatable_inline(const Predicate& p) {
  return p.kind == Predicate::Kind::kAtom && !std::holds_alternative<Compare>(p.atom) &&
         !std::holds_alternative<CompareSubquery>(p.atom);
}

std::string print_pred(const Predicate& p, const QueryAst* ast) {
  switch (p.kind) {
    case Predicate::Kind::kAtom: return print_atom(p.atom, ast, false);
    case Predicate::Kind::kNot: {
      const Predicate& inner = p.children.front();
      if (negatable_inline(inner)) return print_atom(inner.atom, ast, true);
      return "NOT (" + print_pred(inner, ast) + ")";
    }
    case Predicate::Kind::kAnd:
    case Predicate::Kind::kOr: {
      const bool is_and = p.kind == Predicate::Kind::kAnd;
      std::string out;
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        if (i > 0) out += is_and ? " AND " : " OR ";
        const Predicate& c = p.children[i];
        // AND binds tighter than OR, so only an OR under an AND needs parentheses.
        const bool paren = is_and && c.kind == Predicate::Kind::kOr;
        out += paren ? "(" + print_pred(c, ast) + ")" : print_pred(c, ast);
      }
      return out;
    }
  }
  return {};
}

std::string print_select_expr(const SelectExpr& e) {
  if (auto* c = std::get_if<ColumnRef>(&e)) return print_column(*c);
  if (auto* a = std::get_if<Aggregate>(&e)) return print_aggregate(*a);
  return "*";
}

std::string print_select(const SelectClause& s) {
  std::string out = "SELECT ";
  if (s.distinct) out += "DISTINCT ";
  if (s.items.empty()) return out + "*";
  for (std::size_t i = 0; i < s.items.size(); ++i) {
    if (i > 0) out += ", ";
    out += print_select_expr(s.items[i].expr);
    if (!s.items[i].alias.empty()) out += " AS " + identifier(s.items[i].alias);
  }
  return out;
}

std::string print_from(const FromClause& from) {
  std::string out = "FROM ";
  if (from.tables.empty()) return out;
  out += identifier(from.tables.front());
  // Each condition goes after the JOIN of the later of its two tables.
  auto index_of = [&](const std::string& table) -> std::size_t {
    for (std::size_t i = 0; i < from.tables.size(); ++i) {
      if (same_identifier(from.tables[i], table)) return i;
    }
    return from.tables.size() - 1;
  };
  std::vector<std::vector<const JoinCondition*>> placed(from.tables.size());
  for (const auto& j : from.joins) {
    std::size_t at = std::max(index_of(j.left.table), index_of(j.right.table));
    if (at == 0) at = std::min<std::size_t>(1, from.tables.size() - 1);
    placed[at].push_back(&j);
  }
  for (std::size_t i = 1; i < from.tables.size(); ++i) {
    out += " JOIN " + identifier(from.tables[i]);
    for (std::size_t k = 0; k < placed[i].size(); ++k) {
      out += k == 0 ? " ON " : " AND ";
      out += print_column(placed[i][k]->left) + " = " + print_column(placed[i][k]->right);
    }
  }
  return out;
}

std::string print_group_by(const std::vector<ColumnRef>& group) {
  std::string out = "GROUP BY ";
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (i > 0) out += ", ";
    out += print_column(group[i]);
  }
  return out;
}

std::string print_order_limit(const SubqueryUnit& unit) {
  std::string out;
  if (!unit.order_by.empty()) {
    out = "ORDER BY ";
    for (std::size_t i = 0; i < unit.order_by.size(); ++i) {
      if (i > 0) out += ", ";
      const auto& item = unit.order_by[i];
      if (auto* c = std::get_if<ColumnRef>(&item.expr)) {
        out += print_column(*c);
      } else {
        out += print_aggregate(std::get<Aggregate>(item.expr));
      }
      out += item.direction == SortDirection::kDesc ? " DESC" : " ASC";
    }
  }
  if (unit.limit) {
    if (!out.empty()) out += " ";
    out += "LIMIT " + std::to_string(*unit.limit);
  }
  return out;
}

std::string print_clause(const SubqueryUnit& unit, ClauseKind kind, const QueryAst* ast) {
  switch (kind) {
    case ClauseKind::kSelect: return print_select(unit.select);
    case ClauseKind::kFrom:
    case ClauseKind::kJoin: return print_from(unit.from);
    case ClauseKind::kWhere: return unit.where ? "WHERE " + print_pred(*unit.where, ast) : "";
    case ClauseKind::kGroupBy: return unit.group_by.empty() ? "" : print_group_by(unit.group_by);
    case ClauseKind::kHaving: return unit.having ? "HAVING " + print_pred(*unit.having, ast) : "";
    case ClauseKind::kOrderLimit: return print_order_limit(unit);
    case ClauseKind::kSetOp: return "";
  }
  return {};
}

std::string set_op_keyword(SetOperator op) {
  switch (op) {
    case SetOperator::kUnion: return "UNION";
    case SetOperator::kUnionAll: return "UNION ALL";
    case SetOperator::kIntersect: return "INTERSECT";
    case SetOperator::kExcept: return "EXCEPT";
  }
  return "UNION";
}

}  // namespace

std::string print_column(const ColumnRef& column) {
  if (column.table.empty()) return identifier(column.column);
  return identifier(column.table) + "." + identifier(column.column);
}

std::string print_literal(const Literal& literal) {
  if (literal.kind != Literal::Kind::kString) return literal.text;
  std::string out = "\"";
  for (char c : literal.text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string print_aggregate(const Aggregate& aggregate) {
  std::string fn(to_string(aggregate.fn));
  for (auto& c : fn) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::string arg = aggregate.arg ? print_column(*aggregate.arg) : "*";
  if (aggregate.distinct) arg = "DISTINCT " + arg;
  return fn + " (" + arg + ")";
}

std::string print_predicate(const Predicate& predicate, const QueryAst* ast) { return print_pred(predicate, ast); }

std::string print_unit(const QueryAst& ast, std::size_t index) {
  const SubqueryUnit& unit = ast.units.at(index);
  std::string out = print_select(unit.select) + " " + print_from(unit.from);
  for (auto kind : {ClauseKind::kWhere, ClauseKind::kGroupBy, ClauseKind::kHaving, ClauseKind::kOrderLimit}) {
    std::string part = print_clause(unit, kind, &ast);
    if (!part.empty()) out += " " + part;
  }
  return out;
}

std::string print_sql(const QueryAst& ast) {
  const auto top = ast.top_level_units();
  std::string out;
  for (std::size_t i = 0; i < top.size(); ++i) {
    if (i > 0) {
      const SetOperator op = i - 1 < ast.set_ops.size() ? ast.set_ops[i - 1] : SetOperator::kUnion;
      out += " " + set_op_keyword(op) + " ";
    }
    out += print_unit(ast, top[i]);
  }
  return out;
}

std::string print_fragment(const ClauseFragment& fragment, const QueryAst* ast) {
  if (fragment.kind == ClauseKind::kSetOp) return set_op_keyword(fragment.set_op);
  return print_clause(fragment.body, fragment.kind, ast);
}

}  // namespace groundsql::sql
