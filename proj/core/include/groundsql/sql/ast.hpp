#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace groundsql::sql {

enum class AggregateFn { kMin, kMax, kCount, kSum, kAvg };
enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };
enum class SetOperator { kUnion, kUnionAll, kIntersect, kExcept };
enum class SortDirection { kAsc, kDesc };

/// Clause kinds in canonical explanation order. kOrderLimit is ORDER BY and
/// LIMIT fused into one step; kSetOp is the connector that joins a top-level
/// unit to the units before it.
enum class ClauseKind { kFrom, kJoin, kWhere, kGroupBy, kHaving, kOrderLimit, kSelect, kSetOp };

std::string_view to_string(AggregateFn fn);
std::string_view to_string(CompareOp op);
std::string_view to_string(SetOperator op);
std::string_view to_string(ClauseKind kind);
std::optional<ClauseKind> clause_kind_from_string(std::string_view name);
std::optional<SetOperator> set_operator_from_string(std::string_view name);

/// Column reference. `table` holds the resolved table name (never an alias);
/// it is empty only when the column could not be attributed without a schema.
struct ColumnRef {
  std::string table;
  std::string column;
};

/// `arg == nullopt` stands for `*`.
struct Aggregate {
  AggregateFn fn = AggregateFn::kCount;
  std::optional<ColumnRef> arg;
  bool distinct = false;
};

struct Literal {
  enum class Kind { kString, kInteger, kReal };
  Kind kind = Kind::kString;
  std::string text;  // unquoted string contents, or the numeral as written
};

struct Star {};

using Operand = std::variant<ColumnRef, Aggregate, Literal>;
using SelectExpr = std::variant<ColumnRef, Aggregate, Star>;
using OrderExpr = std::variant<ColumnRef, Aggregate>;

/// Index of a lifted subquery unit inside the same QueryAst.
struct SubqueryRef {
  std::size_t unit = 0;
};

struct Compare {
  CompareOp op = CompareOp::kEq;
  Operand lhs;
  Operand rhs;
};

struct Between {
  Operand lhs;
  Operand low;
  Operand high;
};

struct Like {
  Operand lhs;
  Literal pattern;
};

struct InSubquery {
  Operand lhs;
  SubqueryRef subquery;
};

struct CompareSubquery {
  CompareOp op = CompareOp::kEq;
  Operand lhs;
  SubqueryRef subquery;
};

using Atom = std::variant<Compare, Between, Like, InSubquery, CompareSubquery>;

/// Boolean tree over atoms. AND/OR nodes are n-ary and never directly nest a
/// node of the same kind.
struct Predicate {
  enum class Kind { kAtom, kAnd, kOr, kNot };
  Kind kind = Kind::kAtom;
  Atom atom;
  std::vector<Predicate> children;

  static Predicate leaf(Atom atom);
  static Predicate all_of(std::vector<Predicate> parts);
  static Predicate any_of(std::vector<Predicate> parts);
  static Predicate negate(Predicate inner);
};

struct Projection {
  SelectExpr expr;
  std::string alias;
};

/// Empty `items` prints as `SELECT *`.
struct SelectClause {
  bool distinct = false;
  std::vector<Projection> items;
};

struct JoinCondition {
  ColumnRef left;
  ColumnRef right;
};

struct FromClause {
  std::vector<std::string> tables;
  std::vector<JoinCondition> joins;
};

struct OrderItem {
  OrderExpr expr;
  SortDirection direction = SortDirection::kAsc;
};

/// One SELECT statement without set operators.
struct SubqueryUnit {
  SelectClause select;
  FromClause from;
  std::optional<Predicate> where;
  std::vector<ColumnRef> group_by;
  std::optional<Predicate> having;
  std::vector<OrderItem> order_by;
  std::optional<std::int64_t> limit;
};

/// A query as an ordered list of units. Nested subqueries are lifted into
/// their own units, placed before the unit that consumes them. Units not
/// consumed by any SubqueryRef are the top-level members; `set_ops[i]` joins
/// top-level member i and i+1.
struct QueryAst {
  std::vector<SubqueryUnit> units;
  std::vector<SetOperator> set_ops;

  std::vector<std::size_t> top_level_units() const;
  /// Units referenced from `unit`'s predicates, in order of appearance.
  std::vector<std::size_t> subquery_refs(std::size_t unit) const;
  /// Position of `unit` in top_level_units(), if it is a top-level member.
  std::optional<std::size_t> top_level_position(std::size_t unit) const;
};

struct ClauseRef {
  std::size_t unit = 0;
  ClauseKind kind = ClauseKind::kFrom;
};

/// A single clause detached from its unit. Only the fields belonging to
/// `kind` are meaningful.
struct ClauseFragment {
  ClauseKind kind = ClauseKind::kSelect;
  SubqueryUnit body;
  SetOperator set_op = SetOperator::kUnion;
};

bool has_clause(const SubqueryUnit& unit, ClauseKind kind);
ClauseFragment extract_clause(const SubqueryUnit& unit, ClauseKind kind);
void remove_clause(SubqueryUnit& unit, ClauseKind kind);
/// Replaces the clause of `fragment.kind` in `unit` (kSetOp is ignored).
void install_clause(SubqueryUnit& unit, const ClauseFragment& fragment);
/// Clause kinds present in the unit, in canonical order (never kSetOp).
std::vector<ClauseKind> present_clauses(const SubqueryUnit& unit);

// Visitors over every column reference / subquery reference in a unit.
void for_each_column(SubqueryUnit& unit, const std::function<void(ColumnRef&, ClauseKind)>& fn);
void for_each_column(const SubqueryUnit& unit, const std::function<void(const ColumnRef&, ClauseKind)>& fn);
void for_each_column(Predicate& pred, const std::function<void(ColumnRef&)>& fn);
void for_each_column(const Predicate& pred, const std::function<void(const ColumnRef&)>& fn);
void for_each_subquery(Predicate& pred, const std::function<void(SubqueryRef&)>& fn);
void for_each_subquery(const Predicate& pred, const std::function<void(const SubqueryRef&)>& fn);
void for_each_aggregate(const Predicate& pred, const std::function<void(const Aggregate&)>& fn);

// Structural equality: identifiers compare by normalized form, literals by
// kind and exact text, join conditions as unordered column pairs regardless of
// listing order.
bool structurally_equal(const ColumnRef& a, const ColumnRef& b);
bool structurally_equal(const Aggregate& a, const Aggregate& b);
bool structurally_equal(const Literal& a, const Literal& b);
bool structurally_equal(const Operand& a, const Operand& b);
bool structurally_equal(const Predicate& a, const Predicate& b);
bool structurally_equal(const SubqueryUnit& a, const SubqueryUnit& b);
bool structurally_equal(const QueryAst& a, const QueryAst& b);
bool structurally_equal(const ClauseFragment& a, const ClauseFragment& b);

/// Same as structural equality, but AND/OR operands compare as multisets.
bool equal_up_to_conjunct_order(const Predicate& a, const Predicate& b);

}  // namespace groundsql::sql
