#include "groundsql/sql/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

namespace groundsql::sql {

namespace {

constexpr std::array kReserved = {
    "SELECT", "FROM",   "WHERE",  "GROUP",   "BY",     "HAVING",    "ORDER",  "LIMIT",    "JOIN",
    "ON",     "AS",     "AND",    "OR",      "NOT",    "IN",        "LIKE",   "BETWEEN",  "UNION",
    "ALL",    "INTERSECT", "EXCEPT", "DISTINCT", "ASC", "DESC",      "INNER",  "LEFT",     "RIGHT",
    "FULL",   "OUTER",  "CROSS",  "NATURAL", "USING",  "IS",        "NULL",   "EXISTS",   "CASE",
    "WHEN",   "THEN",   "ELSE",   "END",     "OFFSET", "APPLY",     "WITH",   "INSERT",   "UPDATE",
    "DELETE", "CREATE", "DROP",   "ALTER",   "VALUES", "SET",       "INTO",   "OVER",     "PARTITION",
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_reserved(std::string_view word) {
  const std::string u = upper(word);
  return std::find(kReserved.begin(), kReserved.end(), u) != kReserved.end();
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::kEnd: return "end of input";
    case TokenKind::kString: return "string \"" + t.text + "\"";
    case TokenKind::kNumber: return "number " + t.text;
    default: return "'" + t.text + "'";
  }
}

CompareOp flip(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return CompareOp::kGt;
    case CompareOp::kLe: return CompareOp::kGe;
    case CompareOp::kGt: return CompareOp::kLt;
    case CompareOp::kGe: return CompareOp::kLe;
    default: return op;
  }
}

std::optional<AggregateFn> aggregate_from_word(std::string_view word) {
  const std::string u = upper(word);
  if (u == "MIN") return AggregateFn::kMin;
  if (u == "MAX") return AggregateFn::kMax;
  if (u == "COUNT") return AggregateFn::kCount;
  if (u == "SUM") return AggregateFn::kSum;
  if (u == "AVG") return AggregateFn::kAvg;
  return std::nullopt;
}

class Parser {
 public:
  Parser(std::string_view text, bool allow_subqueries)
      : tokens_(tokenize(text)), allow_subqueries_(allow_subqueries) {}

  QueryAst parse_statement() {
    QueryAst ast;
    parse_core(ast.units);
    std::size_t members = 1;
    while (true) {
      std::optional<SetOperator> op;
      if (accept_keyword("UNION")) {
        op = accept_keyword("ALL") ? SetOperator::kUnionAll : SetOperator::kUnion;
      } else if (accept_keyword("INTERSECT")) {
        op = SetOperator::kIntersect;
      } else if (accept_keyword("EXCEPT")) {
        op = SetOperator::kExcept;
      }
      if (!op) break;
      ast.set_ops.push_back(*op);
      parse_core(ast.units);
      ++members;
    }
    accept_symbol(";");
    expect_end();
    if (members > 1) {
      for (auto u : ast.top_level_units()) {
        const auto& unit = ast.units[u];
        if (!unit.order_by.empty() || unit.limit) {
          throw ParseError(0, "no ORDER BY or LIMIT inside a compound query", "ORDER BY/LIMIT");
        }
      }
    }
    return ast;
  }

  ClauseFragment parse_fragment() {
    ClauseFragment f;
    std::map<std::string, std::string> aliases;
    if (peek_keyword("SELECT")) {
      advance();
      f.kind = ClauseKind::kSelect;
      f.body.select = parse_select_list();
    } else if (peek_keyword("FROM")) {
      advance();
      f.body.from = parse_from(aliases);
      f.kind = f.body.from.tables.size() > 1 ? ClauseKind::kJoin : ClauseKind::kFrom;
    } else if (accept_keyword("WHERE")) {
      f.kind = ClauseKind::kWhere;
      std::vector<SubqueryUnit> none;
      f.body.where = parse_or(none);
    } else if (peek_keyword("GROUP")) {
      advance();
      expect_keyword("BY");
      f.kind = ClauseKind::kGroupBy;
      f.body.group_by = parse_group_list();
    } else if (accept_keyword("HAVING")) {
      f.kind = ClauseKind::kHaving;
      std::vector<SubqueryUnit> none;
      f.body.having = parse_or(none);
    } else if (peek_keyword("ORDER") || peek_keyword("LIMIT")) {
      f.kind = ClauseKind::kOrderLimit;
      if (accept_keyword("ORDER")) {
        expect_keyword("BY");
        f.body.order_by = parse_order_list();
      }
      if (accept_keyword("LIMIT")) f.body.limit = parse_limit();
    } else {
      fail("clause keyword (SELECT, FROM, WHERE, GROUP BY, HAVING, ORDER BY, LIMIT)");
    }
    accept_symbol(";");
    expect_end();
    if (!aliases.empty()) {
      for_each_column(f.body, [&](ColumnRef& c, ClauseKind) { apply_alias(c, aliases, f.body.from.tables); });
    }
    return f;
  }

 private:
  // Parses one SELECT core, appending lifted subqueries and then the unit
  // itself to `units`. Returns the index of the appended unit.
  std::size_t parse_core(std::vector<SubqueryUnit>& units) {
    const std::size_t start = current().offset;
    expect_keyword("SELECT");
    SubqueryUnit unit;
    std::map<std::string, std::string> aliases;

    unit.select = parse_select_list();
    expect_keyword("FROM");
    unit.from = parse_from(aliases);
    if (accept_keyword("WHERE")) unit.where = parse_or(units);
    if (accept_keyword("GROUP")) {
      expect_keyword("BY");
      unit.group_by = parse_group_list();
    }
    if (accept_keyword("HAVING")) unit.having = parse_or(units);
    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      unit.order_by = parse_order_list();
    }
    if (accept_keyword("LIMIT")) unit.limit = parse_limit();
    if (peek_keyword("OFFSET")) fail("end of SELECT (OFFSET is not supported)");

    for_each_column(unit, [&](ColumnRef& c, ClauseKind) {
      if (!apply_alias(c, aliases, unit.from.tables)) {
        throw ParseError(start, "table or alias declared in this FROM clause (correlated references are not supported)",
                         c.table + "." + c.column);
      }
      if (c.table.empty() && unit.from.tables.size() == 1) c.table = unit.from.tables.front();
    });
    orient_joins(unit.from);
    units.push_back(std::move(unit));
    return units.size() - 1;
  }

  static bool apply_alias(ColumnRef& c, const std::map<std::string, std::string>& aliases,
                          const std::vector<std::string>& tables) {
    if (c.table.empty()) return true;
    auto it = aliases.find(upper(c.table));
    if (it != aliases.end()) {
      c.table = it->second;
      return true;
    }
    for (const auto& t : tables) {
      if (same_identifier(t, c.table)) {
        c.table = t;
        return true;
      }
    }
    return false;
  }

  static void orient_joins(FromClause& from) {
    auto index_of = [&](const std::string& table) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < from.tables.size(); ++i) {
        if (same_identifier(from.tables[i], table)) return i;
      }
      return std::nullopt;
    };
    for (auto& j : from.joins) {
      auto l = index_of(j.left.table);
      auto r = index_of(j.right.table);
      if (l && r && *l > *r) std::swap(j.left, j.right);
    }
  }

  SelectClause parse_select_list() {
    SelectClause select;
    select.distinct = accept_keyword("DISTINCT");
    do {
      Projection item;
      if (accept_symbol("*")) {
        item.expr = Star{};
      } else {
        item.expr = parse_value_expr();
      }
      if (accept_keyword("AS")) {
        item.alias = expect_identifier("alias");
      } else if (current().kind == TokenKind::kWord && !is_reserved(current().text)) {
        item.alias = current().text;
        advance();
      }
      select.items.push_back(std::move(item));
    } while (accept_symbol(","));
    return select;
  }

  FromClause parse_from(std::map<std::string, std::string>& aliases) {
    FromClause from;
    parse_table_ref(from, aliases);
    while (true) {
      if (accept_symbol(",")) fail("JOIN (comma joins are not supported)");
      if (peek_keyword("LEFT") || peek_keyword("RIGHT") || peek_keyword("FULL") || peek_keyword("CROSS") ||
          peek_keyword("NATURAL") || peek_keyword("OUTER")) {
        fail("JOIN (only inner equi-joins are supported)");
      }
      if (accept_keyword("INNER")) {
        expect_keyword("JOIN");
      } else if (!accept_keyword("JOIN")) {
        break;
      }
      parse_table_ref(from, aliases);
      if (accept_keyword("ON")) {
        do {
          JoinCondition cond;
          cond.left = parse_column_ref();
          expect_symbol("=");
          cond.right = parse_column_ref();
          from.joins.push_back(std::move(cond));
        } while (accept_keyword("AND"));
      } else if (peek_keyword("USING")) {
        fail("ON (USING is not supported)");
      }
    }
    return from;
  }

  void parse_table_ref(FromClause& from, std::map<std::string, std::string>& aliases) {
    const std::size_t at = current().offset;
    if (peek_symbol("(")) fail("table name (derived tables are not supported)");
    std::string table = expect_identifier("table name");
    for (const auto& t : from.tables) {
      if (same_identifier(t, table)) throw ParseError(at, "distinct table (self-joins are not supported)", table);
    }
    std::string alias;
    if (accept_keyword("AS")) {
      alias = expect_identifier("alias");
    } else if (current().kind == TokenKind::kWord && !is_reserved(current().text)) {
      alias = current().text;
      advance();
    }
    if (!alias.empty()) {
      if (!aliases.emplace(upper(alias), table).second) throw ParseError(at, "unique alias", alias);
    }
    from.tables.push_back(std::move(table));
  }

  std::vector<ColumnRef> parse_group_list() {
    std::vector<ColumnRef> group;
    do {
      group.push_back(parse_column_ref());
    } while (accept_symbol(","));
    return group;
  }

  std::vector<OrderItem> parse_order_list() {
    std::vector<OrderItem> items;
    do {
      OrderItem item;
      SelectExpr e = parse_value_expr();
      if (auto* c = std::get_if<ColumnRef>(&e)) {
        item.expr = *c;
      } else {
        item.expr = std::get<Aggregate>(e);
      }
      if (accept_keyword("DESC")) {
        item.direction = SortDirection::kDesc;
      } else {
        accept_keyword("ASC");
      }
      items.push_back(std::move(item));
    } while (accept_symbol(","));
    return items;
  }

  std::int64_t parse_limit() {
    const Token& t = current();
    if (t.kind != TokenKind::kNumber || t.text.find('.') != std::string::npos) fail("non-negative integer");
    std::int64_t value = 0;
    try {
      value = std::stoll(t.text);
    } catch (const std::exception&) {
      fail("integer in range");
    }
    advance();
    if (accept_symbol(",")) fail("end of LIMIT (offsets are not supported)");
    return value;
  }

  // Column reference or aggregate call; '*' is only accepted inside COUNT.
  SelectExpr parse_value_expr() {
    const Token& t = current();
    if (t.kind == TokenKind::kWord && peek_symbol_at(1, "(")) {
      auto fn = aggregate_from_word(t.text);
      if (!fn) fail("column or aggregate (MIN, MAX, COUNT, SUM, AVG)");
      advance();
      expect_symbol("(");
      Aggregate agg;
      agg.fn = *fn;
      agg.distinct = accept_keyword("DISTINCT");
      if (accept_symbol("*")) {
        if (*fn != AggregateFn::kCount || agg.distinct) fail("column reference");
      } else {
        agg.arg = parse_column_ref();
      }
      expect_symbol(")");
      return agg;
    }
    return parse_column_ref();
  }

  ColumnRef parse_column_ref() {
    ColumnRef ref;
    std::string first = expect_identifier("column reference");
    if (accept_symbol(".")) {
      if (peek_symbol("*")) fail("column name (qualified '*' is not supported)");
      ref.table = std::move(first);
      ref.column = expect_identifier("column name");
    } else {
      ref.column = std::move(first);
    }
    return ref;
  }

  std::optional<Literal> try_literal() {
    const Token& t = current();
    if (t.kind == TokenKind::kString) {
      Literal lit{Literal::Kind::kString, t.text};
      advance();
      return lit;
    }
    bool negative = false;
    if (t.kind == TokenKind::kSymbol && t.text == "-" && peek_at(1).kind == TokenKind::kNumber) {
      negative = true;
      advance();
    }
    const Token& n = current();
    if (n.kind == TokenKind::kNumber) {
      Literal lit;
      lit.kind = n.text.find_first_of(".eE") == std::string::npos ? Literal::Kind::kInteger : Literal::Kind::kReal;
      lit.text = (negative ? "-" : "") + n.text;
      advance();
      return lit;
    }
    if (negative) fail("number");
    return std::nullopt;
  }

  Operand parse_operand() {
    if (auto lit = try_literal()) return *lit;
    SelectExpr e = parse_value_expr();
    if (auto* c = std::get_if<ColumnRef>(&e)) return *c;
    return std::get<Aggregate>(e);
  }

  Predicate parse_or(std::vector<SubqueryUnit>& units) {
    std::vector<Predicate> parts;
    parts.push_back(parse_and(units));
    while (accept_keyword("OR")) parts.push_back(parse_and(units));
    return Predicate::any_of(std::move(parts));
  }

  Predicate parse_and(std::vector<SubqueryUnit>& units) {
    std::vector<Predicate> parts;
    parts.push_back(parse_not(units));
    while (accept_keyword("AND")) parts.push_back(parse_not(units));
    return Predicate::all_of(std::move(parts));
  }

  Predicate parse_not(std::vector<SubqueryUnit>& units) {
    if (accept_keyword("NOT")) return Predicate::negate(parse_not(units));
    if (peek_symbol("(")) {
      if (peek_keyword_at(1, "SELECT")) fail("predicate (a subquery cannot stand alone)");
      advance();
      Predicate inner = parse_or(units);
      expect_symbol(")");
      return inner;
    }
    if (peek_keyword("EXISTS")) fail("predicate (EXISTS is not supported)");
    return parse_atom(units);
  }

  std::size_t parse_subquery(std::vector<SubqueryUnit>& units) {
    const std::size_t at = current().offset;
    if (!allow_subqueries_) throw ParseError(at, "single clause without subqueries", describe(current()));
    expect_symbol("(");
    const std::size_t index = parse_core(units);
    if (peek_keyword("UNION") || peek_keyword("INTERSECT") || peek_keyword("EXCEPT")) {
      fail("')' (set operators inside a subquery are not supported)");
    }
    expect_symbol(")");
    return index;
  }

  Predicate parse_atom(std::vector<SubqueryUnit>& units) {
    Operand lhs = parse_operand();
    bool negated = false;
    if (accept_keyword("IS")) fail("comparison (IS NULL is not supported)");
    if (accept_keyword("NOT")) {
      negated = true;
      if (!peek_keyword("BETWEEN") && !peek_keyword("LIKE") && !peek_keyword("IN")) fail("BETWEEN, LIKE or IN");
    }
    Predicate result;
    if (accept_keyword("BETWEEN")) {
      Between b;
      b.lhs = std::move(lhs);
      b.low = parse_operand();
      expect_keyword("AND");
      b.high = parse_operand();
      if (std::holds_alternative<Literal>(b.lhs)) fail("column or aggregate before BETWEEN");
      result = Predicate::leaf(std::move(b));
    } else if (accept_keyword("LIKE")) {
      Like l;
      l.lhs = std::move(lhs);
      auto pattern = try_literal();
      if (!pattern || pattern->kind != Literal::Kind::kString) fail("string pattern");
      l.pattern = *pattern;
      if (std::holds_alternative<Literal>(l.lhs)) fail("column or aggregate before LIKE");
      result = Predicate::leaf(std::move(l));
    } else if (accept_keyword("IN")) {
      if (!peek_keyword_at(1, "SELECT")) fail("subquery after IN (value lists are not supported)");
      InSubquery in;
      in.lhs = std::move(lhs);
      in.subquery.unit = parse_subquery(units);
      if (std::holds_alternative<Literal>(in.lhs)) fail("column or aggregate before IN");
      result = Predicate::leaf(std::move(in));
    } else {
      CompareOp op = parse_compare_op();
      if (peek_symbol("(") && peek_keyword_at(1, "SELECT")) {
        CompareSubquery cs;
        cs.op = op;
        cs.lhs = std::move(lhs);
        cs.subquery.unit = parse_subquery(units);
        if (std::holds_alternative<Literal>(cs.lhs)) fail("column or aggregate before comparison");
        result = Predicate::leaf(std::move(cs));
      } else {
        Compare c;
        c.op = op;
        c.lhs = std::move(lhs);
        c.rhs = parse_operand();
        if (std::holds_alternative<Literal>(c.lhs)) {
          if (std::holds_alternative<Literal>(c.rhs)) fail("column or aggregate in comparison");
          std::swap(c.lhs, c.rhs);
          c.op = flip(c.op);
        }
        result = Predicate::leaf(std::move(c));
      }
    }
    return negated ? Predicate::negate(std::move(result)) : result;
  }

  CompareOp parse_compare_op() {
    const Token& t = current();
    if (t.kind == TokenKind::kSymbol) {
      static const std::map<std::string, CompareOp> ops = {
          {"=", CompareOp::kEq}, {"==", CompareOp::kEq}, {"!=", CompareOp::kNe}, {"<>", CompareOp::kNe},
          {"<", CompareOp::kLt}, {"<=", CompareOp::kLe}, {">", CompareOp::kGt},  {">=", CompareOp::kGe}};
      auto it = ops.find(t.text);
      if (it != ops.end()) {
        advance();
        return it->second;
      }
    }
    fail("comparison operator");
  }

  // Token helpers -----------------------------------------------------------

  const Token& current() const { return tokens_[pos_]; }
  const Token& peek_at(std::size_t ahead) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  void advance() {
    if (pos_ + 1 < tokens_.size()) ++pos_;
  }

  bool peek_keyword(std::string_view kw) const { return peek_keyword_at(0, kw); }
  bool peek_keyword_at(std::size_t ahead, std::string_view kw) const {
    const Token& t = peek_at(ahead);
    return t.kind == TokenKind::kWord && upper(t.text) == kw;
  }
  bool accept_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) return false;
    advance();
    return true;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail(std::string(kw));
  }

  bool peek_symbol(std::string_view s) const { return peek_symbol_at(0, s); }
  bool peek_symbol_at(std::size_t ahead, std::string_view s) const {
    const Token& t = peek_at(ahead);
    return t.kind == TokenKind::kSymbol && t.text == s;
  }
  bool accept_symbol(std::string_view s) {
    if (!peek_symbol(s)) return false;
    advance();
    return true;
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) fail("'" + std::string(s) + "'");
  }

  std::string expect_identifier(const std::string& what) {
    const Token& t = current();
    if (t.kind == TokenKind::kQuotedIdentifier || (t.kind == TokenKind::kWord && !is_reserved(t.text))) {
      std::string name = t.text;
      advance();
      return name;
    }
    fail(what);
  }

  void expect_end() {
    if (current().kind != TokenKind::kEnd) fail("end of statement");
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(current().offset, expected, describe(current()));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  bool allow_subqueries_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && text[i + 1] == '-') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      const auto close = text.find("*/", i + 2);
      if (close == std::string_view::npos) throw ParseError(i, "end of comment", "end of input");
      i = close + 2;
      continue;
    }
    Token t;
    t.offset = i;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_char(text[j])) ++j;
      t.kind = TokenKind::kWord;
      t.text = std::string(text.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < n && text[j] == '.') {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < n && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      if (j < n && is_ident_start(text[j])) throw ParseError(j, "separator after number", std::string(1, text[j]));
      t.kind = TokenKind::kNumber;
      t.text = std::string(text.substr(i, j - i));
      i = j;
    } else if (c == '\'' || c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        if (text[j] == close) {
          if (close != ']' && j + 1 < n && text[j + 1] == close) {
            value.push_back(close);
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        value.push_back(text[j]);
        ++j;
      }
      if (!closed) throw ParseError(i, std::string("closing ") + close, "end of input");
      t.kind = (c == '\'' || c == '"') ? TokenKind::kString : TokenKind::kQuotedIdentifier;
      t.text = std::move(value);
      i = j;
    } else {
      static const std::array<std::string_view, 6> two = {"!=", "<>", "<=", ">=", "==", "||"};
      std::string_view rest = text.substr(i);
      bool matched = false;
      for (auto op : two) {
        if (rest.substr(0, 2) == op) {
          t.text = std::string(op);
          i += 2;
          matched = true;
          break;
        }
      }
      if (!matched) {
        static constexpr std::string_view singles = ",.()*=;<>-+/%";
        if (singles.find(c) == std::string_view::npos) {
          throw ParseError(i, "SQL token", std::string(1, c));
        }
        t.text = std::string(1, c);
        ++i;
      }
      t.kind = TokenKind::kSymbol;
    }
    tokens.push_back(std::move(t));
  }
  Token end;
  end.kind = TokenKind::kEnd;
  end.offset = n;
  tokens.push_back(end);
  return tokens;
}

std::string leading_keyword(std::string_view text) {
  std::vector<Token> tokens;
  try {
    tokens = tokenize(text);
  } catch (const ParseError&) {
    return {};
  }
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::kSymbol && t.text == "(") continue;
    if (t.kind == TokenKind::kWord) return upper(t.text);
    return {};
  }
  return {};
}

void resolve_unit(SubqueryUnit& unit, const Schema& schema) {
  std::vector<const TableDef*> scope;
  for (auto& name : unit.from.tables) {
    const TableDef* t = schema.find_table(name);
    if (t == nullptr) throw ResolveError(name, "unknown table");
    name = t->name;
    scope.push_back(t);
  }
  for_each_column(unit, [&](ColumnRef& c, ClauseKind) {
    if (!c.table.empty()) {
      const TableDef* owner = nullptr;
      for (const auto* t : scope) {
        if (same_identifier(t->name, c.table)) owner = t;
      }
      if (owner == nullptr) throw ResolveError(c.table + "." + c.column, "table not in scope");
      const ColumnDef* col = owner->find_column(c.column);
      if (col == nullptr) throw ResolveError(c.table + "." + c.column, "unknown column");
      c.table = owner->name;
      c.column = col->name;
      return;
    }
    const TableDef* owner = nullptr;
    const ColumnDef* found = nullptr;
    for (const auto* t : scope) {
      if (const ColumnDef* col = t->find_column(c.column)) {
        if (owner != nullptr) throw ResolveError(c.column, "ambiguous column");
        owner = t;
        found = col;
      }
    }
    if (found == nullptr) throw ResolveError(c.column, "unknown column");
    c.table = owner->name;
    c.column = found->name;
  });
  // Keep equi-join conditions oriented earlier-table first.
  for (auto& j : unit.from.joins) {
    auto index_of = [&](const std::string& table) {
      for (std::size_t i = 0; i < unit.from.tables.size(); ++i) {
        if (same_identifier(unit.from.tables[i], table)) return i;
      }
      return unit.from.tables.size();
    };
    if (index_of(j.left.table) > index_of(j.right.table)) std::swap(j.left, j.right);
  }
}

void resolve_fragment(ClauseFragment& fragment, const std::vector<std::string>& scope_tables, const Schema& schema) {
  if (fragment.kind == ClauseKind::kSetOp) return;
  SubqueryUnit unit;
  if (fragment.kind != ClauseKind::kFrom && fragment.kind != ClauseKind::kJoin) unit.from.tables = scope_tables;
  install_clause(unit, fragment);
  resolve_unit(unit, schema);
  ClauseFragment resolved = extract_clause(unit, fragment.kind);
  if (resolved.kind == ClauseKind::kFrom || resolved.kind == ClauseKind::kJoin) {
    resolved.kind = unit.from.tables.size() > 1 ? ClauseKind::kJoin : ClauseKind::kFrom;
  }
  fragment = std::move(resolved);
}

QueryAst parse_sql(std::string_view text, const Schema* schema) {
  bool blank = true;
  for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw ParseError(0, "SELECT statement", "empty input");
  Parser parser(text, true);
  QueryAst ast = parser.parse_statement();
  if (schema != nullptr) {
    for (auto& unit : ast.units) resolve_unit(unit, *schema);
  }
  return ast;
}

ClauseFragment parse_clause_fragment(std::string_view text) {
  Parser parser(text, false);
  return parser.parse_fragment();
}

}  // namespace groundsql::sql
