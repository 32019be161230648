#include "groundsql/explain/explainer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "groundsql/sql/analysis.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/util/utf8.hpp"

namespace groundsql::explain {

namespace {

using sql::ClauseKind;

constexpr std::array<const char*, 10> kOrdinals = {"first", "second", "third", "fourth", "fifth",
                                                  "sixth", "seventh", "eighth", "ninth",  "tenth"};

class TextBuilder {
 public:
  void add(std::string_view s) {
    text_ += s;
    cp_ += util::codepoint_count(s);
  }
  void entity(std::string_view s, SpanTarget target) {
    const std::size_t start = cp_;
    add(s);
    spans_.push_back({start, cp_, std::move(target)});
  }
  RenderedText finish() && { return {std::move(text_), std::move(spans_)}; }

 private:
  std::string text_;
  std::size_t cp_ = 0;
  std::vector<EntitySpan> spans_;
};

class Renderer {
 public:
  explicit Renderer(const RenderContext& ctx) : ctx_(ctx), unit_(ctx.ast.units.at(ctx.unit_index)) {}

  RenderedText render(ClauseKind kind) {
    switch (kind) {
      case ClauseKind::kFrom:
      case ClauseKind::kJoin: from(); break;
      case ClauseKind::kWhere:
        out_.add("Keep the records where ");
        predicate(*unit_.where);
        out_.add(".");
        break;
      case ClauseKind::kGroupBy: group_by(); break;
      case ClauseKind::kHaving:
        out_.add("Keep the groups where ");
        predicate(*unit_.having);
        out_.add(".");
        break;
      case ClauseKind::kOrderLimit: order_limit(); break;
      case ClauseKind::kSelect: select(); break;
      case ClauseKind::kSetOp: set_op(); break;
    }
    return std::move(out_).finish();
  }

 private:
  void table(const std::string& name) { out_.entity(phrase_of(name), TableTarget{name}); }

  void column(const sql::ColumnRef& c) {
    std::string text = phrase_of(c.column);
    if (ambiguous(c.column)) text += " of table " + phrase_of(c.table);
    out_.entity(text, ColumnTarget{c.table, c.column});
  }

  bool ambiguous(const std::string& column) const {
    int owners = 0;
    for (const auto& t : unit_.from.tables) {
      const sql::TableDef* def = ctx_.schema.find_table(t);
      if (def != nullptr && def->find_column(column) != nullptr) ++owners;
    }
    return owners > 1;
  }

  void value(const sql::Literal& lit, const std::optional<sql::ColumnRef>& hint) {
    std::string text;
    if (lit.kind != sql::Literal::Kind::kString || bare_value_ok(lit.text)) {
      text = lit.text;
    } else {
      text = "\"";
      for (char c : lit.text) {
        if (c == '"') text.push_back('"');
        text.push_back(c);
      }
      text.push_back('"');
    }
    out_.entity(text, ValueTarget{lit, hint});
  }

  void aggregate(const sql::Aggregate& a, bool implicit_the = false) {
    const char* lead = "";
    switch (a.fn) {
      case sql::AggregateFn::kCount:
        if (!a.arg) {
          out_.add(implicit_the ? "number of records" : "the number of records");
          return;
        }
        lead = "count of ";
        break;
      case sql::AggregateFn::kMin: lead = "smallest "; break;
      case sql::AggregateFn::kMax: lead = "largest "; break;
      case sql::AggregateFn::kSum: lead = "total "; break;
      case sql::AggregateFn::kAvg: lead = "average "; break;
    }
    if (!implicit_the) out_.add("the ");
    out_.add(lead);
    if (a.distinct) out_.add("distinct ");
    column(*a.arg);
  }

  // Operands on the right of a comparator, or the bounds of BETWEEN.
  void operand(const sql::Operand& op, const std::optional<sql::ColumnRef>& hint) {
    if (auto* lit = std::get_if<sql::Literal>(&op)) {
      value(*lit, hint);
    } else if (auto* c = std::get_if<sql::ColumnRef>(&op)) {
      out_.add("the ");
      column(*c);
    } else {
      aggregate(std::get<sql::Aggregate>(op));
    }
  }

  void subject(const sql::Operand& op, bool with_article) {
    if (auto* c = std::get_if<sql::ColumnRef>(&op)) {
      if (with_article) out_.add("the ");
      column(*c);
    } else if (auto* a = std::get_if<sql::Aggregate>(&op)) {
      aggregate(*a);
    } else {
      throw UnsupportedConstruct("literal on the left of a condition");
    }
  }

  static std::optional<sql::ColumnRef> hint_of(const sql::Operand& op) {
    if (auto* c = std::get_if<sql::ColumnRef>(&op)) return *c;
    return std::nullopt;
  }

  static const char* comparator(sql::CompareOp op) {
    switch (op) {
      case sql::CompareOp::kEq: return "is ";
      case sql::CompareOp::kNe: return "is not ";
      case sql::CompareOp::kLt: return "is less than ";
      case sql::CompareOp::kLe: return "is at most ";
      case sql::CompareOp::kGt: return "is greater than ";
      case sql::CompareOp::kGe: return "is at least ";
    }
    return "is ";
  }

  void subquery(const sql::SubqueryRef& ref) {
    out_.entity("the result of " + query_reference(ref.unit), SubqueryResultTarget{ref.unit});
  }

  void atom(const sql::Atom& a, bool negated) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, sql::Compare>) {
            subject(x.lhs, false);
            out_.add(" ");
            out_.add(comparator(x.op));
            operand(x.rhs, hint_of(x.lhs));
          } else if constexpr (std::is_same_v<T, sql::Between>) {
            subject(x.lhs, false);
            out_.add(negated ? " is not between " : " is between ");
            operand(x.low, hint_of(x.lhs));
            out_.add(" and ");
            operand(x.high, hint_of(x.lhs));
          } else if constexpr (std::is_same_v<T, sql::Like>) {
            subject(x.lhs, false);
            out_.add(negated ? " does not match " : " matches ");
            value(x.pattern, hint_of(x.lhs));
          } else if constexpr (std::is_same_v<T, sql::InSubquery>) {
            subject(x.lhs, true);
            out_.add(negated ? " is not in " : " is in ");
            subquery(x.subquery);
          } else {
            subject(x.lhs, true);
            out_.add(" ");
            out_.add(comparator(x.op));
            subquery(x.subquery);
          }
        },
        a);
  }

  static bool inline_negation(const sql::Predicate& p) {
    return p.kind == sql::Predicate::Kind::kAtom &&
           (std::holds_alternative<sql::Between>(p.atom) || std::holds_alternative<sql::Like>(p.atom) ||
            std::holds_alternative<sql::InSubquery>(p.atom));
  }

  void predicate(const sql::Predicate& p) {
    using K = sql::Predicate::Kind;
    switch (p.kind) {
      case K::kAtom: atom(p.atom, false); return;
      case K::kNot:
        if (inline_negation(p.children.front())) {
          atom(p.children.front().atom, true);
        } else {
          out_.add("not (");
          predicate(p.children.front());
          out_.add(")");
        }
        return;
      case K::kAnd:
      case K::kOr:
        for (std::size_t i = 0; i < p.children.size(); ++i) {
          if (i > 0) out_.add(p.kind == K::kAnd ? " and " : " or ");
          const bool paren = p.kind == K::kAnd && p.children[i].kind == K::kOr;
          if (paren) out_.add("(");
          predicate(p.children[i]);
          if (paren) out_.add(")");
        }
        return;
    }
  }

  void from() {
    const auto& tables = unit_.from.tables;
    if (tables.size() == 1) {
      out_.add("In table ");
      table(tables.front());
      out_.add(".");
      return;
    }
    out_.add("Merge data in table ");
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i > 0) out_.add(" and table ");
      table(tables[i]);
    }
    const auto inferred = infer_join_conditions(tables, ctx_.schema);
    if (!(inferred && same_join_conditions(*inferred, unit_.from.joins))) {
      if (unit_.from.joins.empty()) {
        out_.add(", pairing every record");
      }
      for (const auto& j : unit_.from.joins) {
        out_.add(", joining ");
        column(j.left);
        out_.add(" with ");
        column(j.right);
      }
    }
    out_.add(".");
  }

  void group_by() {
    out_.add("Split the data into groups based on ");
    for (std::size_t i = 0; i < unit_.group_by.size(); ++i) {
      if (i > 0) out_.add(", ");
      out_.add("the ");
      column(unit_.group_by[i]);
    }
    out_.add(".");
  }

  void limit_phrase(std::int64_t n) {
    if (n == 1) {
      out_.add("the first record");
    } else {
      out_.add("the first " + std::to_string(n) + " records");
    }
  }

  void order_limit() {
    if (unit_.order_by.empty()) {
      out_.add("Keep only ");
      limit_phrase(*unit_.limit);
      out_.add(".");
      return;
    }
    out_.add(unit_.group_by.empty() ? "Sort the records based on " : "Sort the groups based on ");
    for (std::size_t i = 0; i < unit_.order_by.size(); ++i) {
      const auto& item = unit_.order_by[i];
      if (i > 0) out_.add(", then ");
      if (auto* c = std::get_if<sql::ColumnRef>(&item.expr)) {
        out_.add("the ");
        column(*c);
      } else {
        aggregate(std::get<sql::Aggregate>(item.expr));
      }
      out_.add(item.direction == sql::SortDirection::kDesc ? " in descending order" : " in ascending order");
    }
    if (unit_.limit) {
      out_.add(", and return ");
      limit_phrase(*unit_.limit);
    }
    out_.add(".");
  }

  static std::string alias_text(const std::string& alias) {
    const bool simple = !alias.empty() && std::all_of(alias.begin(), alias.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }) && std::isalpha(static_cast<unsigned char>(alias[0]));
    if (simple) return alias;
    std::string out = "\"";
    for (char c : alias) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    return out + "\"";
  }

  void select() {
    const auto& s = unit_.select;
    out_.add("Return ");
    if (s.items.empty()) {
      out_.add(s.distinct ? "all distinct columns." : "all columns.");
      return;
    }
    for (std::size_t i = 0; i < s.items.size(); ++i) {
      if (i > 0) out_.add(", ");
      const bool first_distinct = i == 0 && s.distinct;
      const auto& item = s.items[i];
      if (std::holds_alternative<sql::Star>(item.expr)) {
        out_.add(first_distinct ? "all distinct columns" : "all columns");
      } else {
        if (first_distinct) out_.add("the distinct ");
        if (auto* c = std::get_if<sql::ColumnRef>(&item.expr)) {
          if (!first_distinct) out_.add("the ");
          column(*c);
        } else {
          aggregate(std::get<sql::Aggregate>(item.expr), first_distinct);
        }
      }
      if (!item.alias.empty()) out_.add(" as " + alias_text(item.alias));
    }
    out_.add(".");
  }

  void set_op() {
    const auto pos = ctx_.ast.top_level_position(ctx_.unit_index);
    if (!pos || *pos == 0 || *pos - 1 >= ctx_.ast.set_ops.size()) {
      throw UnsupportedConstruct("set operator step on a unit that does not follow a set operator");
    }
    out_.add("Combine with the previous query, ");
    switch (ctx_.ast.set_ops[*pos - 1]) {
      case sql::SetOperator::kIntersect: out_.add("keeping rows in both."); break;
      case sql::SetOperator::kUnionAll: out_.add("keeping all rows."); break;
      case sql::SetOperator::kExcept: out_.add("removing rows that appear in it."); break;
      case sql::SetOperator::kUnion: out_.add("keeping rows from either without duplicates."); break;
    }
  }

  const RenderContext& ctx_;
  const sql::SubqueryUnit& unit_;
  TextBuilder out_;
};

bool is_word_ascii(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-'; }

}  // namespace

std::string phrase_of(const std::string& identifier) { return sql::normalize_identifier(identifier); }

bool bare_value_ok(const std::string& value) {
  if (value.empty() || !std::isalpha(static_cast<unsigned char>(value.front()))) return false;
  if (value.back() == ' ') return false;
  std::vector<std::string> words;
  std::string word;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const char c = value[i];
    if (c == ' ') {
      if (word.empty()) return false;  // double space
      words.push_back(word);
      word.clear();
      continue;
    }
    if (!is_word_ascii(c)) return false;
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  words.push_back(word);
  static const std::array<const char*, 9> kBadLead = {"the", "not", "less", "greater", "at",
                                                     "between", "in", "all", "distinct"};
  for (const char* bad : kBadLead) {
    if (words.front() == bad) return false;
  }
  for (const auto& w : words) {
    if (w == "and" || w == "or") return false;
    // A word that starts with a digit and ends in a letter reads back fine, but
    // a purely numeric word would be tokenized as a number and lose spacing.
    if (std::isdigit(static_cast<unsigned char>(w.front())) &&
        !std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return false;
    }
  }
  return true;
}

std::string ordinal_word(std::size_t n) { return n >= 1 && n <= kOrdinals.size() ? kOrdinals[n - 1] : ""; }

std::string block_header(std::size_t unit_index) {
  const std::string word = ordinal_word(unit_index + 1);
  return word.empty() ? "Start query " + std::to_string(unit_index + 1) : "Start the " + word + " query";
}

std::string query_reference(std::size_t unit_index) {
  const std::string word = ordinal_word(unit_index + 1);
  return word.empty() ? "query " + std::to_string(unit_index + 1) : "the " + word + " query";
}

std::optional<std::vector<sql::JoinCondition>> infer_join_conditions(const std::vector<std::string>& tables,
                                                                    const sql::Schema& schema) {
  std::vector<const sql::TableDef*> defs;
  for (const auto& t : tables) {
    const sql::TableDef* def = schema.find_table(t);
    if (def == nullptr) return std::nullopt;
    defs.push_back(def);
  }
  std::vector<sql::JoinCondition> out;
  for (std::size_t i = 1; i < defs.size(); ++i) {
    std::vector<sql::JoinCondition> found;
    for (std::size_t j = 0; j < i; ++j) {
      // Foreign keys in either direction between the new table and an earlier one.
      for (const auto& fk : defs[i]->foreign_keys) {
        if (sql::same_identifier(fk.to_table, defs[j]->name)) {
          found.push_back({{defs[j]->name, defs[j]->find_column(fk.to_column)->name},
                           {defs[i]->name, defs[i]->find_column(fk.from_column)->name}});
        }
      }
      for (const auto& fk : defs[j]->foreign_keys) {
        if (sql::same_identifier(fk.to_table, defs[i]->name)) {
          found.push_back({{defs[j]->name, defs[j]->find_column(fk.from_column)->name},
                           {defs[i]->name, defs[i]->find_column(fk.to_column)->name}});
        }
      }
    }
    if (found.empty()) {
      for (std::size_t j = 0; j < i; ++j) {
        for (const auto& c : defs[i]->columns) {
          const sql::ColumnDef* other = defs[j]->find_column(c.name);
          if (other != nullptr && (other->is_primary_key || c.is_primary_key)) {
            found.push_back({{defs[j]->name, other->name}, {defs[i]->name, c.name}});
          }
        }
      }
    }
    if (found.size() != 1) return std::nullopt;
    out.push_back(found.front());
  }
  return out;
}

bool same_join_conditions(const std::vector<sql::JoinCondition>& a, const std::vector<sql::JoinCondition>& b) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a) {
    bool matched = false;
    for (std::size_t i = 0; i < b.size() && !matched; ++i) {
      if (used[i]) continue;
      const auto& y = b[i];
      if ((sql::structurally_equal(x.left, y.left) && sql::structurally_equal(x.right, y.right)) ||
          (sql::structurally_equal(x.left, y.right) && sql::structurally_equal(x.right, y.left))) {
        used[i] = matched = true;
      }
    }
    if (!matched) return false;
  }
  return true;
}

RenderedText render_clause(const sql::ClauseRef& clause, const RenderContext& context) {
  if (clause.unit != context.unit_index) throw UnsupportedConstruct("clause does not belong to the context unit");
  const auto& unit = context.ast.units.at(clause.unit);
  if (clause.kind != ClauseKind::kSetOp && !sql::has_clause(unit, clause.kind)) {
    throw UnsupportedConstruct("unit has no " + std::string(sql::to_string(clause.kind)) + " clause");
  }
  return Renderer(context).render(clause.kind);
}

ExplanationPlan explain(const sql::QueryAst& ast, const sql::Schema& schema) {
  ExplanationPlan plan;
  plan.source_ast = ast;
  for (auto& unit : plan.source_ast.units) sql::resolve_unit(unit, schema);
  const auto& resolved = plan.source_ast;
  const bool multi = resolved.units.size() > 1;
  const auto units = sql::decompose(resolved);
  for (std::size_t u = 0; u < resolved.units.size(); ++u) {
    ExplanationBlock block;
    block.unit_index = u;
    block.header = block_header(u);
    RenderContext ctx{schema, resolved, u, multi};
    for (const auto& clause : units[u].clauses) {
      const ClauseKind k = clause.kind;
      RenderedText r = render_clause(clause, ctx);
      ExplanationStep step;
      step.unit_index = u;
      step.step_index = block.steps.size() + 1;
      step.clause_kind = k;
      step.text = std::move(r.text);
      step.spans = std::move(r.spans);
      block.steps.push_back(std::move(step));
    }
    plan.blocks.push_back(std::move(block));
  }
  return plan;
}

std::string explanation_digest(const ExplanationPlan& plan) {
  const std::string canonical = to_json(plan).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace groundsql::explain
