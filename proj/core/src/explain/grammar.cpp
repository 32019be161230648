#include "groundsql/explain/grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <initializer_list>
#include <limits>

#include "groundsql/explain/explainer.hpp"
#include "groundsql/util/utf8.hpp"

namespace groundsql::explain {

namespace {

using sql::ClauseKind;
constexpr std::size_t kFail = std::numeric_limits<std::size_t>::max();

bool word_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '\'' || c >= 0x80; }
bool word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\'' || c == '-' || c >= 0x80; }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <typename T>
struct Alt {
  T value;
  std::size_t next = 0;
  double cost = 0.0;
  std::vector<EntitySpan> spans;
};

template <typename T>
using Alts = std::vector<Alt<T>>;

std::vector<EntitySpan> concat(std::vector<EntitySpan> a, const std::vector<EntitySpan>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

class StepParser {
 public:
  StepParser(std::vector<StepToken> tokens, const GrammarContext& ctx) : toks_(std::move(tokens)), ctx_(ctx) {
    set_scope(ctx.scope_tables);
    if (ctx_.schema != nullptr) {
      for (const auto& t : ctx_.schema->tables) {
        max_run_ = std::max(max_run_, words_in(t.name));
        for (const auto& c : t.columns) max_run_ = std::max(max_run_, words_in(c.name));
      }
    }
    max_run_ += 1;  // room for a split word in a misspelled name
  }

  std::vector<std::pair<ParsedStep, std::size_t>> parse(std::optional<ClauseKind> only) {
    std::vector<std::pair<ParsedStep, std::size_t>> out;
    auto want = [&](std::initializer_list<ClauseKind> kinds) {
      if (!only) return true;
      return std::find(kinds.begin(), kinds.end(), *only) != kinds.end();
    };
    auto take = [&](Alts<sql::ClauseFragment> alts) {
      for (auto& a : alts) {
        if (a.next != toks_.size()) continue;
        ParsedStep step{std::move(a.value), std::move(a.spans), a.cost};
        out.emplace_back(std::move(step), out.size());
      }
    };
    if (want({ClauseKind::kFrom, ClauseKind::kJoin})) take(from_join());
    if (want({ClauseKind::kWhere})) take(filter("records", ClauseKind::kWhere));
    if (want({ClauseKind::kHaving})) take(filter("groups", ClauseKind::kHaving));
    if (want({ClauseKind::kGroupBy})) take(group_by());
    if (want({ClauseKind::kOrderLimit})) take(order_limit());
    if (want({ClauseKind::kSelect})) take(select());
    if (want({ClauseKind::kSetOp})) take(set_op());
    return out;
  }

 private:
  static std::size_t words_in(const std::string& name) {
    const std::string n = sql::normalize_identifier(name);
    return n.empty() ? 0 : static_cast<std::size_t>(std::count(n.begin(), n.end(), ' ')) + 1;
  }

  void set_scope(const std::vector<std::string>& tables) {
    scope_.clear();
    if (ctx_.schema == nullptr) return;
    for (const auto& t : tables) {
      if (const sql::TableDef* def = ctx_.schema->find_table(t)) scope_.push_back(def);
    }
  }

  // Keyword sequence match; returns the position after it or kFail.
  std::size_t kw(std::size_t pos, std::initializer_list<const char*> words) const {
    for (const char* w : words) {
      if (pos >= toks_.size() || toks_[pos].kind == StepTokenKind::kQuoted || toks_[pos].lower != w) return kFail;
      ++pos;
    }
    return pos;
  }

  bool phrase_token(std::size_t i) const {
    return i < toks_.size() && (toks_[i].kind == StepTokenKind::kWord || toks_[i].kind == StepTokenKind::kNumber);
  }

  std::string run_phrase(std::size_t pos, std::size_t len) const {
    std::string s;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (i > pos) s += ' ';
      s += toks_[i].lower;
    }
    return s;
  }

  // Entity slots --------------------------------------------------------------

  Alts<std::string> table(std::size_t pos, const std::vector<const sql::TableDef*>* restrict = nullptr) const {
    Alts<std::string> out;
    if (ctx_.schema == nullptr) return out;
    for (std::size_t len = 1; len <= max_run_ && phrase_token(pos + len - 1); ++len) {
      const std::string phrase = run_phrase(pos, len);
      const sql::TableDef* best = nullptr;
      double best_sim = -1;
      for (const auto& t : ctx_.schema->tables) {
        if (restrict != nullptr && std::find(restrict->begin(), restrict->end(), &t) == restrict->end()) continue;
        const double sim = link::similarity(phrase, t.name);
        if (sim > best_sim || (sim == best_sim && best != nullptr && t.name.size() < best->name.size())) {
          best = &t;
          best_sim = sim;
        }
      }
      if (best == nullptr || best_sim < ctx_.min_similarity) continue;
      Alt<std::string> a;
      a.value = best->name;
      a.next = pos + len;
      a.cost = 1.0 - best_sim;
      a.spans.push_back({toks_[pos].start, toks_[pos + len - 1].end, TableTarget{best->name}});
      out.push_back(std::move(a));
    }
    return out;
  }

  Alts<sql::ColumnRef> column(std::size_t pos) const {
    Alts<sql::ColumnRef> out;
    for (std::size_t len = 1; len <= max_run_ && phrase_token(pos + len - 1); ++len) {
      const std::string phrase = run_phrase(pos, len);
      // Best-matching column name in scope (ties: shorter name, then declaration order).
      const sql::ColumnDef* best = nullptr;
      double best_sim = -1;
      for (const auto* t : scope_) {
        for (const auto& c : t->columns) {
          const double sim = link::similarity(phrase, c.name);
          if (sim > best_sim || (sim == best_sim && best != nullptr && c.name.size() < best->name.size())) {
            best = &c;
            best_sim = sim;
          }
        }
      }
      if (best == nullptr || best_sim < ctx_.min_similarity) continue;
      std::vector<const sql::TableDef*> owners;
      for (const auto* t : scope_) {
        if (t->find_column(best->name) != nullptr) owners.push_back(t);
      }
      const std::size_t after = pos + len;
      if (std::size_t q = kw(after, {"of", "table"}); q != kFail) {
        for (auto& t : table(q, &owners)) {
          const sql::TableDef* def = ctx_.schema->find_table(t.value);
          Alt<sql::ColumnRef> a;
          a.value = {def->name, def->find_column(best->name)->name};
          a.next = t.next;
          a.cost = (1.0 - best_sim) + t.cost;
          a.spans.push_back({toks_[pos].start, toks_[t.next - 1].end, ColumnTarget{a.value.table, a.value.column}});
          out.push_back(std::move(a));
        }
      }
      if (owners.size() == 1) {
        Alt<sql::ColumnRef> a;
        a.value = {owners.front()->name, owners.front()->find_column(best->name)->name};
        a.next = after;
        a.cost = 1.0 - best_sim;
        a.spans.push_back({toks_[pos].start, toks_[after - 1].end, ColumnTarget{a.value.table, a.value.column}});
        out.push_back(std::move(a));
      }
    }
    return out;
  }

  Alts<sql::Literal> value(std::size_t pos, const std::optional<sql::ColumnRef>& hint) const {
    Alts<sql::Literal> out;
    if (pos >= toks_.size()) return out;
    const StepToken& t = toks_[pos];
    auto single = [&](sql::Literal lit) {
      Alt<sql::Literal> a;
      a.value = lit;
      a.next = pos + 1;
      a.spans.push_back({t.start, t.end, ValueTarget{std::move(lit), hint}});
      out.push_back(std::move(a));
    };
    if (t.kind == StepTokenKind::kQuoted) {
      single({sql::Literal::Kind::kString, t.text});
      return out;
    }
    if (t.kind == StepTokenKind::kNumber) {
      const bool real = t.text.find_first_of(".eE") != std::string::npos;
      single({real ? sql::Literal::Kind::kReal : sql::Literal::Kind::kInteger, t.text});
      return out;
    }
    if (t.kind != StepTokenKind::kWord || !std::isalpha(static_cast<unsigned char>(t.text.front()))) return out;
    static const std::array<const char*, 9> kBadLead = {"the", "not", "less", "greater", "at",
                                                       "between", "in", "all", "distinct"};
    for (const char* bad : kBadLead) {
      if (t.lower == bad) return out;
    }
    std::string text;
    for (std::size_t i = pos; phrase_token(i); ++i) {
      if (toks_[i].lower == "and" || toks_[i].lower == "or") break;
      if (i > pos) text += ' ';
      text += toks_[i].text;
      Alt<sql::Literal> a;
      a.value = {sql::Literal::Kind::kString, text};
      a.next = i + 1;
      a.spans.push_back({t.start, toks_[i].end, ValueTarget{a.value, hint}});
      out.push_back(std::move(a));
    }
    return out;
  }

  Alts<sql::SubqueryRef> subquery(std::size_t pos) const {
    Alts<sql::SubqueryRef> out;
    std::size_t p = kw(pos, {"the", "result", "of"});
    if (p == kFail) return out;
    std::size_t ordinal = 0;
    std::size_t next = kFail;
    if (std::size_t q = kw(p, {"query"}); q != kFail && q < toks_.size() && toks_[q].kind == StepTokenKind::kNumber) {
      try {
        ordinal = std::stoul(toks_[q].text);
      } catch (const std::exception&) {
        return out;
      }
      next = q + 1;
    } else if (std::size_t q2 = kw(p, {"the"}); q2 != kFail && q2 < toks_.size()) {
      for (std::size_t n = 1; n <= 10; ++n) {
        if (toks_[q2].lower == ordinal_word(n) && kw(q2 + 1, {"query"}) != kFail) {
          ordinal = n;
          next = q2 + 2;
        }
      }
    }
    if (next == kFail || ordinal == 0 || ordinal - 1 >= ctx_.unit_index) return out;
    Alt<sql::SubqueryRef> a;
    a.value.unit = ordinal - 1;
    a.next = next;
    a.spans.push_back({toks_[pos].start, toks_[next - 1].end, SubqueryResultTarget{ordinal - 1}});
    out.push_back(std::move(a));
    return out;
  }

  Alts<sql::Aggregate> aggregate(std::size_t pos, bool implicit_the = false) const {
    Alts<sql::Aggregate> out;
    std::size_t p = implicit_the ? pos : kw(pos, {"the"});
    if (p == kFail) return out;
    if (std::size_t q = kw(p, {"number", "of", "records"}); q != kFail) {
      out.push_back({sql::Aggregate{sql::AggregateFn::kCount, std::nullopt, false}, q, 0.0, {}});
    }
    struct Lead {
      std::initializer_list<const char*> words;
      sql::AggregateFn fn;
    };
    const std::array<Lead, 5> leads = {{{{"count", "of"}, sql::AggregateFn::kCount},
                                        {{"smallest"}, sql::AggregateFn::kMin},
                                        {{"largest"}, sql::AggregateFn::kMax},
                                        {{"total"}, sql::AggregateFn::kSum},
                                        {{"average"}, sql::AggregateFn::kAvg}}};
    for (const auto& lead : leads) {
      std::size_t q = kw(p, lead.words);
      if (q == kFail) continue;
      bool distinct = false;
      if (std::size_t d = kw(q, {"distinct"}); d != kFail) {
        for (auto& c : column(d)) {
          out.push_back({sql::Aggregate{lead.fn, c.value, true}, c.next, c.cost, c.spans});
        }
      }
      for (auto& c : column(q)) {
        out.push_back({sql::Aggregate{lead.fn, c.value, distinct}, c.next, c.cost, c.spans});
      }
    }
    return out;
  }

  // Operands ------------------------------------------------------------------

  Alts<sql::Operand> subject(std::size_t pos) const {
    Alts<sql::Operand> out;
    auto add_columns = [&](std::size_t p) {
      for (auto& c : column(p)) out.push_back({c.value, c.next, c.cost, c.spans});
    };
    add_columns(pos);
    if (std::size_t p = kw(pos, {"the"}); p != kFail) add_columns(p);
    for (auto& a : aggregate(pos)) out.push_back({a.value, a.next, a.cost, a.spans});
    return out;
  }

  Alts<sql::Operand> operand(std::size_t pos, const std::optional<sql::ColumnRef>& hint) const {
    Alts<sql::Operand> out;
    for (auto& v : value(pos, hint)) out.push_back({v.value, v.next, v.cost, v.spans});
    if (std::size_t p = kw(pos, {"the"}); p != kFail) {
      for (auto& c : column(p)) out.push_back({c.value, c.next, c.cost, c.spans});
    }
    for (auto& a : aggregate(pos)) out.push_back({a.value, a.next, a.cost, a.spans});
    return out;
  }

  // Predicates ----------------------------------------------------------------

  Alts<sql::Predicate> atom(std::size_t pos) const {
    Alts<sql::Predicate> out;
    for (auto& s : subject(pos)) {
      std::optional<sql::ColumnRef> hint;
      if (auto* c = std::get_if<sql::ColumnRef>(&s.value)) hint = *c;
      const std::size_t p = s.next;
      auto emit = [&](sql::Atom atom, bool negated, std::size_t next, double cost, std::vector<EntitySpan> spans) {
        sql::Predicate pred = sql::Predicate::leaf(std::move(atom));
        if (negated) pred = sql::Predicate::negate(std::move(pred));
        out.push_back({std::move(pred), next, s.cost + cost, concat(s.spans, spans)});
      };

      for (bool negated : {false, true}) {
        std::size_t q = negated ? kw(p, {"is", "not", "between"}) : kw(p, {"is", "between"});
        if (q != kFail) {
          for (auto& lo : operand(q, hint)) {
            std::size_t r = kw(lo.next, {"and"});
            if (r == kFail) continue;
            for (auto& hi : operand(r, hint)) {
              emit(sql::Between{s.value, lo.value, hi.value}, negated, hi.next, lo.cost + hi.cost,
                   concat(lo.spans, hi.spans));
            }
          }
        }
        q = negated ? kw(p, {"does", "not", "match"}) : kw(p, {"matches"});
        if (q != kFail) {
          for (auto& v : value(q, hint)) {
            if (v.value.kind != sql::Literal::Kind::kString) continue;
            emit(sql::Like{s.value, v.value}, negated, v.next, v.cost, v.spans);
          }
        }
        q = negated ? kw(p, {"is", "not", "in"}) : kw(p, {"is", "in"});
        if (q != kFail) {
          for (auto& r : subquery(q)) emit(sql::InSubquery{s.value, r.value}, negated, r.next, 0.0, r.spans);
        }
      }

      struct OpPhrase {
        std::initializer_list<const char*> words;
        sql::CompareOp op;
      };
      const std::array<OpPhrase, 6> ops = {{{{"is"}, sql::CompareOp::kEq},
                                            {{"is", "not"}, sql::CompareOp::kNe},
                                            {{"is", "less", "than"}, sql::CompareOp::kLt},
                                            {{"is", "at", "most"}, sql::CompareOp::kLe},
                                            {{"is", "greater", "than"}, sql::CompareOp::kGt},
                                            {{"is", "at", "least"}, sql::CompareOp::kGe}}};
      for (const auto& op : ops) {
        std::size_t q = kw(p, op.words);
        if (q == kFail) continue;
        for (auto& r : subquery(q)) emit(sql::CompareSubquery{op.op, s.value, r.value}, false, r.next, 0.0, r.spans);
        for (auto& rhs : operand(q, hint)) {
          emit(sql::Compare{op.op, s.value, rhs.value}, false, rhs.next, rhs.cost, rhs.spans);
        }
      }
    }
    return out;
  }

  Alts<sql::Predicate> negation(std::size_t pos) const {
    Alts<sql::Predicate> out;
    if (std::size_t p = kw(pos, {"not", "("}); p != kFail) {
      for (auto& inner : disjunction(p)) {
        if (std::size_t q = kw(inner.next, {")"}); q != kFail) {
          out.push_back({sql::Predicate::negate(inner.value), q, inner.cost, inner.spans});
        }
      }
    }
    if (std::size_t p = kw(pos, {"("}); p != kFail) {
      for (auto& inner : disjunction(p)) {
        if (std::size_t q = kw(inner.next, {")"}); q != kFail) out.push_back({inner.value, q, inner.cost, inner.spans});
      }
    }
    for (auto& a : atom(pos)) out.push_back(std::move(a));
    return out;
  }

  template <typename Item>
  Alts<std::vector<sql::Predicate>> chain(std::size_t pos, const char* sep, Item item) const {
    Alts<std::vector<sql::Predicate>> out;
    for (auto& first : item(pos)) {
      out.push_back({{first.value}, first.next, first.cost, first.spans});
      if (std::size_t p = kw(first.next, {sep}); p != kFail) {
        for (auto& rest : chain(p, sep, item)) {
          std::vector<sql::Predicate> all{first.value};
          all.insert(all.end(), rest.value.begin(), rest.value.end());
          out.push_back({std::move(all), rest.next, first.cost + rest.cost, concat(first.spans, rest.spans)});
        }
      }
    }
    return out;
  }

  Alts<sql::Predicate> conjunction(std::size_t pos) const {
    Alts<sql::Predicate> out;
    for (auto& parts : chain(pos, "and", [this](std::size_t p) { return negation(p); })) {
      out.push_back({sql::Predicate::all_of(std::move(parts.value)), parts.next, parts.cost, parts.spans});
    }
    return out;
  }

  Alts<sql::Predicate> disjunction(std::size_t pos) const {
    Alts<sql::Predicate> out;
    for (auto& parts : chain(pos, "or", [this](std::size_t p) { return conjunction(p); })) {
      out.push_back({sql::Predicate::any_of(std::move(parts.value)), parts.next, parts.cost, parts.spans});
    }
    return out;
  }

  // Clauses -------------------------------------------------------------------

  static sql::ClauseFragment fragment(ClauseKind kind) {
    sql::ClauseFragment f;
    f.kind = kind;
    return f;
  }

  Alts<std::vector<std::string>> table_list(std::size_t pos) const {
    Alts<std::vector<std::string>> out;
    for (auto& t : table(pos)) {
      out.push_back({{t.value}, t.next, t.cost, t.spans});
      if (std::size_t p = kw(t.next, {"and", "table"}); p != kFail) {
        for (auto& rest : table_list(p)) {
          std::vector<std::string> all{t.value};
          all.insert(all.end(), rest.value.begin(), rest.value.end());
          out.push_back({std::move(all), rest.next, t.cost + rest.cost, concat(t.spans, rest.spans)});
        }
      }
    }
    return out;
  }

  Alts<std::vector<sql::JoinCondition>> join_conditions(std::size_t pos) {
    Alts<std::vector<sql::JoinCondition>> out;
    std::size_t p = kw(pos, {",", "joining"});
    if (p == kFail) return out;
    for (auto& l : column(p)) {
      std::size_t q = kw(l.next, {"with"});
      if (q == kFail) continue;
      for (auto& r : column(q)) {
        sql::JoinCondition cond{l.value, r.value};
        out.push_back({{cond}, r.next, l.cost + r.cost, concat(l.spans, r.spans)});
        for (auto& rest : join_conditions(r.next)) {
          std::vector<sql::JoinCondition> all{cond};
          all.insert(all.end(), rest.value.begin(), rest.value.end());
          out.push_back({std::move(all), rest.next, l.cost + r.cost + rest.cost,
                         concat(concat(l.spans, r.spans), rest.spans)});
        }
      }
    }
    return out;
  }

  Alts<sql::ClauseFragment> from_join() {
    Alts<sql::ClauseFragment> out;
    if (std::size_t p = kw(0, {"in", "table"}); p != kFail) {
      for (auto& t : table(p)) {
        auto f = fragment(ClauseKind::kFrom);
        f.body.from.tables = {t.value};
        out.push_back({std::move(f), t.next, t.cost, t.spans});
      }
    }
    std::size_t p = kw(0, {"merge", "data", "in", "table"});
    if (p == kFail) return out;
    for (auto& list : table_list(p)) {
      if (list.value.size() < 2) continue;
      auto f = fragment(ClauseKind::kJoin);
      f.body.from.tables = list.value;
      if (list.next == toks_.size()) {
        if (auto inferred = infer_join_conditions(list.value, *ctx_.schema)) {
          f.body.from.joins = *inferred;
          out.push_back({f, list.next, list.cost, list.spans});
        }
        continue;
      }
      if (std::size_t q = kw(list.next, {",", "pairing", "every", "record"}); q != kFail) {
        out.push_back({f, q, list.cost, list.spans});
      }
      const auto saved = scope_;
      set_scope(list.value);
      for (auto& conds : join_conditions(list.next)) {
        auto g = f;
        g.body.from.joins = conds.value;
        for (auto& j : g.body.from.joins) {
          auto index_of = [&](const std::string& t) {
            return std::find(list.value.begin(), list.value.end(), t) - list.value.begin();
          };
          if (index_of(j.left.table) > index_of(j.right.table)) std::swap(j.left, j.right);
        }
        out.push_back({std::move(g), conds.next, list.cost + conds.cost, concat(list.spans, conds.spans)});
      }
      scope_ = saved;
    }
    return out;
  }

  Alts<sql::ClauseFragment> filter(const char* noun, ClauseKind kind) const {
    Alts<sql::ClauseFragment> out;
    std::size_t p = kw(0, {"keep", "the", noun, "where"});
    if (p == kFail) return out;
    for (auto& pred : disjunction(p)) {
      auto f = fragment(kind);
      if (kind == ClauseKind::kWhere) {
        f.body.where = pred.value;
      } else {
        f.body.having = pred.value;
      }
      out.push_back({std::move(f), pred.next, pred.cost, pred.spans});
    }
    return out;
  }

  Alts<std::vector<sql::ColumnRef>> column_list(std::size_t pos) const {
    Alts<std::vector<sql::ColumnRef>> out;
    // the article is optional when reading user text
    std::vector<std::size_t> starts{pos};
    if (std::size_t p = kw(pos, {"the"}); p != kFail) starts.insert(starts.begin(), p);
    for (std::size_t p : starts) {
      for (auto& c : column(p)) {
        out.push_back({{c.value}, c.next, c.cost, c.spans});
        if (std::size_t q = kw(c.next, {","}); q != kFail) {
          for (auto& rest : column_list(q)) {
            std::vector<sql::ColumnRef> all{c.value};
            all.insert(all.end(), rest.value.begin(), rest.value.end());
            out.push_back({std::move(all), rest.next, c.cost + rest.cost, concat(c.spans, rest.spans)});
          }
        }
      }
    }
    return out;
  }

  Alts<sql::ClauseFragment> group_by() const {
    Alts<sql::ClauseFragment> out;
    std::size_t p = kw(0, {"split", "the", "data", "into", "groups", "based", "on"});
    if (p == kFail) return out;
    for (auto& cols : column_list(p)) {
      auto f = fragment(ClauseKind::kGroupBy);
      f.body.group_by = cols.value;
      out.push_back({std::move(f), cols.next, cols.cost, cols.spans});
    }
    return out;
  }

  Alts<std::int64_t> limit_phrase(std::size_t pos) const {
    Alts<std::int64_t> out;
    std::size_t p = kw(pos, {"the", "first"});
    if (p == kFail) return out;
    if (std::size_t q = kw(p, {"record"}); q != kFail) out.push_back({1, q, 0.0, {}});
    if (p < toks_.size() && toks_[p].kind == StepTokenKind::kNumber &&
        toks_[p].text.find_first_not_of("0123456789") == std::string::npos) {
      std::size_t q = kw(p + 1, {"records"});
      if (q == kFail) q = kw(p + 1, {"record"});
      if (q != kFail) {
        try {
          out.push_back({std::stoll(toks_[p].text), q, 0.0, {}});
        } catch (const std::exception&) {
        }
      }
    }
    return out;
  }

  Alts<std::vector<sql::OrderItem>> order_items(std::size_t pos) const {
    Alts<std::vector<sql::OrderItem>> out;
    Alts<sql::OrderExpr> keys;
    if (std::size_t p = kw(pos, {"the"}); p != kFail) {
      for (auto& c : column(p)) keys.push_back({c.value, c.next, c.cost, c.spans});
    }
    for (auto& a : aggregate(pos)) keys.push_back({a.value, a.next, a.cost, a.spans});
    for (auto& key : keys) {
      for (auto dir : {sql::SortDirection::kAsc, sql::SortDirection::kDesc}) {
        std::size_t q = kw(key.next, {"in", dir == sql::SortDirection::kAsc ? "ascending" : "descending", "order"});
        if (q == kFail) continue;
        sql::OrderItem item{key.value, dir};
        out.push_back({{item}, q, key.cost, key.spans});
        if (std::size_t r = kw(q, {",", "then"}); r != kFail) {
          for (auto& rest : order_items(r)) {
            std::vector<sql::OrderItem> all{item};
            all.insert(all.end(), rest.value.begin(), rest.value.end());
            out.push_back({std::move(all), rest.next, key.cost + rest.cost, concat(key.spans, rest.spans)});
          }
        }
      }
    }
    return out;
  }

  Alts<sql::ClauseFragment> order_limit() const {
    Alts<sql::ClauseFragment> out;
    if (std::size_t p = kw(0, {"keep", "only"}); p != kFail) {
      for (auto& n : limit_phrase(p)) {
        auto f = fragment(ClauseKind::kOrderLimit);
        f.body.limit = n.value;
        out.push_back({std::move(f), n.next, 0.0, {}});
      }
    }
    std::size_t p = kw(0, {"sort", "the", "records", "based", "on"});
    if (p == kFail) p = kw(0, {"sort", "the", "groups", "based", "on"});
    if (p == kFail) return out;
    for (auto& items : order_items(p)) {
      auto f = fragment(ClauseKind::kOrderLimit);
      f.body.order_by = items.value;
      out.push_back({f, items.next, items.cost, items.spans});
      if (std::size_t q = kw(items.next, {",", "and", "return"}); q != kFail) {
        for (auto& n : limit_phrase(q)) {
          auto g = f;
          g.body.limit = n.value;
          out.push_back({std::move(g), n.next, items.cost, items.spans});
        }
      }
    }
    return out;
  }

  Alts<std::string> alias(std::size_t pos) const {
    Alts<std::string> out;
    std::size_t p = kw(pos, {"as"});
    if (p == kFail || p >= toks_.size()) return out;
    const auto& t = toks_[p];
    if (t.kind == StepTokenKind::kWord || t.kind == StepTokenKind::kQuoted) out.push_back({t.text, p + 1, 0.0, {}});
    return out;
  }

  Alts<sql::Projection> projection(std::size_t pos, bool implicit_the) const {
    Alts<sql::Projection> bases;
    if (!implicit_the) {
      if (std::size_t p = kw(pos, {"all", "columns"}); p != kFail) bases.push_back({{sql::Star{}, ""}, p, 0.0, {}});
    }
    std::size_t cp = implicit_the ? pos : kw(pos, {"the"});
    if (cp != kFail) {
      for (auto& c : column(cp)) bases.push_back({{c.value, ""}, c.next, c.cost, c.spans});
    }
    for (auto& a : aggregate(pos, implicit_the)) bases.push_back({{a.value, ""}, a.next, a.cost, a.spans});
    Alts<sql::Projection> out;
    for (auto& b : bases) {
      out.push_back(b);
      for (auto& al : alias(b.next)) {
        auto with = b;
        with.value.alias = al.value;
        with.next = al.next;
        out.push_back(std::move(with));
      }
    }
    return out;
  }

  Alts<std::vector<sql::Projection>> projection_list(std::size_t pos, bool first_implicit) const {
    Alts<std::vector<sql::Projection>> out;
    for (auto& first : projection(pos, first_implicit)) {
      out.push_back({{first.value}, first.next, first.cost, first.spans});
      if (std::size_t q = kw(first.next, {","}); q != kFail) {
        for (auto& rest : projection_list(q, false)) {
          std::vector<sql::Projection> all{first.value};
          all.insert(all.end(), rest.value.begin(), rest.value.end());
          out.push_back({std::move(all), rest.next, first.cost + rest.cost, concat(first.spans, rest.spans)});
        }
      }
    }
    return out;
  }

  Alts<sql::ClauseFragment> select() const {
    Alts<sql::ClauseFragment> out;
    std::size_t p = kw(0, {"return"});
    if (p == kFail) return out;
    auto emit = [&](const Alt<std::vector<sql::Projection>>& list, bool distinct) {
      auto f = fragment(ClauseKind::kSelect);
      f.body.select.distinct = distinct;
      f.body.select.items = list.value;
      out.push_back({std::move(f), list.next, list.cost, list.spans});
    };
    for (auto& list : projection_list(p, false)) emit(list, false);
    if (std::size_t q = kw(p, {"the", "distinct"}); q != kFail) {
      for (auto& list : projection_list(q, true)) emit(list, true);
    }
    if (std::size_t q = kw(p, {"all", "distinct", "columns"}); q != kFail) {
      Alt<std::vector<sql::Projection>> star{{sql::Projection{sql::Star{}, ""}}, q, 0.0, {}};
      emit(star, true);
      if (std::size_t r = kw(q, {","}); r != kFail) {
        for (auto& rest : projection_list(r, false)) {
          auto all = star;
          all.value.insert(all.value.end(), rest.value.begin(), rest.value.end());
          all.next = rest.next;
          all.cost = rest.cost;
          all.spans = rest.spans;
          emit(all, true);
        }
      }
    }
    return out;
  }

  Alts<sql::ClauseFragment> set_op() const {
    Alts<sql::ClauseFragment> out;
    std::size_t p = kw(0, {"combine", "with", "the", "previous", "query", ","});
    if (p == kFail) return out;
    struct Phrase {
      std::initializer_list<const char*> words;
      sql::SetOperator op;
    };
    const std::array<Phrase, 4> phrases = {
        {{{"keeping", "rows", "in", "both"}, sql::SetOperator::kIntersect},
         {{"keeping", "all", "rows"}, sql::SetOperator::kUnionAll},
         {{"removing", "rows", "that", "appear", "in", "it"}, sql::SetOperator::kExcept},
         {{"keeping", "rows", "from", "either", "without", "duplicates"}, sql::SetOperator::kUnion}}};
    for (const auto& ph : phrases) {
      if (std::size_t q = kw(p, ph.words); q != kFail) {
        auto f = fragment(ClauseKind::kSetOp);
        f.set_op = ph.op;
        out.push_back({std::move(f), q, 0.0, {}});
      }
    }
    return out;
  }

  std::vector<StepToken> toks_;
  const GrammarContext& ctx_;
  std::vector<const sql::TableDef*> scope_;
  std::size_t max_run_ = 1;
};

}  // namespace

std::optional<std::vector<StepToken>> tokenize_step(std::string_view text) {
  std::vector<StepToken> out;
  std::size_t cp = 0;
  std::size_t i = 0;
  auto cp_len = [&](std::size_t from, std::size_t to) { return util::codepoint_count(text.substr(from, to - from)); };
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      ++cp;
      continue;
    }
    StepToken t;
    t.start = cp;
    std::size_t j = i;
    if (c == '"') {
      ++j;
      bool closed = false;
      while (j < text.size()) {
        if (text[j] == '"') {
          if (j + 1 < text.size() && text[j + 1] == '"') {
            t.text.push_back('"');
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        t.text.push_back(text[j]);
        ++j;
      }
      if (!closed) return std::nullopt;
      t.kind = StepTokenKind::kQuoted;
    } else if (std::isdigit(c) || (c == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      j = i + 1;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        j += 1;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      t.kind = StepTokenKind::kNumber;
      if (j < text.size() && word_char(static_cast<unsigned char>(text[j])) && c != '-') {
        while (j < text.size() && word_char(static_cast<unsigned char>(text[j]))) ++j;
        t.kind = StepTokenKind::kWord;
      }
      t.text = std::string(text.substr(i, j - i));
    } else if (word_start(c)) {
      while (j < text.size() && word_char(static_cast<unsigned char>(text[j]))) ++j;
      t.kind = StepTokenKind::kWord;
      t.text = std::string(text.substr(i, j - i));
    } else {
      j = i + 1;
      t.kind = StepTokenKind::kPunct;
      t.text = std::string(1, static_cast<char>(c));
    }
    cp += cp_len(i, j);
    t.end = cp;
    t.lower = t.kind == StepTokenKind::kQuoted ? t.text : ascii_lower(t.text);
    out.push_back(std::move(t));
    i = j;
  }
  return out;
}

std::optional<ParsedStep> parse_step_text(std::string_view text, const GrammarContext& context,
                                          std::optional<ClauseKind> only) {
  auto tokens = tokenize_step(text);
  if (!tokens || tokens->empty() || context.schema == nullptr) return std::nullopt;
  if (tokens->back().kind == StepTokenKind::kPunct && tokens->back().text == ".") tokens->pop_back();
  if (tokens->empty()) return std::nullopt;
  StepParser parser(std::move(*tokens), context);
  auto parses = parser.parse(only);
  if (parses.empty()) return std::nullopt;
  auto best = std::min_element(parses.begin(), parses.end(), [](const auto& a, const auto& b) {
    if (a.first.cost != b.first.cost) return a.first.cost < b.first.cost;
    return a.second < b.second;
  });
  ParsedStep step = std::move(best->first);
  std::sort(step.spans.begin(), step.spans.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  if (step.fragment.kind == ClauseKind::kFrom && step.fragment.body.from.tables.size() > 1) {
    step.fragment.kind = ClauseKind::kJoin;
  }
  return step;
}

}  // namespace groundsql::explain
