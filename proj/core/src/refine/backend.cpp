#include "groundsql/refine/backend.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "groundsql/explain/explainer.hpp"
#include "groundsql/explain/grammar.hpp"
#include "groundsql/link/linker.hpp"
#include "groundsql/sql/printer.hpp"
#include "util/http_json.hpp"

namespace groundsql::refine {

using explain::StepToken;
using explain::StepTokenKind;
using sql::ClauseKind;

std::optional<std::string> EchoTemplateBackend::propose(const ClauseRequest& request) {
  if (request.step_text.empty()) return std::nullopt;
  return request.step_text;
}

namespace {

bool one_of(const std::string& w, std::initializer_list<const char*> words) {
  return std::any_of(words.begin(), words.end(), [&](const char* x) { return w == x; });
}

std::optional<sql::AggregateFn> aggregate_word(const std::string& w) {
  if (one_of(w, {"count", "number"})) return sql::AggregateFn::kCount;
  if (one_of(w, {"average", "mean", "avg"})) return sql::AggregateFn::kAvg;
  if (one_of(w, {"total", "sum"})) return sql::AggregateFn::kSum;
  if (one_of(w, {"maximum", "max", "highest", "largest", "biggest"})) return sql::AggregateFn::kMax;
  if (one_of(w, {"minimum", "min", "lowest", "smallest"})) return sql::AggregateFn::kMin;
  return std::nullopt;
}

// A linked column mention plus the token range it covers.
struct Mention {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
  sql::ColumnRef column;
  std::string table_only;  // set for table mentions
};

class RuleReader {
 public:
  RuleReader(std::vector<StepToken> tokens, std::vector<Mention> mentions)
      : toks_(std::move(tokens)), mentions_(std::move(mentions)) {}

  std::optional<sql::ClauseFragment> read(ClauseKind kind, const sql::Schema& schema) {
    switch (kind) {
      case ClauseKind::kFrom:
      case ClauseKind::kJoin: return read_from(schema);
      case ClauseKind::kWhere:
      case ClauseKind::kHaving: return read_filter(kind);
      case ClauseKind::kGroupBy: return read_group();
      case ClauseKind::kOrderLimit: return read_order();
      case ClauseKind::kSelect: return read_select();
      case ClauseKind::kSetOp: return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  bool has_word(std::initializer_list<const char*> words) const {
    return std::any_of(toks_.begin(), toks_.end(), [&](const StepToken& t) { return one_of(t.lower, words); });
  }

  std::vector<const Mention*> columns() const {
    std::vector<const Mention*> out;
    for (const auto& m : mentions_) {
      if (m.table_only.empty()) out.push_back(&m);
    }
    return out;
  }

  // Aggregate words right before a mention ("the total cost", "number of pets").
  sql::Operand operand_for(const Mention& m) const {
    for (std::size_t back = 1; back <= 3 && back <= m.first; ++back) {
      const auto& w = toks_[m.first - back].lower;
      if (auto fn = aggregate_word(w)) return sql::Aggregate{*fn, m.column, false};
      if (!one_of(w, {"the", "of", "a"})) break;
    }
    return m.column;
  }

  bool count_records_phrase() const {
    for (std::size_t i = 0; i + 2 < toks_.size(); ++i) {
      if (toks_[i].lower == "number" && toks_[i + 1].lower == "of" && one_of(toks_[i + 2].lower, {"records", "rows"})) {
        return true;
      }
    }
    return has_word({"count"});
  }

  std::optional<sql::ClauseFragment> read_from(const sql::Schema& schema) {
    sql::ClauseFragment f;
    f.kind = ClauseKind::kFrom;
    for (const auto& m : mentions_) {
      const std::string& t = m.table_only;
      if (t.empty()) continue;
      if (std::none_of(f.body.from.tables.begin(), f.body.from.tables.end(),
                       [&](const std::string& x) { return sql::same_identifier(x, t); })) {
        f.body.from.tables.push_back(t);
      }
    }
    if (f.body.from.tables.empty()) return std::nullopt;
    if (f.body.from.tables.size() > 1) {
      f.kind = ClauseKind::kJoin;
      if (auto joins = explain::infer_join_conditions(f.body.from.tables, schema)) f.body.from.joins = *joins;
    }
    return f;
  }

  std::optional<sql::Literal> literal_at(std::size_t& i, std::size_t end) const {
    static const std::set<std::string> kFiller = {
        "is",    "are",    "was",   "were",   "be",     "in",      "of",    "the",   "equals",  "equal",
        "to",    "than",   "at",    "least",  "most",   "greater", "less",  "more",  "fewer",   "not",
        "exactly", "should", "must", "only",  "set",    "on",      "for",   "a",     "an",      "between",
        "above", "below",  "under", "over",   "after",  "before",  "contains", "containing", "like",
        "includes", "sure", "make", "has",    "have",   "with",    "from",  "year's", "value"};
    while (i < end && (toks_[i].kind == StepTokenKind::kPunct || (toks_[i].kind == StepTokenKind::kWord &&
                                                                   kFiller.count(toks_[i].lower) > 0))) {
      ++i;
    }
    if (i >= end) return std::nullopt;
    const StepToken& t = toks_[i];
    if (t.kind == StepTokenKind::kNumber) {
      ++i;
      return sql::Literal{t.text.find('.') == std::string::npos ? sql::Literal::Kind::kInteger
                                                                 : sql::Literal::Kind::kReal,
                          t.text};
    }
    if (t.kind == StepTokenKind::kQuoted) {
      ++i;
      return sql::Literal{sql::Literal::Kind::kString, t.text};
    }
    std::string words;
    while (i < end && toks_[i].kind == StepTokenKind::kWord && !one_of(toks_[i].lower, {"and", "or"})) {
      if (!words.empty()) words += ' ';
      words += toks_[i].text;
      ++i;
    }
    if (words.empty()) return std::nullopt;
    return sql::Literal{sql::Literal::Kind::kString, words};
  }

  std::optional<sql::Predicate> condition(const sql::Operand& lhs, std::size_t from, std::size_t end) const {
    std::set<std::string> gap;
    for (std::size_t k = from; k < end; ++k) gap.insert(toks_[k].lower);
    auto in_gap = [&](const char* w) { return gap.count(w) > 0; };
    std::size_t i = from;
    if (in_gap("between")) {
      auto low = literal_at(i, end);
      while (i < end && toks_[i].lower != "and") ++i;
      if (i < end) ++i;
      auto high = literal_at(i, end);
      if (!low || !high) return std::nullopt;
      sql::Predicate p = sql::Predicate::leaf(sql::Between{lhs, *low, *high});
      return in_gap("not") ? sql::Predicate::negate(std::move(p)) : p;
    }
    auto value = literal_at(i, end);
    if (!value) return std::nullopt;
    if (in_gap("contains") || in_gap("containing") || in_gap("like") || in_gap("includes")) {
      sql::Literal pattern{sql::Literal::Kind::kString, "%" + value->text + "%"};
      sql::Predicate p = sql::Predicate::leaf(sql::Like{lhs, pattern});
      return in_gap("not") ? sql::Predicate::negate(std::move(p)) : p;
    }
    sql::CompareOp op = sql::CompareOp::kEq;
    const bool or_equal = in_gap("equal") && in_gap("or");
    if (in_gap("least")) {
      op = sql::CompareOp::kGe;
    } else if (in_gap("most") && in_gap("at")) {
      op = sql::CompareOp::kLe;
    } else if (in_gap("greater") || in_gap("more") || in_gap("above") || in_gap("over") || in_gap("after") ||
               in_gap("exceeds")) {
      op = or_equal ? sql::CompareOp::kGe : sql::CompareOp::kGt;
    } else if (in_gap("less") || in_gap("fewer") || in_gap("below") || in_gap("under") || in_gap("before")) {
      op = or_equal ? sql::CompareOp::kLe : sql::CompareOp::kLt;
    } else if (in_gap("not")) {
      op = sql::CompareOp::kNe;
    }
    return sql::Predicate::leaf(sql::Compare{op, lhs, sql::Operand{*value}});
  }

  std::optional<sql::ClauseFragment> read_filter(ClauseKind kind) {
    const auto cols = columns();
    std::vector<sql::Predicate> parts;
    std::vector<bool> joined_by_or;
    std::size_t previous_end = 0;
    auto add = [&](std::optional<sql::Predicate> p, std::size_t start) {
      if (!p) return;
      bool is_or = false;
      for (std::size_t k = previous_end; k < start; ++k) is_or = is_or || toks_[k].lower == "or";
      if (!parts.empty()) joined_by_or.push_back(is_or);
      parts.push_back(std::move(*p));
    };
    if (cols.empty() && kind == ClauseKind::kHaving && count_records_phrase()) {
      std::size_t start = 0;
      while (start < toks_.size() && one_of(toks_[start].lower, {"keep", "the", "groups", "where", "whose", "number",
                                                                  "of", "records", "rows", "count"})) {
        ++start;
      }
      add(condition(sql::Aggregate{sql::AggregateFn::kCount, std::nullopt, false}, start, toks_.size()), 0);
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::size_t end = c + 1 < cols.size() ? cols[c + 1]->first : toks_.size();
      sql::Operand lhs = kind == ClauseKind::kHaving ? operand_for(*cols[c]) : sql::Operand{cols[c]->column};
      add(condition(lhs, cols[c]->last, end), cols[c]->first);
      previous_end = cols[c]->last;
    }
    if (parts.empty()) return std::nullopt;
    // AND binds tighter than OR: split at the ORs.
    std::vector<sql::Predicate> disjuncts;
    std::vector<sql::Predicate> run{parts[0]};
    for (std::size_t k = 1; k < parts.size(); ++k) {
      if (joined_by_or[k - 1]) {
        disjuncts.push_back(run.size() == 1 ? run[0] : sql::Predicate::all_of(run));
        run.clear();
      }
      run.push_back(parts[k]);
    }
    disjuncts.push_back(run.size() == 1 ? run[0] : sql::Predicate::all_of(run));
    sql::ClauseFragment f;
    f.kind = kind;
    sql::Predicate p = disjuncts.size() == 1 ? disjuncts[0] : sql::Predicate::any_of(disjuncts);
    if (kind == ClauseKind::kWhere) {
      f.body.where = std::move(p);
    } else {
      f.body.having = std::move(p);
    }
    return f;
  }

  std::optional<sql::ClauseFragment> read_group() {
    sql::ClauseFragment f;
    f.kind = ClauseKind::kGroupBy;
    for (const auto* m : columns()) f.body.group_by.push_back(m->column);
    if (f.body.group_by.empty()) return std::nullopt;
    return f;
  }

  std::optional<sql::ClauseFragment> read_order() {
    sql::ClauseFragment f;
    f.kind = ClauseKind::kOrderLimit;
    const auto cols = columns();
    sql::OrderItem item;
    item.direction = has_word({"descending", "desc", "decreasing", "highest", "most", "largest", "biggest",
                               "greatest", "latest", "reverse", "reversed"})
                         ? sql::SortDirection::kDesc
                         : sql::SortDirection::kAsc;
    if (!cols.empty()) {
      sql::Operand op = operand_for(*cols.front());
      if (auto* a = std::get_if<sql::Aggregate>(&op)) {
        item.expr = *a;
      } else {
        item.expr = std::get<sql::ColumnRef>(op);
      }
    } else if (count_records_phrase()) {
      item.expr = sql::Aggregate{sql::AggregateFn::kCount, std::nullopt, false};
    } else {
      return std::nullopt;
    }
    f.body.order_by.push_back(item);
    for (const auto& t : toks_) {
      if (t.kind == StepTokenKind::kNumber && t.text.find_first_not_of("0123456789") == std::string::npos) {
        f.body.limit = std::stoll(t.text);
        break;
      }
    }
    if (!f.body.limit && has_word({"first", "top"}) && has_word({"record", "one"})) f.body.limit = 1;
    return f;
  }

  std::optional<sql::ClauseFragment> read_select() {
    sql::ClauseFragment f;
    f.kind = ClauseKind::kSelect;
    f.body.select.distinct = has_word({"distinct", "unique", "different"});
    for (const auto* m : columns()) {
      sql::Operand op = operand_for(*m);
      if (auto* a = std::get_if<sql::Aggregate>(&op)) {
        f.body.select.items.push_back({*a, ""});
      } else {
        f.body.select.items.push_back({std::get<sql::ColumnRef>(op), ""});
      }
    }
    if (f.body.select.items.empty()) {
      if (count_records_phrase()) {
        f.body.select.items.push_back({sql::Aggregate{sql::AggregateFn::kCount, std::nullopt, false}, ""});
      } else if (!has_word({"everything", "all"})) {
        return std::nullopt;
      }
    }
    return f;
  }

  std::vector<StepToken> toks_;
  std::vector<Mention> mentions_;
};

}  // namespace

std::optional<std::string> RuleBackend::propose(const ClauseRequest& request) {
  if (request.schema == nullptr) return std::nullopt;
  auto tokens = explain::tokenize_step(request.step_text);
  if (!tokens || tokens->empty()) return std::nullopt;
  const auto spans = link::fuzzy_link(request.step_text, *request.schema, request.scope_tables, min_similarity_);
  std::vector<Mention> mentions;
  for (const auto& span : spans) {
    Mention m;
    while (m.first < tokens->size() && (*tokens)[m.first].start < span.start) ++m.first;
    m.last = m.first;
    while (m.last < tokens->size() && (*tokens)[m.last].end <= span.end) ++m.last;
    if (auto* c = std::get_if<explain::ColumnTarget>(&span.target)) {
      m.column = {c->table, c->column};
    } else if (auto* t = std::get_if<explain::TableTarget>(&span.target)) {
      m.table_only = t->table;
    } else {
      continue;
    }
    mentions.push_back(std::move(m));
  }
  RuleReader reader(std::move(*tokens), std::move(mentions));
  auto fragment = reader.read(request.kind_hint, *request.schema);
  if (!fragment) return std::nullopt;
  return sql::print_fragment(*fragment, nullptr);
}

HttpBackend::HttpBackend(std::string url, int timeout_ms) : url_(std::move(url)), timeout_ms_(timeout_ms) {}

std::optional<std::string> HttpBackend::propose(const ClauseRequest& request) {
  nlohmann::json body = {{"step_text", request.step_text},
                         {"kind_hint", std::string(sql::to_string(request.kind_hint))},
                         {"schema", request.schema ? sql::to_json(*request.schema) : nlohmann::json::object()}};
  nlohmann::json reply;
  try {
    reply = util::post_json(url_, body, timeout_ms_, "BackendError");
  } catch (const Error& e) {
    throw BackendError(e.what());
  }
  if (!reply.is_object() || !reply.contains("clause_sql_fragment") || reply["clause_sql_fragment"].is_null()) {
    return std::nullopt;
  }
  if (!reply["clause_sql_fragment"].is_string()) throw BackendError("clause_sql_fragment is not a string");
  return reply["clause_sql_fragment"].get<std::string>();
}

std::string ChainBackend::name() const {
  std::string out;
  for (const auto& b : chain_) out += (out.empty() ? "" : "+") + b->name();
  return out;
}

std::optional<std::string> ChainBackend::propose(const ClauseRequest& request) {
  for (const auto& b : chain_) {
    if (auto answer = b->propose(request)) return answer;
  }
  return std::nullopt;
}

std::shared_ptr<ClauseBackend> make_backend(const std::string& spec, const std::string& url, int timeout_ms) {
  std::vector<std::shared_ptr<ClauseBackend>> chain;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t plus = std::min(spec.find('+', start), spec.size());
    const std::string part = spec.substr(start, plus - start);
    if (part == "refusing") {
      chain.push_back(std::make_shared<RefusingBackend>());
    } else if (part == "echo") {
      chain.push_back(std::make_shared<EchoTemplateBackend>());
    } else if (part == "rules") {
      chain.push_back(std::make_shared<RuleBackend>());
    } else if (part == "http") {
      if (url.empty()) throw Error("ConfigError", "http clause backend needs a url");
      chain.push_back(std::make_shared<HttpBackend>(url, timeout_ms));
    } else {
      throw Error("ConfigError", "unknown clause backend: " + part);
    }
    start = plus + 1;
  }
  if (chain.size() == 1) return chain.front();
  return std::make_shared<ChainBackend>(std::move(chain));
}

}  // namespace groundsql::refine
