#include "groundsql/refine/refiner.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "groundsql/explain/explainer.hpp"
#include "groundsql/explain/grammar.hpp"
#include "groundsql/sql/parser.hpp"

namespace groundsql::refine {

using sql::ClauseKind;

namespace {

std::string lowered_trimmed(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

// FROM and JOIN steps describe the same clause.
ClauseKind slot(ClauseKind k) { return k == ClauseKind::kJoin ? ClauseKind::kFrom : k; }

}  // namespace

ClauseKind classify_step(std::string_view text) {
  const std::string s = lowered_trimmed(text);
  if (starts_with(s, "merge data")) return ClauseKind::kJoin;
  if (starts_with(s, "in table")) return ClauseKind::kFrom;
  if (starts_with(s, "keep the records")) return ClauseKind::kWhere;
  if (starts_with(s, "split the data into groups")) return ClauseKind::kGroupBy;
  if (starts_with(s, "keep the groups")) return ClauseKind::kHaving;
  if (starts_with(s, "sort") || starts_with(s, "keep only")) return ClauseKind::kOrderLimit;
  if (starts_with(s, "return")) return ClauseKind::kSelect;
  if (starts_with(s, "combine with")) return ClauseKind::kSetOp;
  return ClauseKind::kWhere;
}

ClauseParse parse_step(std::string_view text, const StepParseContext& context, ClauseKind kind_hint,
                       ClauseBackend& backend, std::pair<std::size_t, std::size_t> where) {
  const std::string original(text);
  if (context.schema == nullptr) throw UnparsableStep(where.first, where.second, original, "no schema");

  explain::GrammarContext grammar{context.schema, context.scope_tables, context.unit_index, context.min_similarity};
  if (auto exact = explain::parse_step_text(text, grammar)) {
    return {std::move(exact->fragment), Confidence::kExact, std::move(exact->spans)};
  }

  ClauseRequest request{original, kind_hint, context.schema, context.scope_tables};
  std::optional<std::string> answer;
  try {
    answer = backend.propose(request);
  } catch (const Error& e) {
    throw UnparsableStep(where.first, where.second, original, e.what());
  }
  if (!answer) throw UnparsableStep(where.first, where.second, original, "no clause backend recognised it");

  ClauseParse out;
  out.confidence = Confidence::kBackend;
  try {
    out.fragment = sql::parse_clause_fragment(*answer);
    if (out.fragment.kind == ClauseKind::kSetOp) throw Error("UnsupportedConstruct", "set operator");
    sql::resolve_fragment(out.fragment, context.scope_tables, *context.schema);
  } catch (const Error& e) {
    throw UnparsableStep(where.first, where.second, original, "backend answer \"" + *answer + "\" rejected: " + e.what());
  }
  return out;
}

nlohmann::json to_json(const EditOp& op) {
  std::string kind = op.kind == EditOp::Kind::kUpdate ? "update" : op.kind == EditOp::Kind::kAdd ? "add" : "delete";
  nlohmann::json j = {{"kind", kind}, {"unit_index", op.unit_index}, {"step_index", op.step_index}};
  if (op.kind != EditOp::Kind::kDelete) j["new_text"] = op.new_text;
  return j;
}

EditOp edit_from_json(const nlohmann::json& j) {
  try {
    EditOp op;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "update") {
      op.kind = EditOp::Kind::kUpdate;
    } else if (kind == "add") {
      op.kind = EditOp::Kind::kAdd;
    } else if (kind == "delete") {
      op.kind = EditOp::Kind::kDelete;
    } else {
      throw Error("FormatError", "unknown edit kind: " + kind);
    }
    for (const char* key : {"unit_index", "step_index"}) {
      if (!j.at(key).is_number_unsigned()) throw Error("FormatError", std::string(key) + " must be a non-negative integer");
    }
    op.unit_index = j.at("unit_index").get<std::size_t>();
    op.step_index = j.at("step_index").get<std::size_t>();
    if (op.kind != EditOp::Kind::kDelete) op.new_text = j.at("new_text").get<std::string>();
    return op;
  } catch (const nlohmann::json::exception& e) {
    throw Error("FormatError", std::string("bad edit: ") + e.what());
  }
}

namespace {

struct Touch {
  ClauseKind kind;
  explain::Origin origin;
  std::string raw_text;
};

struct UnitEdits {
  std::vector<const EditOp*> ops;
};

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

sql::Predicate conjoin(const sql::Predicate& existing, const sql::Predicate& added) {
  return sql::Predicate::all_of({existing, added});
}

}  // namespace

EditOutcome apply_edits(const explain::ExplanationPlan& plan, const std::vector<EditOp>& edits,
                        const sql::Schema& schema, ClauseBackend& backend, double min_similarity) {
  const sql::QueryAst& source = plan.source_ast;
  if (edits.empty()) return {source, plan};

  // Bounds and duplicate checks before anything is parsed.
  std::map<std::size_t, UnitEdits> by_unit;
  std::set<std::pair<std::size_t, std::size_t>> seen_steps;
  for (const auto& op : edits) {
    const explain::ExplanationBlock* block = nullptr;
    for (const auto& b : plan.blocks) {
      if (b.unit_index == op.unit_index) block = &b;
    }
    if (block == nullptr) throw Error("InvalidEdit", "no block " + std::to_string(op.unit_index));
    const std::size_t limit = block->steps.size() + (op.kind == EditOp::Kind::kAdd ? 1 : 0);
    if (op.step_index < 1 || op.step_index > limit) {
      throw Error("InvalidEdit", "step " + std::to_string(op.step_index) + " is outside block " +
                                     std::to_string(op.unit_index));
    }
    if (op.kind != EditOp::Kind::kDelete && blank(op.new_text)) {
      throw Error("InvalidEdit", "edit of step " + std::to_string(op.step_index) + " has no text");
    }
    if (op.kind != EditOp::Kind::kAdd && !seen_steps.insert({op.unit_index, op.step_index}).second) {
      throw ConflictError("step " + std::to_string(op.step_index) + " of block " + std::to_string(op.unit_index) +
                          " is edited twice");
    }
    by_unit[op.unit_index].ops.push_back(&op);
  }

  std::vector<sql::SubqueryUnit> units = source.units;
  std::vector<sql::SetOperator> set_ops = source.set_ops;
  std::map<std::size_t, std::vector<Touch>> touches;

  for (auto& [u, group] : by_unit) {
    const explain::ExplanationBlock& block = *std::find_if(
        plan.blocks.begin(), plan.blocks.end(), [&](const auto& b) { return b.unit_index == u; });
    sql::SubqueryUnit unit = units[u];
    std::set<ClauseKind> present;
    for (auto k : sql::present_clauses(unit)) present.insert(slot(k));

    auto old_kind = [&](const EditOp& op) { return block.steps[op.step_index - 1].clause_kind; };
    std::map<const EditOp*, ClauseParse> parses;
    auto parse = [&](const EditOp& op, const std::vector<std::string>& scope) {
      StepParseContext ctx{&schema, scope, u, min_similarity};
      const ClauseKind hint = op.kind == EditOp::Kind::kUpdate ? old_kind(op) : classify_step(op.new_text);
      parses.emplace(&op, parse_step(op.new_text, ctx, hint, backend, {u, op.step_index}));
    };

    // FROM/JOIN texts first: the other steps resolve their columns against them.
    std::vector<std::string> scope = unit.from.tables;
    for (const EditOp* op : group.ops) {
      if (op->kind == EditOp::Kind::kDelete) continue;
      const ClauseKind hint = op->kind == EditOp::Kind::kUpdate ? old_kind(*op) : classify_step(op->new_text);
      if (slot(hint) != ClauseKind::kFrom) continue;
      parse(*op, scope);
      const auto& f = parses.at(op).fragment;
      if (slot(f.kind) == ClauseKind::kFrom) scope = f.body.from.tables;
    }
    for (const EditOp* op : group.ops) {
      if (op->kind != EditOp::Kind::kDelete && !parses.count(op)) parse(*op, scope);
    }

    // Removals, then replacements, then additions.
    const auto position = source.top_level_position(u);
    for (const EditOp* op : group.ops) {
      if (op->kind == EditOp::Kind::kAdd) continue;
      const ClauseKind k = old_kind(*op);
      if (k == ClauseKind::kSetOp) {
        if (op->kind == EditOp::Kind::kDelete) throw ConflictError("the step that combines two queries cannot be deleted");
        continue;
      }
      if (op->kind == EditOp::Kind::kDelete && slot(k) == ClauseKind::kFrom) {
        throw ConflictError("block " + std::to_string(u) + " cannot lose its table step");
      }
      sql::remove_clause(unit, k);
      present.erase(slot(k));
    }
    for (const EditOp* op : group.ops) {
      if (op->kind != EditOp::Kind::kUpdate) continue;
      const ClauseKind k = old_kind(*op);
      const sql::ClauseFragment& f = parses.at(op).fragment;
      if (k == ClauseKind::kSetOp || f.kind == ClauseKind::kSetOp) {
        if (k != f.kind) throw ConflictError("step " + std::to_string(op->step_index) + " changes its clause type");
        set_ops.at(*position - 1) = f.set_op;
        touches[u].push_back({k, explain::Origin::kUserEdited, op->new_text});
        continue;
      }
      if (present.count(slot(f.kind))) {
        throw ConflictError("block " + std::to_string(u) + " would have two " + std::string(sql::to_string(f.kind)) +
                            " steps");
      }
      sql::install_clause(unit, f);
      present.insert(slot(f.kind));
      touches[u].push_back({slot(f.kind), explain::Origin::kUserEdited, op->new_text});
    }
    for (const EditOp* op : group.ops) {
      if (op->kind != EditOp::Kind::kAdd) continue;
      const sql::ClauseFragment& f = parses.at(op).fragment;
      if (f.kind == ClauseKind::kSetOp) throw ConflictError("set operation steps cannot be added");
      if (f.kind == ClauseKind::kWhere && unit.where) {
        unit.where = conjoin(*unit.where, *f.body.where);
      } else if (f.kind == ClauseKind::kHaving && unit.having) {
        unit.having = conjoin(*unit.having, *f.body.having);
      } else if (present.count(slot(f.kind))) {
        throw ConflictError("block " + std::to_string(u) + " would have two " + std::string(sql::to_string(f.kind)) +
                            " steps");
      } else {
        sql::install_clause(unit, f);
      }
      present.insert(slot(f.kind));
      touches[u].push_back({slot(f.kind), explain::Origin::kUserAdded, op->new_text});
    }
    units[u] = std::move(unit);
  }

  // Subqueries whose consumer no longer refers to them are dropped.
  const auto old_top = source.top_level_units();
  std::vector<bool> keep(units.size(), true);
  for (bool changed = true; changed;) {
    changed = false;
    std::set<std::size_t> referenced;
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (!keep[u]) continue;
      auto add = [&](const sql::SubqueryRef& r) { referenced.insert(r.unit); };
      if (units[u].where) sql::for_each_subquery(*units[u].where, add);
      if (units[u].having) sql::for_each_subquery(*units[u].having, add);
    }
    for (std::size_t u = 0; u < units.size(); ++u) {
      const bool was_top = std::find(old_top.begin(), old_top.end(), u) != old_top.end();
      if (keep[u] && !was_top && !referenced.count(u)) {
        keep[u] = false;
        changed = true;
      }
    }
  }
  std::map<std::size_t, std::size_t> renumber;
  sql::QueryAst result;
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (!keep[u]) continue;
    renumber[u] = result.units.size();
    result.units.push_back(units[u]);
  }
  for (auto& unit : result.units) {
    auto fix = [&](sql::SubqueryRef& r) { r.unit = renumber.count(r.unit) ? renumber[r.unit] : units.size(); };
    if (unit.where) sql::for_each_subquery(*unit.where, fix);
    if (unit.having) sql::for_each_subquery(*unit.having, fix);
  }
  result.set_ops = set_ops;
  if (result.top_level_units().size() != result.set_ops.size() + 1) {
    throw ConflictError("the edits change which blocks are combined into the final result");
  }
  auto diagnostics = sql::validate(result, schema);
  if (!diagnostics.empty()) {
    const std::string first = sql::to_string(diagnostics.front());
    throw ConflictError("edited query is invalid: " + first, std::move(diagnostics));
  }

  EditOutcome out;
  out.plan = explain::explain(result, schema);
  out.ast = out.plan.source_ast;

  auto mark = [&](std::size_t new_unit, ClauseKind kind, explain::Origin origin, const std::string& raw) {
    for (auto& b : out.plan.blocks) {
      if (b.unit_index != new_unit) continue;
      for (auto& s : b.steps) {
        if (slot(s.clause_kind) != slot(kind)) continue;
        if (s.origin == explain::Origin::kGenerated || origin == explain::Origin::kUserEdited) s.origin = origin;
        s.raw_text = s.raw_text.empty() ? raw : s.raw_text + "\n" + raw;
      }
    }
  };
  // Earlier user edits keep their badge while their clause is left alone.
  for (const auto& b : plan.blocks) {
    if (!renumber.count(b.unit_index)) continue;
    for (const auto& s : b.steps) {
      if (s.origin == explain::Origin::kGenerated) continue;
      const auto& t = touches[b.unit_index];
      const bool retouched = std::any_of(t.begin(), t.end(), [&](const Touch& x) { return x.kind == slot(s.clause_kind); });
      if (!retouched) mark(renumber[b.unit_index], s.clause_kind, s.origin, s.raw_text);
    }
  }
  for (const auto& [u, list] : touches) {
    if (!renumber.count(u)) continue;
    for (const auto& t : list) mark(renumber[u], t.kind, t.origin, t.raw_text);
  }
  return out;
}

History::History(explain::ExplanationPlan initial) { push(std::move(initial)); }

void History::push(explain::ExplanationPlan plan) {
  if (!snapshots_.empty()) snapshots_.resize(cursor_ + 1);
  Snapshot s;
  s.digest = explain::explanation_digest(plan);
  s.plan = std::move(plan);
  snapshots_.push_back(std::move(s));
  cursor_ = snapshots_.size() - 1;
}

const Snapshot& History::undo() {
  if (!can_undo()) throw Error("NothingToUndo", "already at the first version");
  --cursor_;
  return current();
}

const Snapshot& History::redo() {
  if (!can_redo()) throw Error("NothingToRedo", "already at the latest version");
  ++cursor_;
  return current();
}

}  // namespace groundsql::refine
