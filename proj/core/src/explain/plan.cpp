#include "groundsql/explain/plan.hpp"

#include <nlohmann/json.hpp>

#include "groundsql/error.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/sql/printer.hpp"

namespace groundsql::explain {

using nlohmann::json;

namespace {

std::string_view literal_kind_name(sql::Literal::Kind kind) {
  switch (kind) {
    case sql::Literal::Kind::kString: return "string";
    case sql::Literal::Kind::kInteger: return "integer";
    case sql::Literal::Kind::kReal: return "real";
  }
  return "string";
}

sql::Literal::Kind literal_kind_from(const std::string& name) {
  if (name == "integer") return sql::Literal::Kind::kInteger;
  if (name == "real") return sql::Literal::Kind::kReal;
  return sql::Literal::Kind::kString;
}

Origin origin_from(const std::string& name) {
  if (name == "user_edited") return Origin::kUserEdited;
  if (name == "user_added") return Origin::kUserAdded;
  if (name == "generated") return Origin::kGenerated;
  throw Error("PlanFormatError", "unknown origin " + name);
}

}  // namespace

bool same_target(const SpanTarget& a, const SpanTarget& b) {
  if (a.index() != b.index()) return false;
  if (auto* t = std::get_if<TableTarget>(&a)) return sql::same_identifier(t->table, std::get<TableTarget>(b).table);
  if (auto* c = std::get_if<ColumnTarget>(&a)) {
    const auto& d = std::get<ColumnTarget>(b);
    return sql::same_identifier(c->table, d.table) && sql::same_identifier(c->column, d.column);
  }
  if (auto* v = std::get_if<ValueTarget>(&a)) {
    const auto& w = std::get<ValueTarget>(b);
    if (!sql::structurally_equal(v->literal, w.literal)) return false;
    if (v->column_hint.has_value() != w.column_hint.has_value()) return false;
    return !v->column_hint || sql::structurally_equal(*v->column_hint, *w.column_hint);
  }
  return std::get<SubqueryResultTarget>(a).unit_index == std::get<SubqueryResultTarget>(b).unit_index;
}

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kGenerated: return "generated";
    case Origin::kUserEdited: return "user_edited";
    case Origin::kUserAdded: return "user_added";
  }
  return "generated";
}

const ExplanationStep* ExplanationPlan::find_step(std::size_t unit_index, std::size_t step_index) const {
  for (const auto& block : blocks) {
    if (block.unit_index != unit_index) continue;
    if (step_index == 0 || step_index > block.steps.size()) return nullptr;
    return &block.steps[step_index - 1];
  }
  return nullptr;
}

json to_json(const SpanTarget& target) {
  return std::visit(
      [](const auto& t) -> json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, TableTarget>) {
          return {{"kind", "table"}, {"table", t.table}};
        } else if constexpr (std::is_same_v<T, ColumnTarget>) {
          return {{"kind", "column"}, {"table", t.table}, {"column", t.column}};
        } else if constexpr (std::is_same_v<T, ValueTarget>) {
          json j = {{"kind", "value"}, {"value", t.literal.text}, {"value_kind", literal_kind_name(t.literal.kind)}};
          j["column_hint"] = t.column_hint ? json{{"table", t.column_hint->table}, {"column", t.column_hint->column}}
                                           : json(nullptr);
          return j;
        } else {
          return {{"kind", "subquery_result"}, {"unit_index", t.unit_index}};
        }
      },
      target);
}

SpanTarget target_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "table") return TableTarget{j.at("table").get<std::string>()};
  if (kind == "column") return ColumnTarget{j.at("table").get<std::string>(), j.at("column").get<std::string>()};
  if (kind == "value") {
    ValueTarget v;
    v.literal.text = j.at("value").get<std::string>();
    v.literal.kind = literal_kind_from(j.value("value_kind", "string"));
    if (j.contains("column_hint") && !j["column_hint"].is_null()) {
      v.column_hint = sql::ColumnRef{j["column_hint"].at("table").get<std::string>(),
                                     j["column_hint"].at("column").get<std::string>()};
    }
    return v;
  }
  if (kind == "subquery_result") return SubqueryResultTarget{j.at("unit_index").get<std::size_t>()};
  throw Error("PlanFormatError", "unknown span target kind " + kind);
}

json to_json(const EntitySpan& span) {
  return {{"start", span.start}, {"end", span.end}, {"target", to_json(span.target)}};
}

json to_json(const ExplanationStep& step) {
  json spans = json::array();
  for (const auto& s : step.spans) spans.push_back(to_json(s));
  json j = {{"unit_index", step.unit_index},
            {"step_index", step.step_index},
            {"clause_kind", sql::to_string(step.clause_kind)},
            {"text", step.text},
            {"spans", std::move(spans)},
            {"origin", to_string(step.origin)}};
  if (!step.raw_text.empty()) j["raw_text"] = step.raw_text;
  return j;
}

json to_json(const ExplanationPlan& plan) {
  json blocks = json::array();
  for (const auto& block : plan.blocks) {
    json steps = json::array();
    for (const auto& step : block.steps) steps.push_back(to_json(step));
    blocks.push_back({{"unit_index", block.unit_index}, {"header", block.header}, {"steps", std::move(steps)}});
  }
  return {{"blocks", std::move(blocks)}, {"sql", sql::print_sql(plan.source_ast)}};
}

ExplanationPlan plan_from_json(const json& j) {
  try {
    ExplanationPlan plan;
    plan.source_ast = sql::parse_sql(j.at("sql").get<std::string>());
    for (const auto& jb : j.at("blocks")) {
      ExplanationBlock block;
      block.unit_index = jb.at("unit_index").get<std::size_t>();
      block.header = jb.at("header").get<std::string>();
      for (const auto& js : jb.at("steps")) {
        ExplanationStep step;
        step.unit_index = js.at("unit_index").get<std::size_t>();
        step.step_index = js.at("step_index").get<std::size_t>();
        auto kind = sql::clause_kind_from_string(js.at("clause_kind").get<std::string>());
        if (!kind) throw Error("PlanFormatError", "unknown clause kind");
        step.clause_kind = *kind;
        step.text = js.at("text").get<std::string>();
        step.origin = origin_from(js.value("origin", "generated"));
        step.raw_text = js.value("raw_text", "");
        for (const auto& jspan : js.at("spans")) {
          step.spans.push_back({jspan.at("start").get<std::size_t>(), jspan.at("end").get<std::size_t>(),
                                target_from_json(jspan.at("target"))});
        }
        block.steps.push_back(std::move(step));
      }
      plan.blocks.push_back(std::move(block));
    }
    return plan;
  } catch (const json::exception& e) {
    throw Error("PlanFormatError", std::string("malformed plan JSON: ") + e.what());
  }
}

}  // namespace groundsql::explain
