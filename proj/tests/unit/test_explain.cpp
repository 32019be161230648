#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "groundsql/explain/explainer.hpp"
#include "groundsql/explain/grammar.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/util/utf8.hpp"
#include "support.hpp"

using namespace groundsql;
using namespace groundsql::explain;
using sql::ClauseKind;

namespace {

const sql::Schema& travel_schema() {
  static const sql::Schema schema = testkit::open_fixture("travel_flights").schema;
  return schema;
}

std::vector<std::string> texts(const ExplanationBlock& block) {
  std::vector<std::string> out;
  for (const auto& s : block.steps) out.push_back(s.text);
  return out;
}

std::string span_text(const ExplanationStep& step, const EntitySpan& span) {
  return util::substr_codepoints(step.text, span.start, span.end);
}

ExplanationPlan explain_sql(const std::string& text, const sql::Schema& schema) {
  return explain::explain(sql::parse_sql(text, &schema), schema);
}

}  // namespace

TEST(Explainer, ScenarioSteps) {
  const auto plan = explain_sql(testkit::kScenarioSql, travel_schema());
  ASSERT_EQ(plan.blocks.size(), 2u);
  EXPECT_EQ(plan.blocks[0].header, "Start the first query");
  EXPECT_EQ(texts(plan.blocks[0]),
            (std::vector<std::string>{
                "Merge data in table flight and table travel.", "Keep the records where month is January.",
                "Split the data into groups based on the destination.",
                "Sort the groups based on the number of records in descending order, and return the first record.",
                "Return the destination."}));
  EXPECT_EQ(texts(plan.blocks[1]),
            (std::vector<std::string>{
                "In table travel.", "Keep the records where the destination is the result of the first query.",
                "Split the data into groups based on the airport code.",
                "Sort the groups based on the number of records in descending order, and return the first record.",
                "Return the airport name."}));
}

TEST(Explainer, ScenarioSubqueryResultSpan) {
  const auto plan = explain_sql(testkit::kScenarioSql, travel_schema());
  const auto& step = plan.blocks[1].steps[1];
  const EntitySpan* found = nullptr;
  for (const auto& s : step.spans) {
    if (std::holds_alternative<SubqueryResultTarget>(s.target)) found = &s;
  }
  ASSERT_NE(found, nullptr);
  EXPECT_EQ(span_text(step, *found), "the result of the first query");
  EXPECT_EQ(std::get<SubqueryResultTarget>(found->target).unit_index, 0u);
}

TEST(Explainer, MinimalQuery) {
  sql::Schema schema;
  schema.tables.push_back({"t", {{"a", sql::Affinity::kText, false}}, {}});
  const auto plan = explain_sql("SELECT * FROM t", schema);
  ASSERT_EQ(plan.blocks.size(), 1u);
  EXPECT_EQ(texts(plan.blocks[0]), (std::vector<std::string>{"In table t.", "Return all columns."}));
}

TEST(Explainer, HavingCountTemplate) {
  const auto db = db::open_database(testkit::database_path("flight_2"));
  const auto schema = db->introspect();
  const auto plan = explain_sql(
      "SELECT T1.Airline FROM AIRLINES AS T1 JOIN FLIGHTS AS T2 ON T1.uid = T2.Airline GROUP BY T1.Airline "
      "HAVING COUNT(*) > 200",
      schema);
  bool seen = false;
  for (const auto& s : plan.blocks[0].steps) {
    if (s.clause_kind == ClauseKind::kHaving) {
      EXPECT_EQ(s.text, "Keep the groups where the number of records is greater than 200.");
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Explainer, RenderClauseDirectly) {
  const auto ast = sql::parse_sql(testkit::kScenarioSql, &travel_schema());
  const RenderContext ctx{travel_schema(), ast, 0, true};
  EXPECT_EQ(render_clause({0, ClauseKind::kGroupBy}, ctx).text,
            "Split the data into groups based on the destination.");
  EXPECT_EQ(render_clause({0, ClauseKind::kOrderLimit}, ctx).text,
            "Sort the groups based on the number of records in descending order, and return the first record.");
}

TEST(Explainer, Deterministic) {
  const auto a = explain_sql(testkit::kScenarioSql, travel_schema());
  const auto b = explain_sql(testkit::kScenarioSql, travel_schema());
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(explanation_digest(a), explanation_digest(b));
}

TEST(Explainer, DigestChangesWithOneCharacter) {
  auto plan = explain_sql(testkit::kScenarioSql, travel_schema());
  const auto before = explanation_digest(plan);
  EXPECT_EQ(before.size(), 16u);
  plan.blocks[0].steps[1].text.back() = '!';
  EXPECT_NE(explanation_digest(plan), before);
}

TEST(Explainer, CorpusDigestsPairwiseDistinct) {
  std::set<std::string> digests;
  const auto tasks = testkit::corpus_tasks();
  for (const auto& task : tasks) {
    const auto db = db::open_database(task.db_path);
    digests.insert(explanation_digest(explain_sql(task.query, db->introspect())));
  }
  EXPECT_EQ(digests.size(), tasks.size());
}

// Every table/column/value reference rendered in a step is covered by a span,
// and the span text is never empty.
TEST(Explainer, SpanCompleteness) {
  for (const auto& task : testkit::corpus_tasks()) {
    const auto db = db::open_database(task.db_path);
    const auto schema = db->introspect();
    const auto plan = explain_sql(task.query, schema);
    for (const auto& block : plan.blocks) {
      for (const auto& step : block.steps) {
        std::set<std::string> expected;
        const auto fragment = sql::extract_clause(plan.source_ast.units[block.unit_index], step.clause_kind);
        auto body = fragment.body;
        sql::for_each_column(body, [&](sql::ColumnRef& c, ClauseKind) {
          expected.insert(sql::normalize_identifier(c.table) + "." + sql::normalize_identifier(c.column));
        });
        if (step.clause_kind == ClauseKind::kFrom || step.clause_kind == ClauseKind::kJoin) {
          expected.clear();
          for (const auto& t : body.from.tables) expected.insert(sql::normalize_identifier(t));
          // join columns only show up when the conditions are spelled out
          if (step.text.find(", joining ") != std::string::npos) {
            for (const auto& j : body.from.joins) {
              for (const auto* c : {&j.left, &j.right}) {
                expected.insert(sql::normalize_identifier(c->table) + "." + sql::normalize_identifier(c->column));
              }
            }
          }
        }
        std::set<std::string> covered;
        for (const auto& span : step.spans) {
          EXPECT_LT(span.start, span.end);
          if (auto* c = std::get_if<ColumnTarget>(&span.target)) {
            covered.insert(sql::normalize_identifier(c->table) + "." + sql::normalize_identifier(c->column));
          } else if (auto* t = std::get_if<TableTarget>(&span.target)) {
            covered.insert(sql::normalize_identifier(t->table));
          }
        }
        EXPECT_EQ(covered, expected) << task.name << " / " << step.text;
      }
    }
  }
}

TEST(Explainer, MultiWayJoinAndOrdinals) {
  EXPECT_EQ(ordinal_word(1), "first");
  EXPECT_EQ(ordinal_word(10), "tenth");
  EXPECT_EQ(ordinal_word(11), "");
  EXPECT_EQ(block_header(1), "Start the second query");
  EXPECT_EQ(block_header(10), "Start query 11");
  EXPECT_EQ(query_reference(0), "the first query");
  EXPECT_EQ(phrase_of("Airport_Code"), "airport code");
}

TEST(Explainer, PlanJsonRoundTrip) {
  const auto plan = explain_sql(testkit::kScenarioSql, travel_schema());
  const auto j = to_json(plan);
  EXPECT_EQ(j["blocks"][1]["steps"][1]["clause_kind"], "where");
  const auto back = plan_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_TRUE(sql::structurally_equal(back.source_ast, plan.source_ast));
  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"blocks": 3})")), Error);
}

TEST(Explainer, OffsetsCountCodePoints) {
  sql::Schema schema;
  schema.tables.push_back({"t", {{"name", sql::Affinity::kText, false}}, {}});
  const auto plan = explain_sql("SELECT name FROM t WHERE name = 'Zoë Ådahl'", schema);
  const auto& step = plan.blocks[0].steps[1];
  bool value_seen = false;
  for (const auto& s : step.spans) {
    if (std::holds_alternative<ValueTarget>(s.target)) {
      value_seen = true;
      EXPECT_NE(span_text(step, s).find("Zoë Ådahl"), std::string::npos);
    }
    EXPECT_LE(s.end, util::codepoint_count(step.text));
  }
  EXPECT_TRUE(value_seen);
}

TEST(Explainer, JoinInference) {
  const auto& schema = travel_schema();
  const auto inferred = infer_join_conditions({"flight", "travel"}, schema);
  ASSERT_TRUE(inferred.has_value());
  ASSERT_EQ(inferred->size(), 1u);
  const auto ast = sql::parse_sql(testkit::kScenarioSql, &schema);
  EXPECT_TRUE(same_join_conditions(*inferred, ast.units[0].from.joins));
}

TEST(Grammar, ReadsScenarioSteps) {
  GrammarContext ctx;
  ctx.schema = &travel_schema();
  ctx.scope_tables = {"travel"};
  ctx.unit_index = 1;
  const auto group = parse_step_text("Split the data into groups based on the airport code.", ctx);
  ASSERT_TRUE(group.has_value());
  EXPECT_EQ(group->fragment.kind, ClauseKind::kGroupBy);
  ASSERT_EQ(group->fragment.body.group_by.size(), 1u);
  EXPECT_EQ(group->fragment.body.group_by[0].column, "airport_code");
  EXPECT_DOUBLE_EQ(group->cost, 0.0);

  ctx.scope_tables = {"flight", "travel"};
  ctx.unit_index = 0;
  const auto between = parse_step_text("Keep the records where month is between January and March.", ctx);
  ASSERT_TRUE(between.has_value());
  EXPECT_EQ(between->fragment.kind, ClauseKind::kWhere);
  ASSERT_TRUE(between->fragment.body.where.has_value());
  EXPECT_TRUE(std::holds_alternative<sql::Between>(between->fragment.body.where->atom));
}

TEST(Grammar, SlackOnNamesArticlesAndPeriod) {
  GrammarContext ctx;
  ctx.schema = &travel_schema();
  ctx.scope_tables = {"travel"};
  ctx.unit_index = 1;
  const auto p = parse_step_text("Split the data into groups based on airport cod", ctx);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->fragment.body.group_by[0].column, "airport_code");
  EXPECT_GT(p->cost, 0.0);
  EXPECT_FALSE(parse_step_text("Split the data into groups based on the runway.", ctx).has_value());
}

TEST(Grammar, RejectsForwardQueryReference) {
  GrammarContext ctx;
  ctx.schema = &travel_schema();
  ctx.scope_tables = {"travel"};
  ctx.unit_index = 0;
  EXPECT_FALSE(
      parse_step_text("Keep the records where the destination is the result of the first query.", ctx).has_value());
}

TEST(Grammar, Tokenizer) {
  const auto toks = tokenize_step("Keep the records where name is \"Zoë \"\"Z\"\"\".");
  ASSERT_TRUE(toks.has_value());
  const auto& quoted = (*toks)[6];
  EXPECT_EQ(quoted.kind, StepTokenKind::kQuoted);
  EXPECT_EQ(quoted.text, "Zoë \"Z\"");
  EXPECT_FALSE(tokenize_step("where name is \"open").has_value());
}

TEST(Grammar, InverseClosureOverCorpus) {
  for (const auto& task : testkit::corpus_tasks()) {
    const auto db = db::open_database(task.db_path);
    const auto schema = db->introspect();
    const auto plan = explain_sql(task.query, schema);
    for (const auto& block : plan.blocks) {
      const auto& unit = plan.source_ast.units[block.unit_index];
      GrammarContext ctx;
      ctx.schema = &schema;
      ctx.scope_tables = unit.from.tables;
      ctx.unit_index = block.unit_index;
      for (const auto& step : block.steps) {
        const auto parsed = parse_step_text(step.text, ctx, step.clause_kind);
        ASSERT_TRUE(parsed.has_value()) << task.name << ": " << step.text;
        EXPECT_DOUBLE_EQ(parsed->cost, 0.0);
        EXPECT_TRUE(sql::structurally_equal(parsed->fragment, sql::extract_clause(unit, step.clause_kind)))
            << task.name << ": " << step.text;
      }
    }
  }
}
