#include <gtest/gtest.h>

#include <random>

#include "groundsql/sql/analysis.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/sql/printer.hpp"
#include "groundsql/sql/schema.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

using namespace groundsql;
using namespace groundsql::sql;

namespace {

std::vector<ClauseKind> kinds_of(const UnitClauses& u) {
  std::vector<ClauseKind> out;
  for (const auto& c : u.clauses) out.push_back(c.kind);
  return out;
}

const Schema& flight_schema() {
  static const Schema schema = testkit::open_fixture("flight_prices").schema;
  return schema;
}

}  // namespace

TEST(Parser, SingleCompareQuery) {
  const auto ast = parse_sql(R"(SELECT Abbreviation FROM AIRLINES WHERE Airline = "JetBlue Airways")");
  ASSERT_EQ(ast.units.size(), 1u);
  const auto& u = ast.units[0];
  ASSERT_EQ(u.select.items.size(), 1u);
  ASSERT_TRUE(u.where.has_value());
  EXPECT_EQ(u.where->kind, Predicate::Kind::kAtom);
  ASSERT_TRUE(std::holds_alternative<Compare>(u.where->atom));
  const auto& cmp = std::get<Compare>(u.where->atom);
  EXPECT_EQ(cmp.op, CompareOp::kEq);
  EXPECT_EQ(std::get<Literal>(cmp.rhs).text, "JetBlue Airways");
  // one table in scope, so the column is attributed without a schema
  EXPECT_EQ(std::get<ColumnRef>(cmp.lhs).table, "AIRLINES");
}

TEST(Parser, StarProjection) {
  const auto ast = parse_sql("SELECT * FROM flight");
  ASSERT_EQ(ast.units.size(), 1u);
  ASSERT_EQ(ast.units[0].select.items.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<Star>(ast.units[0].select.items[0].expr));
  EXPECT_FALSE(ast.units[0].where.has_value());
}

TEST(Parser, RejectsConstructsOutsideDialect) {
  EXPECT_THROW(parse_sql("SELECT a FROM t CROSS APPLY f(t.x)"), ParseError);
  EXPECT_THROW(parse_sql("SELECT a FROM t WHERE"), ParseError);
  EXPECT_THROW(parse_sql("SELECT a FROM t WHERE a = 'open"), ParseError);
  EXPECT_THROW(parse_sql("DELETE FROM t"), ParseError);
  EXPECT_THROW(parse_sql("SELECT a FROM t; SELECT b FROM t"), ParseError);
}

TEST(Parser, ParseErrorCarriesOffset) {
  try {
    parse_sql("SELECT a FROM t WHERE a = = 3");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), "ParseError");
    EXPECT_GT(e.position(), 20u);
  }
}

TEST(Parser, AliasesResolveToTableNames) {
  const auto ast = parse_sql(testkit::kScenarioSql);
  ASSERT_EQ(ast.units.size(), 2u);
  // nested unit comes first
  const auto& inner = ast.units[0];
  ASSERT_EQ(inner.from.tables.size(), 2u);
  EXPECT_EQ(inner.from.tables[0], "flight");
  EXPECT_EQ(inner.from.tables[1], "travel");
  ASSERT_EQ(inner.from.joins.size(), 1u);
  EXPECT_EQ(inner.from.joins[0].left.table, "flight");
  EXPECT_EQ(ast.top_level_units(), std::vector<std::size_t>{1});
  EXPECT_EQ(ast.subquery_refs(1), std::vector<std::size_t>{0});
}

TEST(Parser, ResolvesAgainstSchemaAndCanonicalizesSpelling) {
  const auto ast = parse_sql("select PRICE from FLIGHT where Origin = 'x'", &flight_schema());
  const auto& col = std::get<ColumnRef>(ast.units[0].select.items[0].expr);
  EXPECT_EQ(col.table, "flight");
  EXPECT_EQ(col.column, "price");
}

TEST(Parser, UnknownColumnWithSchemaIsResolveError) {
  EXPECT_THROW(parse_sql("SELECT pricee FROM flight", &flight_schema()), ResolveError);
  EXPECT_THROW(parse_sql("SELECT price FROM flights", &flight_schema()), ResolveError);
}

TEST(Parser, SetOperatorsAndNesting) {
  const auto ast = parse_sql(
      "SELECT a FROM t WHERE b IN (SELECT b FROM u WHERE c > (SELECT MAX(c) FROM u)) UNION SELECT a FROM v "
      "EXCEPT SELECT a FROM w");
  EXPECT_EQ(ast.units.size(), 5u);
  EXPECT_EQ(ast.top_level_units().size(), 3u);
  ASSERT_EQ(ast.set_ops.size(), 2u);
  EXPECT_EQ(ast.set_ops[0], SetOperator::kUnion);
  EXPECT_EQ(ast.set_ops[1], SetOperator::kExcept);
}

TEST(Parser, LeadingKeyword) {
  EXPECT_EQ(leading_keyword("  select 1"), "SELECT");
  EXPECT_EQ(leading_keyword("DROP TABLE x"), "DROP");
  EXPECT_EQ(leading_keyword("(1)"), "");
}

TEST(Parser, ClauseFragment) {
  const auto f = parse_clause_fragment("ORDER BY x DESC LIMIT 3");
  EXPECT_EQ(f.kind, ClauseKind::kOrderLimit);
  ASSERT_EQ(f.body.order_by.size(), 1u);
  EXPECT_EQ(f.body.order_by[0].direction, SortDirection::kDesc);
  EXPECT_EQ(f.body.limit, 3);
  EXPECT_THROW(parse_clause_fragment("WHERE x IN (SELECT y FROM z)"), ParseError);
}

TEST(Printer, FlightMinCanonicalForm) {
  const auto ast = parse_sql(testkit::kFlightMinSql, &flight_schema());
  EXPECT_EQ(print_sql(ast),
            R"(SELECT MIN (flight.price) FROM flight WHERE flight.origin = "Los Angeles" AND flight.destination = "Honolulu")");
}

TEST(Printer, EmptyProjectionPrintsStar) {
  QueryAst ast;
  ast.units.emplace_back();
  ast.units[0].from.tables = {"t"};
  EXPECT_EQ(print_sql(ast), "SELECT * FROM t");
}

TEST(Printer, QuotesAwkwardIdentifiersAndLiterals) {
  const auto ast = parse_sql(R"(SELECT `order` FROM `my table` WHERE `order` = 'it''s "x"')");
  const std::string printed = print_sql(ast);
  EXPECT_EQ(printed, R"(SELECT `my table`.`order` FROM `my table` WHERE `my table`.`order` = "it's ""x""")");
  EXPECT_TRUE(structurally_equal(parse_sql(printed), ast));
}

TEST(Printer, OrUnderAndKeepsParentheses) {
  const auto ast = parse_sql("SELECT a FROM t WHERE (a = 1 OR b = 2) AND c = 3");
  const auto again = parse_sql(print_sql(ast));
  EXPECT_TRUE(structurally_equal(ast, again));
  EXPECT_NE(print_sql(ast).find("(t.a = 1 OR t.b = 2)"), std::string::npos);
}

TEST(Printer, CorpusDoubleRoundTripIsStructurallyStable) {
  for (const auto& task : testkit::corpus_tasks()) {
    const auto db = db::open_database(task.db_path);
    const auto schema = db->introspect();
    const auto first = parse_sql(task.query, &schema);
    const auto second = parse_sql(print_sql(first), &schema);
    const auto third = parse_sql(print_sql(second), &schema);
    EXPECT_TRUE(structurally_equal(first, second)) << task.name;
    EXPECT_TRUE(structurally_equal(second, third)) << task.name;
    EXPECT_EQ(print_sql(second), print_sql(third)) << task.name;
  }
}

TEST(Analysis, DecomposeOrders) {
  const auto scenario = parse_sql(testkit::kScenarioSql);
  const auto units = decompose(scenario);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(kinds_of(units[0]), (std::vector<ClauseKind>{ClauseKind::kJoin, ClauseKind::kWhere, ClauseKind::kGroupBy,
                                                         ClauseKind::kOrderLimit, ClauseKind::kSelect}));
  EXPECT_EQ(kinds_of(units[1]), (std::vector<ClauseKind>{ClauseKind::kFrom, ClauseKind::kWhere, ClauseKind::kGroupBy,
                                                         ClauseKind::kOrderLimit, ClauseKind::kSelect}));

  EXPECT_EQ(kinds_of(decompose(parse_sql("SELECT * FROM t"))[0]),
            (std::vector<ClauseKind>{ClauseKind::kFrom, ClauseKind::kSelect}));

  const auto owner = parse_sql(
      "SELECT T1.owner_id , T1.zip_code FROM Owners AS T1 JOIN Dogs AS T2 ON T1.owner_id = T2.owner_id JOIN "
      "Treatments AS T3 ON T2.dog_id = T3.dog_id GROUP BY T1.owner_id ORDER BY sum(T3.cost_of_treatment) DESC LIMIT 1");
  EXPECT_EQ(kinds_of(decompose(owner)[0]), (std::vector<ClauseKind>{ClauseKind::kJoin, ClauseKind::kGroupBy,
                                                                    ClauseKind::kOrderLimit, ClauseKind::kSelect}));
}

TEST(Analysis, DecomposeCompoundAddsConnector) {
  const auto ast = parse_sql("SELECT a FROM t UNION SELECT a FROM u");
  const auto units = decompose(ast);
  ASSERT_EQ(units.size(), 2u);
  EXPECT_EQ(kinds_of(units[1]).front(), ClauseKind::kSetOp);
}

TEST(Analysis, ValidateCorpusIsClean) {
  for (const auto& task : testkit::corpus_tasks()) {
    const auto db = db::open_database(task.db_path);
    const auto schema = db->introspect();
    const auto diags = validate(parse_sql(task.query), schema);
    EXPECT_TRUE(diags.empty()) << task.name << ": " << (diags.empty() ? "" : to_string(diags[0]));
  }
}

TEST(Analysis, ValidateReportsMisspelledColumnAtWhere) {
  const auto diags = validate(parse_sql("SELECT price FROM flight WHERE pricee > 10"), flight_schema());
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].code, "ResolveError");
  EXPECT_EQ(diags[0].clause, ClauseKind::kWhere);
}

TEST(Analysis, ValidateHavingWithoutGrouping) {
  const auto diags = validate(parse_sql("SELECT price FROM flight HAVING price > 10"), flight_schema());
  ASSERT_FALSE(diags.empty());
  EXPECT_EQ(diags[0].code, "InvariantViolation");
}

TEST(Analysis, ValidateCompoundArity) {
  const auto diags = validate(parse_sql("SELECT price, origin FROM flight UNION SELECT price FROM flight"),
                              flight_schema());
  ASSERT_FALSE(diags.empty());
  EXPECT_EQ(diags[0].code, "InvariantViolation");
}

TEST(Schema, IdentifierNormalForm) {
  EXPECT_EQ(normalize_identifier("  Airport_Code "), "airport code");
  EXPECT_EQ(normalize_identifier("a__b"), "a b");
  EXPECT_TRUE(same_identifier("AIRPORT CODE", "airport_code"));
  EXPECT_FALSE(same_identifier("airport", "airport_code"));
}

TEST(Schema, AffinityRules) {
  EXPECT_EQ(affinity_from_declared_type("INT"), Affinity::kInteger);
  EXPECT_EQ(affinity_from_declared_type("VARCHAR(20)"), Affinity::kText);
  EXPECT_EQ(affinity_from_declared_type("DOUBLE PRECISION"), Affinity::kReal);
  EXPECT_EQ(affinity_from_declared_type(""), Affinity::kBlob);
  EXPECT_EQ(affinity_from_declared_type("DECIMAL(10,2)"), Affinity::kNumeric);
}

TEST(Schema, JsonRoundTripAndChecks) {
  const auto schema = testkit::open_fixture("travel_flights").schema;
  EXPECT_TRUE(schema.check().empty());
  const auto back = schema_from_json(to_json(schema));
  EXPECT_EQ(to_json(back), to_json(schema));

  Schema bad = schema;
  bad.tables.push_back(bad.tables.front());
  EXPECT_FALSE(bad.check().empty());
}
