#include <benchmark/benchmark.h>

#include <string>

#include "groundsql/db/gateway.hpp"
#include "groundsql/explain/explainer.hpp"
#include "groundsql/link/linker.hpp"
#include "groundsql/link/similarity.hpp"
#include "groundsql/refine/backend.hpp"
#include "groundsql/refine/refiner.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/sql/printer.hpp"
#include "groundsql/stepwise/prefix.hpp"

using namespace groundsql;

namespace {

const char* kNested =
    "SELECT airport_name FROM travel WHERE destination = (SELECT T2.destination FROM flight AS T1 JOIN travel AS T2 "
    "ON T1.flight_id = T2.flight_id WHERE T1.month = 'January' GROUP BY T2.destination ORDER BY COUNT(*) DESC "
    "LIMIT 1) GROUP BY airport_code ORDER BY COUNT(*) DESC LIMIT 1";
const char* kFlat = "SELECT MIN(price) FROM flight WHERE origin = 'Los Angeles' AND destination = 'Honolulu'";

std::string db_path(const char* name) { return std::string(GROUNDSQL_BENCH_CORPUS_DIR) + "/databases/" + name + ".sqlite"; }

struct Loaded {
  std::shared_ptr<db::Database> db;
  sql::Schema schema;
  explain::ExplanationPlan plan;
};

const Loaded& travel() {
  static const Loaded l = [] {
    Loaded x;
    x.db = db::open_database(db_path("travel_flights"));
    x.schema = x.db->introspect();
    x.plan = explain::explain(sql::parse_sql(kNested, &x.schema), x.schema);
    return x;
  }();
  return l;
}

const Loaded& flights() {
  static const Loaded l = [] {
    Loaded x;
    x.db = db::open_database(db_path("flight_prices"));
    x.schema = x.db->introspect();
    x.plan = explain::explain(sql::parse_sql(kFlat, &x.schema), x.schema);
    return x;
  }();
  return l;
}

void BM_ParsePrint(benchmark::State& state) {
  const auto& t = travel();
  for (auto _ : state) {
    auto ast = sql::parse_sql(kNested, &t.schema);
    benchmark::DoNotOptimize(sql::print_sql(ast));
  }
}
BENCHMARK(BM_ParsePrint);

void BM_Explain(benchmark::State& state) {
  const auto& t = travel();
  const auto ast = sql::parse_sql(kNested, &t.schema);
  for (auto _ : state) benchmark::DoNotOptimize(explain::explain(ast, t.schema));
}
BENCHMARK(BM_Explain);

void BM_Similarity(benchmark::State& state) {
  std::string a(static_cast<std::size_t>(state.range(0)), 'a');
  std::string b = a;
  b.back() = 'b';
  for (auto _ : state) benchmark::DoNotOptimize(link::similarity(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Similarity)->RangeMultiplier(4)->Range(8, 512)->Complexity(benchmark::oNSquared);

void BM_RelinkStep(benchmark::State& state) {
  const auto& t = travel();
  const std::string text = "Keep the records where the destination is the result of the first query.";
  for (auto _ : state) benchmark::DoNotOptimize(link::relink_step(text, t.schema, t.plan, {1}));
}
BENCHMARK(BM_RelinkStep);

void BM_BuildLinks(benchmark::State& state) {
  const auto& t = travel();
  for (auto _ : state) benchmark::DoNotOptimize(link::build_links(t.plan, t.schema));
}
BENCHMARK(BM_BuildLinks);

void BM_PrefixExecution(benchmark::State& state) {
  const auto& f = flights();
  const auto step = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stepwise::intermediate_result(*f.db, f.plan, 0, step, {}));
}
BENCHMARK(BM_PrefixExecution)->DenseRange(1, 3);

void BM_ApplyEdits(benchmark::State& state) {
  const auto& t = travel();
  refine::RuleBackend rules;
  const std::vector<refine::EditOp> batch = {
      {refine::EditOp::Kind::kUpdate, 0, 2, "Keep the records where month is between January and March."},
      {refine::EditOp::Kind::kAdd, 0, 3, "Make sure the year in 2022."}};
  for (auto _ : state) benchmark::DoNotOptimize(refine::apply_edits(t.plan, batch, t.schema, rules));
}
BENCHMARK(BM_ApplyEdits);

}  // namespace

// The packaged benchmark_main archive carries LTO bytecode from another gcc.
BENCHMARK_MAIN();
