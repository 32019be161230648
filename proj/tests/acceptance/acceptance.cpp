// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "groundsql/explain/explainer.hpp"
#include "groundsql/link/linker.hpp"
#include "groundsql/link/similarity.hpp"
#include "groundsql/refine/backend.hpp"
#include "groundsql/refine/refiner.hpp"
#include "groundsql/sql/analysis.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/sql/printer.hpp"
#include "groundsql/stepwise/prefix.hpp"
#include "groundsql/util/utf8.hpp"
#include "support.hpp"

using namespace groundsql;
using sql::ClauseKind;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string normalized(const std::string& s) {
  std::string out;
  bool gap = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      gap = true;
      continue;
    }
    if (gap && !out.empty()) out.push_back(' ');
    gap = false;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

explain::ExplanationPlan explain_query(const sql::Schema& schema, const std::string& query) {
  return explain::explain(sql::parse_sql(query, &schema), schema);
}

const db::ExecLimits kWide{1000000, 30000};

struct LoadedTask {
  testkit::CorpusTask task;
  std::shared_ptr<db::Database> db;
  sql::Schema schema;
  explain::ExplanationPlan plan;
};

std::vector<LoadedTask> load_corpus() {
  std::vector<LoadedTask> out;
  for (auto& t : testkit::corpus_tasks()) {
    LoadedTask l;
    l.db = db::open_database(t.db_path);
    l.schema = l.db->introspect();
    l.plan = explain_query(l.schema, t.query);
    l.task = std::move(t);
    out.push_back(std::move(l));
  }
  return out;
}

Outcome prefix_fidelity() {
  const auto t0 = Clock::now();
  const auto f = testkit::open_fixture("flight_prices");
  const auto plan = explain_query(f.schema, testkit::kFlightMinSql);
  const std::string expected[] = {
      "SELECT * FROM flight",
      R"(SELECT * FROM flight WHERE flight.origin = "Los Angeles" AND flight.destination = "Honolulu")",
      R"(SELECT MIN (flight.price) FROM flight WHERE flight.origin = "Los Angeles" AND flight.destination = "Honolulu")"};
  int exact = 0;
  std::string mismatch;
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto got = sql::print_sql(stepwise::prefix_query(plan, 0, k).ast);
    if (normalized(got) == normalized(expected[k - 1])) {
      ++exact;
    } else if (mismatch.empty()) {
      mismatch = "; k=" + std::to_string(k) + " gave " + got;
    }
  }
  const double ms = ms_since(t0);
  return {exact == 3 && ms < 1000.0,
          std::to_string(exact) + "/3 exact in " + std::to_string(static_cast<int>(ms)) + " ms (limit 1000)" + mismatch};
}

Outcome scenario_fidelity() {
  const auto f = testkit::open_fixture("travel_flights");
  const auto plan = explain_query(f.schema, testkit::kScenarioSql);
  const std::vector<std::vector<ClauseKind>> kinds = {
      {ClauseKind::kJoin, ClauseKind::kWhere, ClauseKind::kGroupBy, ClauseKind::kOrderLimit, ClauseKind::kSelect},
      {ClauseKind::kFrom, ClauseKind::kWhere, ClauseKind::kGroupBy, ClauseKind::kOrderLimit, ClauseKind::kSelect}};
  const std::vector<std::vector<std::string>> texts = {
      {"Merge data in table flight and table travel.", "Keep the records where month is January.",
       "Split the data into groups based on the destination.",
       "Sort the groups based on the number of records in descending order, and return the first record.",
       "Return the destination."},
      {"In table travel.", "Keep the records where the destination is the result of the first query.",
       "Split the data into groups based on the airport code.",
       "Sort the groups based on the number of records in descending order, and return the first record.",
       "Return the airport name."}};
  if (plan.blocks.size() != 2) return {false, std::to_string(plan.blocks.size()) + " blocks"};
  int matching = 0;
  std::string first_bad;
  for (std::size_t b = 0; b < 2; ++b) {
    const auto& steps = plan.blocks[b].steps;
    if (steps.size() != 5) return {false, "block " + std::to_string(b) + " has " + std::to_string(steps.size()) + " steps"};
    for (std::size_t i = 0; i < 5; ++i) {
      if (steps[i].clause_kind == kinds[b][i] && steps[i].text == texts[b][i]) {
        ++matching;
      } else if (first_bad.empty()) {
        first_bad = "; got \"" + steps[i].text + "\"";
      }
    }
  }
  bool span = false;
  for (const auto& s : plan.blocks[1].steps[1].spans) {
    if (auto* r = std::get_if<explain::SubqueryResultTarget>(&s.target); r && r->unit_index == 0) span = true;
  }
  return {matching == 10 && span, std::to_string(matching) + "/10 steps verbatim with expected kinds, subquery span " +
                                      (span ? "present" : "missing") + first_bad};
}

Outcome corpus_round_trip(const std::vector<LoadedTask>& corpus) {
  const auto t0 = Clock::now();
  refine::RefusingBackend none;
  int ok = 0;
  std::string failed;
  for (const auto& l : corpus) {
    try {
      const auto out = refine::apply_edits(l.plan, {}, l.schema, none);
      const auto via_plan = l.db->execute_readonly(sql::print_sql(out.ast), kWide);
      const auto direct = l.db->execute_readonly(l.task.query, kWide);
      if (db::same_rows(via_plan, direct, l.task.ordered) && !via_plan.truncated) {
        ++ok;
        continue;
      }
    } catch (const std::exception& e) {
      failed += " " + l.task.name + "(" + e.what() + ")";
      continue;
    }
    failed += " " + l.task.name;
  }
  const double ms = ms_since(t0);
  const int total = static_cast<int>(corpus.size());
  return {ok == total && total == 12 && ms < 30000.0,
          std::to_string(ok) + "/" + std::to_string(total) + " identical in " + std::to_string(static_cast<int>(ms)) +
              " ms (limit 30000)" + (failed.empty() ? "" : "; failed:" + failed)};
}

Outcome inverse_closure(const std::vector<LoadedTask>& corpus) {
  refine::RefusingBackend none;
  int total = 0, ok = 0;
  std::string first_bad;
  for (const auto& l : corpus) {
    for (const auto& block : l.plan.blocks) {
      const auto& unit = l.plan.source_ast.units[block.unit_index];
      refine::StepParseContext ctx;
      ctx.schema = &l.schema;
      ctx.scope_tables = unit.from.tables;
      ctx.unit_index = block.unit_index;
      for (const auto& step : block.steps) {
        ++total;
        try {
          const auto parsed = refine::parse_step(step.text, ctx, step.clause_kind, none);
          if (parsed.confidence == refine::Confidence::kExact &&
              sql::structurally_equal(parsed.fragment, sql::extract_clause(unit, step.clause_kind))) {
            ++ok;
            continue;
          }
        } catch (const Error&) {
        }
        if (first_bad.empty()) first_bad = "; first failure: " + l.task.name + " \"" + step.text + "\"";
      }
    }
  }
  return {ok == total && total > 0, std::to_string(ok) + "/" + std::to_string(total) + " steps exact" + first_bad};
}

bool contains_atom(const sql::Predicate& p, const std::function<bool(const sql::Atom&)>& test) {
  if (p.kind == sql::Predicate::Kind::kAtom) return test(p.atom);
  if (p.kind != sql::Predicate::Kind::kAnd) return false;  // conjuncts only
  for (const auto& c : p.children) {
    if (contains_atom(c, test)) return true;
  }
  return false;
}

Outcome edit_scenario() {
  const auto f = testkit::open_fixture("travel_flights");
  const auto plan = explain_query(f.schema, testkit::kScenarioSql);
  refine::RuleBackend rules;
  using refine::EditOp;
  const std::vector<EditOp> batch = {
      {EditOp::Kind::kUpdate, 0, 2, "Keep the records where month is between January and March."},
      {EditOp::Kind::kAdd, 0, 3, "Make sure the year in 2022."}};
  try {
    const auto out = refine::apply_edits(plan, batch, f.schema, rules);
    const auto& where = out.ast.units[0].where;
    const bool between = where && contains_atom(*where, [](const sql::Atom& a) {
                           return std::holds_alternative<sql::Between>(a);
                         });
    const bool year = where && contains_atom(*where, [](const sql::Atom& a) {
                        auto* c = std::get_if<sql::Compare>(&a);
                        if (!c || c->op != sql::CompareOp::kEq) return false;
                        auto* col = std::get_if<sql::ColumnRef>(&c->lhs);
                        auto* lit = std::get_if<sql::Literal>(&c->rhs);
                        return col && lit && col->column == "year" && lit->text == "2022";
                      });
    const auto got = f.db->execute_readonly(sql::print_sql(out.ast), kWide);
    const auto oracle = f.db->execute_readonly(testkit::scenario_oracle_sql(), kWide);
    const bool same = db::same_rows(got, oracle, true);
    return {between && year && same, std::string("BETWEEN ") + (between ? "yes" : "no") + ", year = 2022 " +
                                         (year ? "yes" : "no") + ", result " + (same ? "matches" : "differs from") +
                                         " oracle; WHERE " + (where ? sql::print_predicate(*where) : "<none>")};
  } catch (const std::exception& e) {
    return {false, std::string("edit failed: ") + e.what()};
  }
}

Outcome linking(const std::vector<LoadedTask>& corpus) {
  int steps = 0, identical = 0;
  long offsets = 0, offsets_ok = 0;
  for (const auto& l : corpus) {
    const auto links = link::build_links(l.plan, l.schema);
    for (const auto& block : l.plan.blocks) {
      for (const auto& step : block.steps) {
        ++steps;
        const auto spans = link::relink_step(step.text, l.schema, l.plan, {block.unit_index, link::kDefaultMinSimilarity});
        bool same = spans.size() == step.spans.size();
        for (std::size_t i = 0; same && i < spans.size(); ++i) {
          same = spans[i].start == step.spans[i].start && spans[i].end == step.spans[i].end &&
                 explain::same_target(spans[i].target, step.spans[i].target);
        }
        identical += same;
        const std::size_t n = util::codepoint_count(step.text);
        for (std::size_t off = 0; off <= n; ++off) {
          const explain::EntitySpan* owner = nullptr;
          for (const auto& sp : step.spans) {
            if (sp.start <= off && off < sp.end) owner = &sp;
          }
          const auto got = link::resolve_hover(links, {block.unit_index, step.step_index}, off);
          const auto want = owner ? link::highlight_of(owner->target) : std::nullopt;
          ++offsets;
          offsets_ok += got == want;
        }
      }
    }
  }
  const std::size_t oracle = testkit::edit_distance_by_recursion(U"airport cod", U"airport code");
  const double expected = 1.0 - 1.0 / 12.0;
  const double sim = link::similarity("airport cod", "airport_code");
  const double oracle_sim = 1.0 - static_cast<double>(oracle) / 12.0;
  const bool sim_ok = std::fabs(sim - expected) <= 1e-9 && std::fabs(oracle_sim - expected) <= 1e-9 &&
                      link::levenshtein("airport cod", "airport code") == oracle;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", sim);
  return {identical == steps && offsets_ok == offsets && sim_ok,
          "relink " + std::to_string(identical) + "/" + std::to_string(steps) + " steps, hover " +
              std::to_string(offsets_ok) + "/" + std::to_string(offsets) + " offsets, sim(airport cod) = " + buf +
              (sim_ok ? " (matches oracle)" : " (oracle mismatch)")};
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome safety(const std::vector<LoadedTask>& corpus) {
  std::map<fs::path, std::string> before;
  for (const auto& e : fs::directory_iterator(testkit::corpus_dir() + "/databases")) before[e.path()] = file_bytes(e.path());

  int prefixes = 0, prefix_ok = 0, monotone_checks = 0, monotone_ok = 0;
  std::string first_bad;
  auto walk = [&](const std::string& name, const db::Database& db, const explain::ExplanationPlan& plan) {
    for (const auto& block : plan.blocks) {
      std::optional<std::size_t> from_rows;
      for (const auto& step : block.steps) {
        ++prefixes;
        try {
          const auto r = stepwise::intermediate_result(db, plan, block.unit_index, step.step_index, kWide);
          ++prefix_ok;
          if (step.clause_kind == ClauseKind::kFrom || step.clause_kind == ClauseKind::kJoin) {
            from_rows = r.result.rows.size();
          } else if (step.clause_kind == ClauseKind::kWhere && from_rows) {
            ++monotone_checks;
            monotone_ok += r.result.rows.size() <= *from_rows;
          }
        } catch (const std::exception& e) {
          if (first_bad.empty()) first_bad = "; " + name + ": " + e.what();
        }
      }
    }
  };
  for (const auto& l : corpus) walk(l.task.name, *l.db, l.plan);
  for (const auto& [db_name, query] : {std::pair<std::string, std::string>{"flight_prices", testkit::kFlightMinSql},
                                       {"travel_flights", testkit::kScenarioSql},
                                       {"travel_flights", testkit::scenario_oracle_sql()}}) {
    const auto f = testkit::open_fixture(db_name);
    walk(db_name, *f.db, explain_query(f.schema, query));
    // writes must bounce off the gateway
    try {
      f.db->execute_readonly("DELETE FROM flight", {});
    } catch (const db::NonSelectRejected&) {
    }
  }

  int unchanged = 0;
  for (const auto& [path, bytes] : before) unchanged += file_bytes(path) == bytes;
  const bool ok = unchanged == static_cast<int>(before.size()) && prefix_ok == prefixes &&
                  monotone_ok == monotone_checks && monotone_checks > 0;
  return {ok, std::to_string(unchanged) + "/" + std::to_string(before.size()) + " database files byte-identical, " +
                  std::to_string(prefix_ok) + "/" + std::to_string(prefixes) + " prefixes executed, " +
                  std::to_string(monotone_ok) + "/" + std::to_string(monotone_checks) + " WHERE <= FROM row counts" +
                  first_bad};
}

Outcome history() {
  const auto f = testkit::open_fixture("flight_prices");
  const auto plan = explain_query(f.schema, testkit::kFlightMinSql);
  refine::RuleBackend rules;
  using refine::EditOp;
  const std::vector<std::string> texts = {
      "Keep the records where price is less than 100.", "Keep the records where origin is Chicago.",
      "Return the largest price.", "Return the origin.", "Return the number of records.",
      "Sort the records based on the price in descending order.", "Make sure the destination is Boston.",
      "Split the data into groups based on the origin.", "asdf qwer.", " "};
  std::mt19937 rng(1234);
  int cases = 0, violations = 0;
  long undo_redo = 0, truncations = 0, rejections = 0;
  auto check = [&](bool ok) { violations += !ok; };
  for (; cases < 1000; ++cases) {
    refine::History h(plan);
    std::vector<std::string> model{h.current().digest};
    std::size_t cursor = 0;
    for (int step = 0; step < 10; ++step) {
      const int action = std::uniform_int_distribution<int>(0, 4)(rng);
      try {
        if (action == 0) {
          if (cursor == 0) continue;
          const auto before = h.current().digest;
          h.undo();
          check(h.current().digest == model[--cursor]);
          h.redo();
          check(h.current().digest == before);
          h.undo();
          ++undo_redo;
        } else if (action == 1) {
          if (cursor + 1 >= model.size()) continue;
          check(h.redo().digest == model[++cursor]);
        } else {
          const auto& current = h.current().plan;
          EditOp op;
          op.kind = static_cast<EditOp::Kind>(std::uniform_int_distribution<int>(0, 2)(rng));
          op.unit_index = 0;
          op.step_index = std::uniform_int_distribution<std::size_t>(1, current.blocks[0].steps.size() + 1)(rng);
          op.new_text = texts[std::uniform_int_distribution<std::size_t>(0, texts.size() - 1)(rng)];
          const auto before = h.current().digest;
          const bool had_redo = h.can_redo();
          try {
            auto out = refine::apply_edits(current, {op}, f.schema, rules);
            h.push(out.plan);
            model.resize(cursor + 1);
            model.push_back(h.current().digest);
            ++cursor;
            check(!h.can_redo());
            truncations += had_redo;
          } catch (const Error&) {
            check(h.current().digest == before);
            ++rejections;
          }
        }
      } catch (const std::exception&) {
        ++violations;
      }
      check(h.cursor() == cursor && h.size() == model.size() && h.current().digest == model[cursor]);
    }
  }
  const bool ok = violations == 0 && cases >= 1000 && undo_redo > 0 && truncations > 0 && rejections > 0;
  return {ok, std::to_string(cases) + " random cases, " + std::to_string(violations) + " violations (" +
                  std::to_string(undo_redo) + " undo/redo, " + std::to_string(truncations) + " truncations, " +
                  std::to_string(rejections) + " rejected batches)"};
}

}  // namespace

int main() {
  std::vector<LoadedTask> corpus;
  try {
    corpus = load_corpus();
  } catch (const std::exception& e) {
    std::printf("FAIL corpus load: %s\n", e.what());
    return 1;
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"prefix-fidelity", prefix_fidelity},
      {"scenario-fidelity", scenario_fidelity},
      {"corpus-round-trip", [&] { return corpus_round_trip(corpus); }},
      {"inverse-parse-closure", [&] { return inverse_closure(corpus); }},
      {"edit-scenario", edit_scenario},
      {"linking", [&] { return linking(corpus); }},
      {"safety", [&] { return safety(corpus); }},
      {"history", history},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
