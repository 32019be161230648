#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "groundsql/db/gateway.hpp"
#include "groundsql/explain/explainer.hpp"
#include "groundsql/explain/grammar.hpp"
#include "groundsql/refine/refiner.hpp"
#include "groundsql/session/server.hpp"
#include "groundsql/sql/analysis.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/sql/printer.hpp"
#include "groundsql/stepwise/prefix.hpp"

namespace fs = std::filesystem;

namespace groundsql::cli {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

bool invalid_input(const Error& e) {
  return e.kind() == "ParseError" || e.kind() == "ResolveError" || e.kind() == "InvalidQuery" ||
         e.kind() == "UnsupportedConstruct";
}

}  // namespace

int cmd_explain(const ExplainOptions& options, std::ostream& out, std::ostream& err) {
  std::shared_ptr<db::Database> database;
  sql::Schema schema;
  std::string sql_text;
  try {
    database = db::open_database(options.db_path);
    schema = database->introspect();
    sql_text = options.query ? *options.query : read_file(options.sql_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  explain::ExplanationPlan plan;
  try {
    sql::QueryAst ast = sql::parse_sql(sql_text, &schema);
    auto diagnostics = sql::validate(ast, schema);
    if (!diagnostics.empty()) {
      for (const auto& d : diagnostics) err << "error: " << sql::to_string(d) << "\n";
      return kExitInvalidInput;
    }
    plan = explain::explain(ast, schema);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return invalid_input(e) ? kExitInvalidInput : kExitFailure;
  }

  nlohmann::json intermediate = nlohmann::json::array();
  std::map<std::pair<std::size_t, std::size_t>, std::string> counts;
  int status = kExitOk;
  if (options.intermediate) {
    for (const auto& b : plan.blocks) {
      for (const auto& s : b.steps) {
        nlohmann::json row = {{"unit", s.unit_index}, {"step", s.step_index}};
        try {
          auto r = stepwise::intermediate_result(*database, plan, s.unit_index, s.step_index);
          row["rows"] = r.result.rows.size();
          row["truncated"] = r.result.truncated;
          row["temp_sql"] = r.sql;
          const std::size_t n = r.result.rows.size();
          counts[{s.unit_index, s.step_index}] =
              std::to_string(n) + (r.result.truncated ? "+" : "") + (n == 1 && !r.result.truncated ? " row" : " rows");
        } catch (const Error& e) {
          row["error"] = e.what();
          counts[{s.unit_index, s.step_index}] = std::string("error: ") + e.what();
          status = kExitFailure;
        }
        intermediate.push_back(std::move(row));
      }
    }
  }

  if (options.json) {
    nlohmann::json j = explain::to_json(plan);
    if (options.intermediate) j["intermediate"] = intermediate;
    out << j.dump(2) << "\n";
    return status;
  }

  for (const auto& b : plan.blocks) {
    if (!b.header.empty()) out << b.header << "\n";
    for (const auto& s : b.steps) {
      out << "  " << s.step_index << ". " << s.text;
      if (options.intermediate) out << "  [" << counts[{s.unit_index, s.step_index}] << "]";
      out << "\n";
      if (options.steps) {
        const auto& unit = plan.source_ast.units[s.unit_index];
        std::string clause = s.clause_kind == sql::ClauseKind::kSetOp
                                 ? std::string("set operation")
                                 : sql::print_fragment(sql::extract_clause(unit, s.clause_kind), &plan.source_ast);
        out << "     " << sql::to_string(s.clause_kind) << ": " << clause << "\n";
      }
    }
  }
  return status;
}

namespace {

struct TaskReport {
  std::string name;
  std::string failure;  // empty when every check passed
};

TaskReport run_task(const fs::path& dir) {
  TaskReport report{dir.filename().string(), {}};
  auto fail = [&](const std::string& check, const std::string& detail) {
    if (report.failure.empty()) report.failure = check + ": " + detail;
  };
  try {
    const std::string query = read_file(dir / "query.sql");
    const fs::path db_path = (dir / trim(read_file(dir / "db"))).lexically_normal();
    const auto expected_json = nlohmann::json::parse(read_file(dir / "expected.json"));
    const db::ResultTable expected = db::result_from_json(expected_json);
    const bool ordered = expected_json.value("ordered", false);

    auto database = db::open_database(db_path.string());
    const sql::Schema schema = database->introspect();
    const sql::QueryAst ast = sql::parse_sql(query, &schema);
    if (auto d = sql::validate(ast, schema); !d.empty()) {
      fail("validate", sql::to_string(d.front()));
      return report;
    }
    const explain::ExplanationPlan plan = explain::explain(ast, schema);

    for (const auto& b : plan.blocks) {
      for (const auto& s : b.steps) {
        explain::GrammarContext ctx{&schema, plan.source_ast.units[s.unit_index].from.tables, s.unit_index};
        auto parsed = explain::parse_step_text(s.text, ctx, s.clause_kind);
        bool same = parsed.has_value();
        if (same && s.clause_kind == sql::ClauseKind::kSetOp) {
          auto pos = plan.source_ast.top_level_position(s.unit_index);
          same = pos && parsed->fragment.set_op == plan.source_ast.set_ops.at(*pos - 1);
        } else if (same) {
          same = sql::structurally_equal(parsed->fragment,
                                         sql::extract_clause(plan.source_ast.units[s.unit_index], s.clause_kind));
        }
        if (!same) fail("inverse-parse", "step " + std::to_string(s.step_index) + " \"" + s.text + "\"");
      }
    }

    refine::RefusingBackend refusing;
    const auto identity = refine::apply_edits(plan, {}, schema, refusing);
    if (!sql::structurally_equal(identity.ast, plan.source_ast)) fail("round-trip", "AST changed without edits");
    const std::string printed = sql::print_sql(identity.ast);
    if (!sql::structurally_equal(sql::parse_sql(printed, &schema), plan.source_ast)) {
      fail("round-trip", "printed SQL does not parse back to the same AST");
    }

    const db::ExecLimits generous{1'000'000, 30'000};
    const auto via_plan = database->execute_readonly(printed, generous);
    const auto direct = database->execute_readonly(query, generous);
    if (!db::same_rows(via_plan, expected, ordered)) fail("execute", "result differs from expected.json");
    if (!db::same_rows(via_plan, direct, ordered)) fail("execute", "result differs from the ground-truth query");
  } catch (const std::exception& e) {
    fail("error", e.what());
  }
  return report;
}

}  // namespace

int cmd_corpus(const std::string& corpus_dir, std::ostream& out, std::ostream& err) {
  fs::path root(corpus_dir);
  if (!fs::is_directory(root)) {
    err << "error: " << corpus_dir << " is not a directory\n";
    return kExitInvalidInput;
  }
  if (fs::is_directory(root / "tasks")) root /= "tasks";
  std::vector<fs::path> tasks;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "query.sql")) tasks.push_back(entry.path());
  }
  std::sort(tasks.begin(), tasks.end());
  if (tasks.empty()) err << "warning: no tasks under " << root.string() << "\n";

  const auto start = std::chrono::steady_clock::now();
  std::size_t passed = 0;
  for (const auto& t : tasks) {
    const TaskReport r = run_task(t);
    if (r.failure.empty()) {
      ++passed;
      out << "PASS " << r.name << "\n";
    } else {
      out << "FAIL " << r.name << " " << r.failure << "\n";
    }
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  out << passed << "/" << tasks.size() << " passed in " << ms.count() << " ms\n";
  return passed == tasks.size() ? kExitOk : kExitFailure;
}

std::string effective_config_path(const std::string& flag_value) {
  if (const char* env = std::getenv("SQLUCID_CONFIG"); env != nullptr && *env != '\0') return env;
  return flag_value;
}

int cmd_serve(const std::string& config_path, std::ostream& out, std::ostream& err,
              const std::function<void(session::ApiServer&)>& on_ready, std::optional<int> port_override) {
  std::unique_ptr<session::SessionManager> manager;
  session::Config config;
  try {
    if (config_path.empty()) throw session::ConfigError("no configuration given (--config or SQLUCID_CONFIG)");
    config = session::load_config(config_path);
    if (port_override) config.port = *port_override;
    manager = std::make_unique<session::SessionManager>(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  session::ApiServer server(*manager);
  if (!server.bind(config.host, config.port)) {
    err << "error: cannot bind " << config.host << ":" << config.port << "\n";
    return kExitBindFailed;
  }
  out << "listening on http://" << config.host << ":" << server.port() << "\n" << std::flush;
  if (on_ready) on_ready(server);
  server.run();
  return kExitOk;
}

}  // namespace groundsql::cli
