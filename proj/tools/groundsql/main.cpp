#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "groundsql/session/server.hpp"

namespace {
groundsql::session::ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-by-step explanations of SQL queries, with editing and an HTTP service"};
  app.require_subcommand(1);

  groundsql::cli::ExplainOptions explain;
  std::string query;
  auto* ex = app.add_subcommand("explain", "Explain a query against a database");
  ex->add_option("db", explain.db_path, "Database file")->required();
  ex->add_option("sql", explain.sql_path, "File with the SQL query");
  auto* query_opt = ex->add_option("--query,-q", query, "SQL text instead of a file");
  auto* json_flag = ex->add_flag("--json", explain.json, "Print the plan as JSON");
  ex->add_flag("--text", "Print the plan as text (default)")->excludes(json_flag);
  ex->add_flag("--steps", explain.steps, "Show the clause behind each step");
  ex->add_flag("--intermediate", explain.intermediate, "Run each step's prefix query and show its row count");

  std::string corpus_dir;
  auto* corpus = app.add_subcommand("corpus", "Run the explain/round-trip/execute checks over a corpus");
  corpus->add_option("dir", corpus_dir, "Corpus directory")->required();

  std::string config_path;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--config,-c", config_path, "JSON configuration (SQLUCID_CONFIG overrides)");
  serve->add_option("--port,-p", port, "Port override; 0 picks a free one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : groundsql::cli::kExitInvalidInput;
  }

  if (*ex) {
    if (*query_opt) {
      explain.query = query;
    } else if (explain.sql_path.empty()) {
      std::cerr << "error: give a SQL file or --query\n";
      return groundsql::cli::kExitInvalidInput;
    }
    return groundsql::cli::cmd_explain(explain, std::cout, std::cerr);
  }
  if (*corpus) return groundsql::cli::cmd_corpus(corpus_dir, std::cout, std::cerr);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return groundsql::cli::cmd_serve(
      groundsql::cli::effective_config_path(config_path), std::cout, std::cerr,
      [](groundsql::session::ApiServer& s) { g_server = &s; },
      port >= 0 ? std::optional<int>(port) : std::nullopt);
}
