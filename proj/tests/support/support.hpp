#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "groundsql/db/gateway.hpp"
#include "groundsql/db/result_table.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::testkit {

std::string corpus_dir();
std::string database_path(const std::string& name);
std::string config_path();
std::string mutated_config_path();
std::string read_text(const std::string& path);

struct CorpusTask {
  std::string name;
  std::string dir;
  std::string query;
  std::string question;
  std::string db_path;
  db::ResultTable expected;
  bool ordered = false;
};

std::vector<CorpusTask> corpus_tasks();

struct Fixture {
  std::shared_ptr<db::Database> db;
  sql::Schema schema;
};

Fixture open_fixture(const std::string& name);

/// The nested "most popular destination" query with the January-only bug.
inline constexpr const char* kScenarioSql =
    "SELECT airport_name FROM travel WHERE destination = (SELECT T2.destination FROM flight AS T1 JOIN travel AS T2 "
    "ON T1.flight_id = T2.flight_id WHERE T1.month = \"January\" GROUP BY T2.destination ORDER BY COUNT(*) DESC "
    "LIMIT 1) GROUP BY airport_code ORDER BY COUNT(*) DESC LIMIT 1";
inline constexpr const char* kScenarioQuestion =
    "Show me the airport which has the most flights to the most popular destination in the first quarter of 2022.";
/// Hand-written query the repaired scenario should agree with.
std::string scenario_oracle_sql();

inline constexpr const char* kFlightMinSql =
    "SELECT MIN(price) FROM flight WHERE origin = 'Los Angeles' AND destination = 'Honolulu'";

/// Builds a throwaway database file from a script; removed with the directory
/// returned by scratch_dir() at process exit.
std::string make_database(const std::string& name, const std::string& script);
std::string scratch_dir();

/// Plain exponential recursion; only for short strings.
std::size_t edit_distance_by_recursion(std::u32string_view a, std::u32string_view b);

}  // namespace groundsql::testkit
