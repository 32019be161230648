#include "support.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace groundsql::testkit {

std::string corpus_dir() { return GROUNDSQL_TEST_CORPUS_DIR; }
std::string database_path(const std::string& name) { return corpus_dir() + "/databases/" + name + ".sqlite"; }
std::string config_path() { return GROUNDSQL_TEST_CONFIG; }
std::string mutated_config_path() { return GROUNDSQL_TEST_MUTATED_CONFIG; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

std::vector<CorpusTask> corpus_tasks() {
  std::vector<CorpusTask> tasks;
  for (const auto& entry : fs::directory_iterator(corpus_dir() + "/tasks")) {
    if (!entry.is_directory()) continue;
    CorpusTask t;
    t.name = entry.path().filename().string();
    t.dir = entry.path().string();
    t.query = read_text(t.dir + "/query.sql");
    t.question = read_text(t.dir + "/question.txt");
    t.db_path = (entry.path() / read_text(t.dir + "/db")).lexically_normal().string();
    const auto j = nlohmann::json::parse(read_text(t.dir + "/expected.json"));
    t.expected = db::result_from_json(j);
    t.ordered = j.value("ordered", false);
    tasks.push_back(std::move(t));
  }
  std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return tasks;
}

Fixture open_fixture(const std::string& name) {
  Fixture f;
  f.db = db::open_database(database_path(name));
  f.schema = f.db->introspect();
  return f;
}

std::string scenario_oracle_sql() { return read_text(corpus_dir() + "/scenarios/travel_flights_corrected.sql"); }

std::string scratch_dir() {
  static const std::string dir = [] {
    std::string pattern = (fs::temp_directory_path() / "groundsql-test-XXXXXX").string();
    if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    std::atexit([] {
      std::error_code ec;
      fs::remove_all(scratch_dir(), ec);
    });
    return pattern;
  }();
  return dir;
}

std::string make_database(const std::string& name, const std::string& script) {
  const std::string path = scratch_dir() + "/" + name + ".sqlite";
  fs::remove(path);
  sqlite3* db = nullptr;
  if (sqlite3_open(path.c_str(), &db) != SQLITE_OK) throw std::runtime_error("cannot create " + path);
  char* msg = nullptr;
  const int rc = sqlite3_exec(db, script.c_str(), nullptr, nullptr, &msg);
  std::string error = msg ? msg : "";
  sqlite3_free(msg);
  sqlite3_close(db);
  if (rc != SQLITE_OK) throw std::runtime_error("script failed: " + error);
  return path;
}

std::size_t edit_distance_by_recursion(std::u32string_view a, std::u32string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t cost = a.back() == b.back() ? 0 : 1;
  return std::min({edit_distance_by_recursion(a.substr(0, a.size() - 1), b) + 1,
                   edit_distance_by_recursion(a, b.substr(0, b.size() - 1)) + 1,
                   edit_distance_by_recursion(a.substr(0, a.size() - 1), b.substr(0, b.size() - 1)) + cost});
}

}  // namespace groundsql::testkit
