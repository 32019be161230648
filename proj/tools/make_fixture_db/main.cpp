// Builds a SQLite database file from a SQL script: make_fixture_db script.sql out.sqlite
#include <sqlite3.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixture_db <script.sql> <out.sqlite>\n";
    return 2;
  }
  std::ifstream in(argv[1]);
  if (!in) {
    std::cerr << "cannot read " << argv[1] << "\n";
    return 1;
  }
  std::stringstream script;
  script << in.rdbuf();

  const std::filesystem::path out = argv[2];
  std::filesystem::create_directories(out.parent_path());
  const auto tmp = std::filesystem::path(out).concat(".tmp");
  std::filesystem::remove(tmp);

  sqlite3* db = nullptr;
  if (sqlite3_open(tmp.c_str(), &db) != SQLITE_OK) {
    std::cerr << "cannot create " << tmp << ": " << sqlite3_errmsg(db) << "\n";
    sqlite3_close(db);
    return 1;
  }
  char* err = nullptr;
  if (sqlite3_exec(db, script.str().c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::cerr << argv[1] << ": " << (err != nullptr ? err : "error") << "\n";
    sqlite3_free(err);
    sqlite3_close(db);
    std::filesystem::remove(tmp);
    return 1;
  }
  sqlite3_close(db);
  std::filesystem::rename(tmp, out);
  return 0;
}
