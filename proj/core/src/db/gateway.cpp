#include "groundsql/db/gateway.hpp"

#include <sqlite3.h>

#include <cctype>
#include <chrono>
#include <filesystem>

#include "groundsql/sql/parser.hpp"

namespace groundsql::db {

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
  Clock::time_point until;
  bool expired = false;
};

int progress_check(void* arg) {
  auto* d = static_cast<Deadline*>(arg);
  if (Clock::now() >= d->until) {
    d->expired = true;
    return 1;
  }
  return 0;
}

std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

class Statement {
 public:
  Statement(sqlite3* db, const std::string& sql, const char** tail = nullptr) {
    rc_ = sqlite3_prepare_v2(db, sql.c_str(), static_cast<int>(sql.size()), &stmt_, tail);
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  sqlite3_stmt* get() const { return stmt_; }
  int rc() const { return rc_; }

 private:
  sqlite3_stmt* stmt_ = nullptr;
  int rc_ = SQLITE_OK;
};

std::string column_text(sqlite3_stmt* stmt, int i) {
  const auto* p = sqlite3_column_text(stmt, i);
  return p == nullptr ? std::string() : std::string(reinterpret_cast<const char*>(p));
}

Value read_value(sqlite3_stmt* stmt, int i) {
  switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, i));
    case SQLITE_FLOAT: return sqlite3_column_double(stmt, i);
    case SQLITE_TEXT: return column_text(stmt, i);
    case SQLITE_BLOB: {
      const auto* p = static_cast<const char*>(sqlite3_column_blob(stmt, i));
      return Blob{std::string(p, p + sqlite3_column_bytes(stmt, i))};
    }
    default: return std::monostate{};
  }
}

sql::Affinity affinity_of_value(const Value& v) {
  if (std::holds_alternative<std::int64_t>(v)) return sql::Affinity::kInteger;
  if (std::holds_alternative<double>(v)) return sql::Affinity::kReal;
  if (std::holds_alternative<std::string>(v)) return sql::Affinity::kText;
  if (std::holds_alternative<Blob>(v)) return sql::Affinity::kBlob;
  return sql::Affinity::kNumeric;
}

}  // namespace

Database::~Database() { sqlite3_close_v2(handle_); }

std::shared_ptr<Database> open_database(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw OpenError(path, "no such file");
  sqlite3* handle = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &handle, SQLITE_OPEN_READONLY | SQLITE_OPEN_FULLMUTEX, nullptr);
  if (rc != SQLITE_OK) {
    std::string cause = handle != nullptr ? sqlite3_errmsg(handle) : sqlite3_errstr(rc);
    sqlite3_close_v2(handle);
    throw OpenError(path, cause);
  }
  // Opening is lazy; touch the catalog so a non-database file fails here.
  char* err = nullptr;
  if (sqlite3_exec(handle, "PRAGMA query_only = 1; SELECT count(*) FROM sqlite_master;", nullptr, nullptr, &err) !=
      SQLITE_OK) {
    std::string cause = err != nullptr ? err : "unreadable database";
    sqlite3_free(err);
    sqlite3_close_v2(handle);
    throw OpenError(path, cause);
  }
  return std::shared_ptr<Database>(new Database(path, handle));
}

sql::Schema Database::introspect() const {
  std::lock_guard lock(mutex_);
  sql::Schema schema;
  {
    Statement tables(handle_,
                     "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
    while (sqlite3_step(tables.get()) == SQLITE_ROW) schema.tables.push_back({column_text(tables.get(), 0), {}, {}});
  }
  for (auto& t : schema.tables) {
    Statement info(handle_, "PRAGMA table_info(" + quote_identifier(t.name) + ")");
    while (sqlite3_step(info.get()) == SQLITE_ROW) {
      sql::ColumnDef c;
      c.name = column_text(info.get(), 1);
      c.affinity = sql::affinity_from_declared_type(column_text(info.get(), 2));
      c.is_primary_key = sqlite3_column_int(info.get(), 5) > 0;
      t.columns.push_back(std::move(c));
    }
  }
  for (auto& t : schema.tables) {
    Statement fks(handle_, "PRAGMA foreign_key_list(" + quote_identifier(t.name) + ")");
    while (sqlite3_step(fks.get()) == SQLITE_ROW) {
      sql::ForeignKey fk;
      fk.to_table = column_text(fks.get(), 2);
      fk.from_column = column_text(fks.get(), 3);
      fk.to_column = column_text(fks.get(), 4);
      const sql::TableDef* target = schema.find_table(fk.to_table);
      if (target == nullptr) continue;  // dangling reference in the file; not linkable
      fk.to_table = target->name;
      if (fk.to_column.empty()) {
        for (const auto& c : target->columns) {
          if (c.is_primary_key) fk.to_column = c.name;
        }
      }
      const sql::ColumnDef* to = target->find_column(fk.to_column);
      if (to == nullptr) continue;
      fk.to_column = to->name;
      t.foreign_keys.push_back(std::move(fk));
    }
  }
  return schema;
}

ResultTable Database::execute_readonly(const std::string& sql, const ExecLimits& limits) const {
  if (sql::leading_keyword(sql) != "SELECT") throw NonSelectRejected(sql, "only SELECT statements may run");
  return run(sql, {}, limits);
}

ResultTable Database::run(const std::string& sql, const std::vector<std::string>& params,
                          const ExecLimits& limits) const {
  std::lock_guard lock(mutex_);
  const auto start = Clock::now();
  const char* tail = nullptr;
  Statement stmt(handle_, sql, &tail);
  if (stmt.rc() != SQLITE_OK) throw ExecError(sql, sqlite3_errmsg(handle_));
  if (stmt.get() == nullptr) throw NonSelectRejected(sql, "empty statement");
  for (const char* p = tail; p != nullptr && *p != '\0'; ++p) {
    if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';') {
      throw NonSelectRejected(sql, "multiple statements are not allowed");
    }
  }
  if (sqlite3_stmt_readonly(stmt.get()) == 0) throw NonSelectRejected(sql, "statement would modify the database");
  for (std::size_t i = 0; i < params.size(); ++i) {
    sqlite3_bind_text(stmt.get(), static_cast<int>(i + 1), params[i].c_str(), -1, SQLITE_TRANSIENT);
  }

  Deadline deadline{start + std::chrono::milliseconds(limits.timeout_ms)};
  sqlite3_progress_handler(handle_, 1000, progress_check, &deadline);
  struct ClearHandler {
    sqlite3* db;
    ~ClearHandler() { sqlite3_progress_handler(db, 0, nullptr, nullptr); }
  } clear{handle_};

  ResultTable result;
  result.row_cap = limits.row_cap;
  const int ncol = sqlite3_column_count(stmt.get());
  for (int i = 0; i < ncol; ++i) {
    const char* decl = sqlite3_column_decltype(stmt.get(), i);
    ResultColumn col;
    col.name = sqlite3_column_name(stmt.get(), i);
    col.affinity = decl != nullptr ? sql::affinity_from_declared_type(decl) : sql::Affinity::kNumeric;
    result.columns.push_back(std::move(col));
  }
  std::vector<bool> typed(static_cast<std::size_t>(ncol), false);
  for (int i = 0; i < ncol; ++i) typed[i] = sqlite3_column_decltype(stmt.get(), i) != nullptr;

  while (true) {
    const int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) {
      if (deadline.expired || rc == SQLITE_INTERRUPT) throw Timeout(sql, limits.timeout_ms);
      throw ExecError(sql, sqlite3_errmsg(handle_));
    }
    if (static_cast<std::int64_t>(result.rows.size()) >= limits.row_cap) {
      result.truncated = true;
      break;
    }
    std::vector<Value> row;
    row.reserve(static_cast<std::size_t>(ncol));
    for (int i = 0; i < ncol; ++i) {
      row.push_back(read_value(stmt.get(), i));
      if (!typed[i] && !std::holds_alternative<std::monostate>(row.back())) {
        result.columns[i].affinity = affinity_of_value(row.back());
        typed[i] = true;
      }
    }
    result.rows.push_back(std::move(row));
  }
  result.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return result;
}

ResultTable Database::browse(const std::string& table, std::int64_t page, std::int64_t page_size,
                             const std::optional<BrowseFilter>& filter) const {
  const sql::Schema schema = introspect();
  const sql::TableDef* def = schema.find_table(table);
  if (def == nullptr) throw UnknownTable(table);
  if (page < 1) page = 1;
  if (page_size < 1) page_size = 1;

  std::string sql = "SELECT * FROM " + quote_identifier(def->name);
  std::vector<std::string> params;
  if (filter && !filter->substring.empty()) {
    std::vector<const sql::ColumnDef*> targets;
    if (filter->column.empty()) {
      for (const auto& c : def->columns) targets.push_back(&c);
    } else {
      const sql::ColumnDef* c = def->find_column(filter->column);
      if (c == nullptr) throw UnknownTable(def->name + "." + filter->column);
      targets.push_back(c);
    }
    sql += " WHERE ";
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (i > 0) sql += " OR ";
      sql += "instr(lower(CAST(" + quote_identifier(targets[i]->name) + " AS TEXT)), lower(?1)) > 0";
    }
    params.push_back(filter->substring);
  }
  // One extra row tells us whether a later page exists; the cap trims it.
  const std::string window =
      " LIMIT " + std::to_string(page_size + 1) + " OFFSET " + std::to_string((page - 1) * page_size);
  ExecLimits limits;
  limits.row_cap = page_size;
  try {
    return run(sql + " ORDER BY rowid" + window, params, limits);
  } catch (const ExecError&) {
    // WITHOUT ROWID tables: fall back to primary-key order.
    return run(sql + " ORDER BY 1" + window, params, limits);
  }
}

}  // namespace groundsql::db
