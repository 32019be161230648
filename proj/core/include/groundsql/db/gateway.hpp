#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "groundsql/db/result_table.hpp"
#include "groundsql/error.hpp"
#include "groundsql/sql/schema.hpp"

struct sqlite3;

namespace groundsql::db {

class OpenError : public Error {
 public:
  OpenError(std::string path, const std::string& cause)
      : Error("OpenError", "cannot open " + path + ": " + cause), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ExecError : public Error {
 public:
  ExecError(std::string sql, const std::string& message, std::string kind = "ExecError")
      : Error(std::move(kind), message), sql_(std::move(sql)) {}
  const std::string& sql() const noexcept { return sql_; }

 private:
  std::string sql_;
};

class Timeout : public ExecError {
 public:
  Timeout(std::string sql, std::int64_t timeout_ms)
      : ExecError(std::move(sql), "query exceeded " + std::to_string(timeout_ms) + " ms", "Timeout") {}
};

class NonSelectRejected : public ExecError {
 public:
  NonSelectRejected(std::string sql, const std::string& why) : ExecError(std::move(sql), why, "NonSelectRejected") {}
};

class UnknownTable : public Error {
 public:
  explicit UnknownTable(const std::string& name) : Error("UnknownTable", "unknown table or column " + name) {}
};

struct BrowseFilter {
  std::string column;  // empty: match any column
  std::string substring;
};

/// A read-only connection. Statements on one handle are serialized.
class Database {
 public:
  ~Database();
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;

  const std::string& path() const noexcept { return path_; }

  sql::Schema introspect() const;

  /// Runs one SELECT statement. Anything else is rejected before it reaches
  /// the engine.
  ResultTable execute_readonly(const std::string& sql, const ExecLimits& limits) const;

  /// `page` is 1-based. Rows come in rowid order; `truncated` reports that
  /// later pages exist.
  ResultTable browse(const std::string& table, std::int64_t page, std::int64_t page_size,
                     const std::optional<BrowseFilter>& filter = std::nullopt) const;

 private:
  friend std::shared_ptr<Database> open_database(const std::string& path);
  Database(std::string path, sqlite3* handle) : path_(std::move(path)), handle_(handle) {}

  ResultTable run(const std::string& sql, const std::vector<std::string>& params, const ExecLimits& limits) const;

  std::string path_;
  sqlite3* handle_;
  mutable std::mutex mutex_;
};

/// Throws OpenError when the file is missing or is not a database.
std::shared_ptr<Database> open_database(const std::string& path);

}  // namespace groundsql::db
