#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundsql/sql/schema.hpp"

namespace groundsql::db {

struct Blob {
  std::string bytes;
};

using Value = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;

struct ResultColumn {
  std::string name;
  sql::Affinity affinity = sql::Affinity::kNumeric;
};

struct ResultTable {
  std::vector<ResultColumn> columns;
  std::vector<std::vector<Value>> rows;
  bool truncated = false;
  std::int64_t row_cap = 0;
  double elapsed_ms = 0.0;
};

struct ExecLimits {
  std::int64_t row_cap = 500;
  std::int64_t timeout_ms = 3000;
};

nlohmann::json to_json(const Value& value);
Value value_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ResultTable& table);
/// Accepts the same shape to_json produces; `row_cap` and `elapsed_ms` are optional.
ResultTable result_from_json(const nlohmann::json& j);

/// Numbers compare by value regardless of integer/real storage.
bool same_value(const Value& a, const Value& b);

/// Row-level equality: in order when `ordered`, otherwise as multisets.
/// Column names are not compared.
bool same_rows(const ResultTable& a, const ResultTable& b, bool ordered);

}  // namespace groundsql::db
