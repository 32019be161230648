#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace groundsql::sql {

enum class Affinity { kText, kInteger, kReal, kBlob, kNumeric };

std::string_view to_string(Affinity affinity);
Affinity affinity_from_string(std::string_view name);

/// SQLite's column-affinity rules applied to a declared type ("VARCHAR(20)",
/// "INT", ...). An empty declaration yields blob.
Affinity affinity_from_declared_type(std::string_view declared);

struct ColumnDef {
  std::string name;
  Affinity affinity = Affinity::kNumeric;
  bool is_primary_key = false;
};

struct ForeignKey {
  std::string from_column;
  std::string to_table;
  std::string to_column;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<ForeignKey> foreign_keys;

  const ColumnDef* find_column(std::string_view name) const;
};

struct Schema {
  std::vector<TableDef> tables;

  const TableDef* find_table(std::string_view name) const;

  /// Invariant violations (duplicate names, dangling foreign keys). Empty
  /// when the schema is well formed.
  std::vector<std::string> check() const;
};

/// Identifier normal form: ASCII-lowercased, '_' mapped to ' ', runs of
/// whitespace collapsed, trimmed. Two identifiers denote the same entity iff
/// their normal forms are equal.
std::string normalize_identifier(std::string_view name);

bool same_identifier(std::string_view a, std::string_view b);

/// {"tables": [{"name", "columns": [{"name", "affinity", "primary_key"}], "foreign_keys": [...]}]}
nlohmann::json to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& j);

}  // namespace groundsql::sql
