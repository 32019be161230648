#include "groundsql/sql/schema.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace groundsql::sql {

std::string_view to_string(Affinity affinity) {
  switch (affinity) {
    case Affinity::kText: return "text";
    case Affinity::kInteger: return "integer";
    case Affinity::kReal: return "real";
    case Affinity::kBlob: return "blob";
    case Affinity::kNumeric: return "numeric";
  }
  return "numeric";
}

Affinity affinity_from_string(std::string_view name) {
  if (name == "text") return Affinity::kText;
  if (name == "integer") return Affinity::kInteger;
  if (name == "real") return Affinity::kReal;
  if (name == "blob") return Affinity::kBlob;
  return Affinity::kNumeric;
}

Affinity affinity_from_declared_type(std::string_view declared) {
  std::string upper;
  upper.reserve(declared.size());
  for (char c : declared) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  auto has = [&](std::string_view needle) { return upper.find(needle) != std::string::npos; };
  if (has("INT")) return Affinity::kInteger;
  if (has("CHAR") || has("CLOB") || has("TEXT")) return Affinity::kText;
  if (upper.empty() || has("BLOB")) return Affinity::kBlob;
  if (has("REAL") || has("FLOA") || has("DOUB")) return Affinity::kReal;
  return Affinity::kNumeric;
}

std::string normalize_identifier(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char raw : name) {
    char c = raw == '_' ? ' ' : raw;
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool same_identifier(std::string_view a, std::string_view b) {
  return normalize_identifier(a) == normalize_identifier(b);
}

const ColumnDef* TableDef::find_column(std::string_view column) const {
  const std::string key = normalize_identifier(column);
  for (const auto& c : columns) {
    if (normalize_identifier(c.name) == key) return &c;
  }
  return nullptr;
}

const TableDef* Schema::find_table(std::string_view table) const {
  const std::string key = normalize_identifier(table);
  for (const auto& t : tables) {
    if (normalize_identifier(t.name) == key) return &t;
  }
  return nullptr;
}

std::vector<std::string> Schema::check() const {
  std::vector<std::string> problems;
  std::set<std::string> table_names;
  for (const auto& t : tables) {
    if (!table_names.insert(normalize_identifier(t.name)).second) {
      problems.push_back("duplicate table " + t.name);
    }
    std::set<std::string> column_names;
    for (const auto& c : t.columns) {
      if (!column_names.insert(normalize_identifier(c.name)).second) {
        problems.push_back("duplicate column " + t.name + "." + c.name);
      }
    }
  }
  for (const auto& t : tables) {
    for (const auto& fk : t.foreign_keys) {
      if (t.find_column(fk.from_column) == nullptr) {
        problems.push_back("foreign key from unknown column " + t.name + "." + fk.from_column);
      }
      const TableDef* target = find_table(fk.to_table);
      if (target == nullptr || target->find_column(fk.to_column) == nullptr) {
        problems.push_back("foreign key " + t.name + "." + fk.from_column + " references unknown " +
                           fk.to_table + "." + fk.to_column);
      }
    }
  }
  return problems;
}

}  // namespace groundsql::sql
