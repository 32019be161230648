#include <nlohmann/json.hpp>

#include "groundsql/sql/schema.hpp"

namespace groundsql::sql {

nlohmann::json to_json(const Schema& schema) {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : schema.tables) {
    nlohmann::json columns = nlohmann::json::array();
    for (const auto& c : t.columns) {
      columns.push_back({{"name", c.name}, {"affinity", to_string(c.affinity)}, {"primary_key", c.is_primary_key}});
    }
    nlohmann::json fks = nlohmann::json::array();
    for (const auto& fk : t.foreign_keys) {
      fks.push_back({{"from_column", fk.from_column}, {"to_table", fk.to_table}, {"to_column", fk.to_column}});
    }
    tables.push_back({{"name", t.name}, {"columns", columns}, {"foreign_keys", fks}});
  }
  return {{"tables", tables}};
}

Schema schema_from_json(const nlohmann::json& j) {
  Schema schema;
  for (const auto& jt : j.at("tables")) {
    TableDef t;
    t.name = jt.at("name").get<std::string>();
    for (const auto& jc : jt.at("columns")) {
      ColumnDef c;
      c.name = jc.at("name").get<std::string>();
      c.affinity = affinity_from_string(jc.value("affinity", "numeric"));
      c.is_primary_key = jc.value("primary_key", false);
      t.columns.push_back(std::move(c));
    }
    if (jt.contains("foreign_keys")) {
      for (const auto& jf : jt["foreign_keys"]) {
        t.foreign_keys.push_back({jf.at("from_column").get<std::string>(), jf.at("to_table").get<std::string>(),
                                  jf.at("to_column").get<std::string>()});
      }
    }
    schema.tables.push_back(std::move(t));
  }
  return schema;
}

}  // namespace groundsql::sql
