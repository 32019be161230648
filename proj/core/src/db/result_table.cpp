#include "groundsql/db/result_table.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

namespace groundsql::db {

using nlohmann::json;

namespace {

std::string to_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xF]);
  }
  return out;
}

std::string from_hex(const std::string& hex) {
  std::string out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) out.push_back(static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  return out;
}

// Total order used to sort rows before multiset comparison. Numbers sort
// together by value so 1 and 1.0 land next to each other.
int rank(const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) return 0;
  if (std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v)) return 1;
  if (std::holds_alternative<std::string>(v)) return 2;
  return 3;
}

double numeric(const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

bool value_less(const Value& a, const Value& b) {
  if (rank(a) != rank(b)) return rank(a) < rank(b);
  switch (rank(a)) {
    case 1: return numeric(a) < numeric(b);
    case 2: return std::get<std::string>(a) < std::get<std::string>(b);
    case 3: return std::get<Blob>(a).bytes < std::get<Blob>(b).bytes;
    default: return false;
  }
}

bool row_less(const std::vector<Value>& a, const std::vector<Value>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
}

bool rows_equal(const std::vector<Value>& a, const std::vector<Value>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_value(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

json to_json(const Value& value) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, Blob>) {
          return {{"blob", to_hex(v.bytes)}};
        } else {
          return v;
        }
      },
      value);
}

Value value_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("blob")) return Blob{from_hex(j["blob"].get<std::string>())};
  if (j.is_boolean()) return static_cast<std::int64_t>(j.get<bool>() ? 1 : 0);
  return j.dump();
}

json to_json(const ResultTable& table) {
  json columns = json::array();
  for (const auto& c : table.columns) columns.push_back({{"name", c.name}, {"affinity", sql::to_string(c.affinity)}});
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = json::array();
    for (const auto& v : row) r.push_back(to_json(v));
    rows.push_back(std::move(r));
  }
  return {{"columns", std::move(columns)}, {"rows", std::move(rows)},      {"truncated", table.truncated},
          {"row_cap", table.row_cap},      {"elapsed_ms", table.elapsed_ms}};
}

ResultTable result_from_json(const json& j) {
  ResultTable t;
  for (const auto& c : j.at("columns")) {
    t.columns.push_back({c.at("name").get<std::string>(), sql::affinity_from_string(c.value("affinity", "numeric"))});
  }
  for (const auto& r : j.at("rows")) {
    std::vector<Value> row;
    for (const auto& v : r) row.push_back(value_from_json(v));
    t.rows.push_back(std::move(row));
  }
  t.truncated = j.value("truncated", false);
  t.row_cap = j.value("row_cap", static_cast<std::int64_t>(0));
  t.elapsed_ms = j.value("elapsed_ms", 0.0);
  return t;
}

bool same_value(const Value& a, const Value& b) {
  if (rank(a) != rank(b)) return false;
  switch (rank(a)) {
    case 0: return true;
    case 1: {
      const double x = numeric(a);
      const double y = numeric(b);
      return x == y || std::fabs(x - y) <= 1e-9 * std::max(std::fabs(x), std::fabs(y));
    }
    case 2: return std::get<std::string>(a) == std::get<std::string>(b);
    default: return std::get<Blob>(a).bytes == std::get<Blob>(b).bytes;
  }
}

bool same_rows(const ResultTable& a, const ResultTable& b, bool ordered) {
  if (a.rows.size() != b.rows.size()) return false;
  if (ordered) {
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      if (!rows_equal(a.rows[i], b.rows[i])) return false;
    }
    return true;
  }
  auto x = a.rows;
  auto y = b.rows;
  std::sort(x.begin(), x.end(), row_less);
  std::sort(y.begin(), y.end(), row_less);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!rows_equal(x[i], y[i])) return false;
  }
  return true;
}

}  // namespace groundsql::db
