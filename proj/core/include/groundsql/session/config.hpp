#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "groundsql/db/result_table.hpp"
#include "groundsql/error.hpp"
#include "groundsql/link/similarity.hpp"

namespace groundsql::session {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

struct NlqConfig {
  std::string provider = "fixture";  // fixture | http
  std::vector<std::string> fixtures;  // question maps, first match wins
  std::string url;
  int timeout_ms = 10000;
};

struct BackendConfig {
  std::string backend = "rules";  // see refine::make_backend
  std::string url;
  int timeout_ms = 5000;
};

struct Config {
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Registry id -> database file.
  std::map<std::string, std::string> databases;
  db::ExecLimits limits;
  NlqConfig nlq;
  BackendConfig refine;
  double link_min_similarity = link::kDefaultMinSimilarity;
  int session_idle_seconds = 1800;
  std::string audit_log;  // file for raw provider output; empty logs to stderr
};

/// Relative paths inside the document resolve against `base_dir`.
Config config_from_json(const nlohmann::json& j, const std::string& base_dir);
Config load_config(const std::string& path);

}  // namespace groundsql::session
