#include "groundsql/session/config.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace groundsql::session {

namespace {

std::string resolve_path(const std::string& p, const std::string& base_dir) {
  if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

Config config_from_json(const nlohmann::json& j, const std::string& base_dir) {
  Config c;
  try {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    if (j.contains("server")) {
      c.host = j["server"].value("host", c.host);
      c.port = j["server"].value("port", c.port);
    }
    if (j.contains("databases")) {
      for (const auto& [id, path] : j["databases"].items()) c.databases[id] = resolve_path(path.get<std::string>(), base_dir);
    }
    if (j.contains("limits")) {
      c.limits.row_cap = j["limits"].value("row_cap", c.limits.row_cap);
      c.limits.timeout_ms = j["limits"].value("timeout_ms", c.limits.timeout_ms);
    }
    if (j.contains("nlq")) {
      const auto& n = j["nlq"];
      c.nlq.provider = n.value("provider", c.nlq.provider);
      c.nlq.url = n.value("url", c.nlq.url);
      c.nlq.timeout_ms = n.value("timeout_ms", c.nlq.timeout_ms);
      if (n.contains("fixtures")) {
        for (const auto& f : n["fixtures"]) c.nlq.fixtures.push_back(resolve_path(f.get<std::string>(), base_dir));
      }
    }
    if (j.contains("refine")) {
      const auto& r = j["refine"];
      c.refine.backend = r.value("backend", c.refine.backend);
      c.refine.url = r.value("url", c.refine.url);
      c.refine.timeout_ms = r.value("timeout_ms", c.refine.timeout_ms);
    }
    if (j.contains("link")) c.link_min_similarity = j["link"].value("min_similarity", c.link_min_similarity);
    if (j.contains("session")) c.session_idle_seconds = j["session"].value("idle_timeout_s", c.session_idle_seconds);
    c.audit_log = resolve_path(j.value("audit_log", std::string{}), base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad configuration: ") + e.what());
  }

  if (c.port < 0 || c.port > 65535) throw ConfigError("server.port out of range");
  if (c.limits.row_cap <= 0 || c.limits.timeout_ms <= 0) throw ConfigError("limits must be positive");
  if (c.link_min_similarity < 0.0 || c.link_min_similarity > 1.0) throw ConfigError("link.min_similarity must be in [0, 1]");
  if (c.nlq.provider != "fixture" && c.nlq.provider != "http") throw ConfigError("unknown nlq.provider " + c.nlq.provider);
  if (c.nlq.provider == "http" && c.nlq.url.empty()) throw ConfigError("nlq.url is required for the http provider");
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("configuration " + path + " is not JSON: " + e.what());
  }
  const auto dir = std::filesystem::absolute(path).parent_path().string();
  return config_from_json(j, dir);
}

}  // namespace groundsql::session
