#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace groundsql::util {

/// POST a JSON body and parse the JSON reply. Throws groundsql::Error with
/// kind `error_kind` on transport failures, non-2xx replies or bad JSON.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body, int timeout_ms,
                         const std::string& error_kind);

}  // namespace groundsql::util
