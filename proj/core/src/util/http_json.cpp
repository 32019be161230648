#include "util/http_json.hpp"

#include <httplib.h>

#include "groundsql/error.hpp"

namespace groundsql::util {

nlohmann::json post_json(const std::string& url, const nlohmann::json& body, int timeout_ms,
                         const std::string& error_kind) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  const auto seconds = timeout_ms / 1000;
  const auto micros = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) throw Error(error_kind, "request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw Error(error_kind, "request to " + url + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(error_kind, std::string("reply from ") + url + " is not JSON: " + e.what());
  }
}

}  // namespace groundsql::util
