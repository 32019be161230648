#pragma once

#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "groundsql/session/session.hpp"

namespace groundsql::session {

/// JSON body for a session view: plan, final result, SQL, digest, history.
nlohmann::json view_to_json(const View& view);

/// HTTP status used for an error kind (404 unknown ids, 409 conflicts, ...).
int status_for(const std::string& error_kind);

/// HTTP front end over a SessionManager.
class ApiServer {
 public:
  explicit ApiServer(SessionManager& manager);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Port 0 picks a free port. False when the address cannot be bound.
  bool bind(const std::string& host, int port);
  int port() const;
  /// Serves until stop(); call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace groundsql::session
