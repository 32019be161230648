#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "groundsql/db/gateway.hpp"
#include "groundsql/error.hpp"
#include "groundsql/explain/plan.hpp"
#include "groundsql/link/linker.hpp"
#include "groundsql/nlq/provider.hpp"
#include "groundsql/refine/backend.hpp"
#include "groundsql/refine/refiner.hpp"
#include "groundsql/session/config.hpp"
#include "groundsql/stepwise/prefix.hpp"

namespace groundsql::session {

class UnknownDatabase : public Error {
 public:
  explicit UnknownDatabase(const std::string& id) : Error("UnknownDatabase", "no database registered as " + id) {}
};

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& id) : Error("UnknownSession", "no session " + id) {}
};

/// What the user currently sees: one history snapshot plus derived data.
struct View {
  explain::ExplanationPlan plan;
  link::LinkMap links;
  db::ResultTable final_result;
  std::string sql;
  std::string digest;
  std::size_t history_cursor = 0;
  std::size_t history_size = 0;
};

struct SessionServices {
  std::shared_ptr<nlq::NlqProvider> provider;
  std::shared_ptr<refine::ClauseBackend> backend;
  db::ExecLimits limits;
  double min_similarity = link::kDefaultMinSimilarity;
};

/// One user's loop over one database. Mutating calls are serialized; reads
/// work on an immutable view and may run alongside them.
class Session {
 public:
  Session(std::string id, std::string database_id, std::shared_ptr<db::Database> database, SessionServices services);

  const std::string& id() const { return id_; }
  const std::string& database_id() const { return database_id_; }
  const sql::Schema& schema() const { return schema_; }
  const db::Database& database() const { return *database_; }
  std::string question() const;

  /// nullptr before the first successful ask.
  std::shared_ptr<const View> view() const;

  std::shared_ptr<const View> ask(const std::string& question);
  /// Replaces the history with an explanation of `sql_text` (no provider).
  std::shared_ptr<const View> load_sql(const std::string& sql_text);
  std::shared_ptr<const View> edit(const std::vector<refine::EditOp>& edits);
  std::shared_ptr<const View> undo();
  std::shared_ptr<const View> redo();

  stepwise::IntermediateResult intermediate(std::size_t unit_index, std::size_t step_index) const;
  std::optional<link::HighlightTarget> hover(link::StepId step, std::size_t offset) const;
  std::vector<explain::EntitySpan> relink(std::size_t unit_index, const std::string& text) const;
  std::string sql() const;

  std::chrono::steady_clock::time_point last_used() const;

 private:
  std::shared_ptr<const View> require_view() const;
  std::shared_ptr<const View> make_view(const refine::Snapshot& snapshot) const;
  void publish(std::shared_ptr<const View> view);
  void touch() const;

  std::string id_;
  std::string database_id_;
  std::shared_ptr<db::Database> database_;
  sql::Schema schema_;
  SessionServices services_;

  std::mutex write_mutex_;
  mutable std::mutex view_mutex_;
  std::optional<refine::History> history_;
  std::string question_;
  std::shared_ptr<const View> view_;
  mutable std::chrono::steady_clock::time_point last_used_;
};

/// Registry of databases and live sessions.
class SessionManager {
 public:
  explicit SessionManager(Config config);
  SessionManager(Config config, SessionServices services);

  const Config& config() const { return config_; }
  std::vector<std::string> database_ids() const;
  /// A shared handle per database for browsing (sessions get their own).
  std::shared_ptr<db::Database> database(const std::string& id);

  std::shared_ptr<Session> create_session(const std::string& database_id);
  std::shared_ptr<Session> get(const std::string& session_id);
  bool close(const std::string& session_id);
  std::size_t session_count() const;
  /// Drops sessions idle longer than the configured limit.
  std::size_t expire_idle();

 private:
  std::string fresh_id();

  Config config_;
  SessionServices services_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<db::Database>> browse_handles_;
};

/// Provider and backend described by the configuration.
SessionServices services_from_config(const Config& config);

}  // namespace groundsql::session
