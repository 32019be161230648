#include "groundsql/session/session.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/spdlog.h>

#include "groundsql/explain/explainer.hpp"
#include "groundsql/sql/parser.hpp"
#include "groundsql/sql/printer.hpp"

namespace groundsql::session {

Session::Session(std::string id, std::string database_id, std::shared_ptr<db::Database> database,
                 SessionServices services)
    : id_(std::move(id)),
      database_id_(std::move(database_id)),
      database_(std::move(database)),
      schema_(database_->introspect()),
      services_(std::move(services)),
      last_used_(std::chrono::steady_clock::now()) {}

std::string Session::question() const {
  std::lock_guard lock(view_mutex_);
  return question_;
}

std::shared_ptr<const View> Session::view() const {
  std::lock_guard lock(view_mutex_);
  return view_;
}

void Session::touch() const {
  std::lock_guard lock(view_mutex_);
  last_used_ = std::chrono::steady_clock::now();
}

std::chrono::steady_clock::time_point Session::last_used() const {
  std::lock_guard lock(view_mutex_);
  return last_used_;
}

std::shared_ptr<const View> Session::require_view() const {
  touch();
  auto v = view();
  if (!v) throw Error("NoQuery", "the session has no query yet; ask a question first");
  return v;
}

std::shared_ptr<const View> Session::make_view(const refine::Snapshot& snapshot) const {
  auto v = std::make_shared<View>();
  v->plan = snapshot.plan;
  v->links = link::build_links(v->plan, schema_);
  v->sql = sql::print_sql(v->plan.source_ast);
  v->final_result = database_->execute_readonly(v->sql, services_.limits);
  v->digest = snapshot.digest;
  return v;
}

void Session::publish(std::shared_ptr<const View> view) {
  std::lock_guard lock(view_mutex_);
  view_ = std::move(view);
  last_used_ = std::chrono::steady_clock::now();
}

std::shared_ptr<const View> Session::ask(const std::string& question) {
  std::lock_guard write(write_mutex_);
  touch();
  if (std::all_of(question.begin(), question.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    throw Error("InvalidQuestion", "the question is empty");
  }
  if (!services_.provider) throw Error("ConfigError", "no question-to-SQL provider configured");
  nlq::NlqRequest request{question, schema_, database_id_};
  nlq::NlqResponse response = nlq::generate_sql(request, *services_.provider);
  refine::History history(explain::explain(response.ast, schema_));
  auto v = std::const_pointer_cast<View>(make_view(history.current()));
  v->history_cursor = history.cursor();
  v->history_size = history.size();
  history_ = std::move(history);
  {
    std::lock_guard lock(view_mutex_);
    question_ = question;
  }
  publish(v);
  return v;
}

std::shared_ptr<const View> Session::load_sql(const std::string& sql_text) {
  std::lock_guard write(write_mutex_);
  touch();
  sql::QueryAst ast = sql::parse_sql(sql_text, &schema_);
  auto diagnostics = sql::validate(ast, schema_);
  if (!diagnostics.empty()) throw Error("InvalidQuery", sql::to_string(diagnostics.front()));
  refine::History history(explain::explain(ast, schema_));
  auto v = std::const_pointer_cast<View>(make_view(history.current()));
  v->history_cursor = history.cursor();
  v->history_size = history.size();
  history_ = std::move(history);
  publish(v);
  return v;
}

std::shared_ptr<const View> Session::edit(const std::vector<refine::EditOp>& edits) {
  std::lock_guard write(write_mutex_);
  auto current = require_view();
  if (edits.empty()) return current;
  if (!services_.backend) throw Error("ConfigError", "no clause backend configured");
  refine::EditOutcome outcome =
      refine::apply_edits(current->plan, edits, schema_, *services_.backend, services_.min_similarity);
  refine::History next = *history_;
  next.push(std::move(outcome.plan));
  auto v = std::const_pointer_cast<View>(make_view(next.current()));
  v->history_cursor = next.cursor();
  v->history_size = next.size();
  history_ = std::move(next);
  publish(v);
  return v;
}

std::shared_ptr<const View> Session::undo() {
  std::lock_guard write(write_mutex_);
  require_view();
  refine::History next = *history_;
  next.undo();
  auto v = std::const_pointer_cast<View>(make_view(next.current()));
  v->history_cursor = next.cursor();
  v->history_size = next.size();
  history_ = std::move(next);
  publish(v);
  return v;
}

std::shared_ptr<const View> Session::redo() {
  std::lock_guard write(write_mutex_);
  require_view();
  refine::History next = *history_;
  next.redo();
  auto v = std::const_pointer_cast<View>(make_view(next.current()));
  v->history_cursor = next.cursor();
  v->history_size = next.size();
  history_ = std::move(next);
  publish(v);
  return v;
}

stepwise::IntermediateResult Session::intermediate(std::size_t unit_index, std::size_t step_index) const {
  auto v = require_view();
  return stepwise::intermediate_result(*database_, v->plan, unit_index, step_index, services_.limits);
}

std::optional<link::HighlightTarget> Session::hover(link::StepId step, std::size_t offset) const {
  auto v = require_view();
  return link::resolve_hover(v->links, step, offset);
}

std::vector<explain::EntitySpan> Session::relink(std::size_t unit_index, const std::string& text) const {
  auto v = require_view();
  return link::relink_step(text, schema_, v->plan, {unit_index, services_.min_similarity});
}

std::string Session::sql() const { return require_view()->sql; }

SessionServices services_from_config(const Config& config) {
  if (!config.audit_log.empty() && !spdlog::get("groundsql.nlq")) {
    try {
      spdlog::basic_logger_mt("groundsql.nlq", config.audit_log)->flush_on(spdlog::level::info);
    } catch (const spdlog::spdlog_ex& e) {
      throw ConfigError(std::string("cannot open audit log: ") + e.what());
    }
  }
  SessionServices s;
  s.limits = config.limits;
  s.min_similarity = config.link_min_similarity;
  if (config.nlq.provider == "http") {
    s.provider = std::make_shared<nlq::HttpProvider>(config.nlq.url, config.nlq.timeout_ms);
  } else {
    try {
      s.provider = std::make_shared<nlq::FixtureProvider>(config.nlq.fixtures);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    s.backend = refine::make_backend(config.refine.backend, config.refine.url, config.refine.timeout_ms);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return s;
}

SessionManager::SessionManager(Config config) : config_(std::move(config)), services_(services_from_config(config_)) {}

SessionManager::SessionManager(Config config, SessionServices services)
    : config_(std::move(config)), services_(std::move(services)) {}

std::vector<std::string> SessionManager::database_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, path] : config_.databases) ids.push_back(id);
  return ids;
}

std::shared_ptr<db::Database> SessionManager::database(const std::string& id) {
  auto it = config_.databases.find(id);
  if (it == config_.databases.end()) throw UnknownDatabase(id);
  std::lock_guard lock(mutex_);
  auto& handle = browse_handles_[id];
  if (!handle) handle = db::open_database(it->second);
  return handle;
}

std::string SessionManager::fresh_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::shared_ptr<Session> SessionManager::create_session(const std::string& database_id) {
  auto it = config_.databases.find(database_id);
  if (it == config_.databases.end()) throw UnknownDatabase(database_id);
  expire_idle();
  auto handle = db::open_database(it->second);
  auto session = std::make_shared<Session>(fresh_id(), database_id, std::move(handle), services_);
  std::lock_guard lock(mutex_);
  sessions_[session->id()] = session;
  return session;
}

std::shared_ptr<Session> SessionManager::get(const std::string& session_id) {
  expire_idle();
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw UnknownSession(session_id);
  return it->second;
}

bool SessionManager::close(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  return sessions_.erase(session_id) > 0;
}

std::size_t SessionManager::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t SessionManager::expire_idle() {
  if (config_.session_idle_seconds <= 0) return 0;
  const auto cutoff = std::chrono::steady_clock::now() - std::chrono::seconds(config_.session_idle_seconds);
  std::lock_guard lock(mutex_);
  return std::erase_if(sessions_, [&](const auto& entry) { return entry.second->last_used() < cutoff; });
}

}  // namespace groundsql::session
