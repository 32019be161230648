#include "groundsql/session/server.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "groundsql/db/gateway.hpp"
#include "groundsql/sql/printer.hpp"

namespace groundsql::session {

using nlohmann::json;

json view_to_json(const View& view) {
  return {{"plan", explain::to_json(view.plan)},
          {"final_result", db::to_json(view.final_result)},
          {"sql", view.sql},
          {"digest", view.digest},
          {"history",
           {{"cursor", view.history_cursor},
            {"size", view.history_size},
            {"can_undo", view.history_cursor > 0},
            {"can_redo", view.history_cursor + 1 < view.history_size}}}};
}

int status_for(const std::string& kind) {
  static const std::map<std::string, int> kStatus = {
      {"UnknownSession", 404},        {"UnknownDatabase", 404},  {"UnknownTable", 404},
      {"UnknownStep", 404},           {"InvalidPrefix", 404},    {"ConflictError", 409},
      {"NothingToUndo", 409},         {"NothingToRedo", 409},    {"NoQuery", 409},
      {"InvalidQuestion", 422},       {"InvalidEdit", 422},      {"InvalidQuery", 422},
      {"ParseError", 422},            {"ResolveError", 422},     {"UnparsableStep", 422},
      {"InvalidSqlFromProvider", 422}, {"NonSelectRejected", 422}, {"ExecError", 422},
      {"UnsupportedConstruct", 422},  {"FormatError", 400},      {"ProviderError", 502},
      {"BackendError", 502},          {"Timeout", 504}};
  auto it = kStatus.find(kind);
  return it == kStatus.end() ? 500 : it->second;
}

namespace {

json diagnostics_json(const std::vector<sql::Diagnostic>& diagnostics) {
  json out = json::array();
  for (const auto& d : diagnostics) {
    json j = {{"code", d.code}, {"unit", d.unit}, {"message", d.message}};
    if (d.clause) j["clause"] = std::string(sql::to_string(*d.clause));
    out.push_back(std::move(j));
  }
  return out;
}

json error_json(const Error& e) {
  json body = {{"kind", e.kind()}, {"message", e.what()}};
  if (auto* x = dynamic_cast<const db::ExecError*>(&e)) body["sql"] = x->sql();
  if (auto* x = dynamic_cast<const refine::ConflictError*>(&e)) body["diagnostics"] = diagnostics_json(x->diagnostics());
  if (auto* x = dynamic_cast<const refine::UnparsableStep*>(&e)) body["step"] = {{"unit", x->unit()}, {"index", x->step()}};
  if (auto* x = dynamic_cast<const nlq::InvalidSqlFromProvider*>(&e)) {
    body["raw"] = x->raw();
    body["diagnostics"] = diagnostics_json(x->diagnostics());
  }
  return {{"error", body}};
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error("FormatError", std::string("request body is not JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw Error("FormatError", std::string("missing field ") + name);
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error("FormatError", std::string("field ") + name + " has the wrong type");
  }
}

std::size_t to_index(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 0) throw std::invalid_argument(what);
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw Error("FormatError", std::string("bad ") + what + ": " + text);
  }
}

}  // namespace

struct ApiServer::Impl {
  SessionManager& manager;
  httplib::Server server;
  int bound_port = -1;

  explicit Impl(SessionManager& m) : manager(m) {
    // httplib also sets SO_REUSEPORT, which would let a second server share
    // the port instead of failing to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    routes();
  }

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        reply(res, status_for(e.kind()), error_json(e));
      } catch (const std::exception& e) {
        spdlog::error("unhandled error on {} {}: {}", req.method, req.path, e.what());
        reply(res, 500, {{"error", {{"kind", "InternalError"}, {"message", e.what()}}}});
      }
    };
  }

  void routes() {
    server.Get("/databases", guarded([this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& id : manager.database_ids()) {
        json entry = {{"id", id}};
        try {
          json tables = json::array();
          for (const auto& t : manager.database(id)->introspect().tables) tables.push_back(t.name);
          entry["tables"] = tables;
        } catch (const Error& e) {
          entry["error"] = e.what();
        }
        list.push_back(std::move(entry));
      }
      reply(res, 200, {{"databases", list}});
    }));

    server.Get(R"(/databases/([^/]+)/schema)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, sql::to_json(manager.database(req.matches[1])->introspect()));
    }));

    server.Get(R"(/databases/([^/]+)/tables/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto handle = manager.database(req.matches[1]);
      const std::int64_t page = req.has_param("page") ? static_cast<std::int64_t>(to_index(req.get_param_value("page"), "page")) : 1;
      const std::int64_t size =
          req.has_param("page_size") ? static_cast<std::int64_t>(to_index(req.get_param_value("page_size"), "page_size")) : 50;
      std::optional<db::BrowseFilter> filter;
      if (req.has_param("filter") && !req.get_param_value("filter").empty()) {
        filter = db::BrowseFilter{req.get_param_value("column"), req.get_param_value("filter")};
      }
      reply(res, 200, db::to_json(handle->browse(req.matches[2], page, size, filter)));
    }));

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      auto s = manager.create_session(field<std::string>(body, "database"));
      reply(res, 201, {{"session_id", s->id()}, {"database", s->database_id()}, {"schema", sql::to_json(s->schema())}});
    }));

    server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = manager.get(req.matches[1]);
      json body = {{"session_id", s->id()}, {"database", s->database_id()}, {"question", s->question()}};
      if (auto v = s->view()) body.update(view_to_json(*v));
      reply(res, 200, body);
    }));

    server.Delete(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!manager.close(req.matches[1])) throw UnknownSession(req.matches[1]);
      reply(res, 200, {{"closed", true}});
    }));

    server.Post(R"(/sessions/([^/]+)/ask)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      auto s = manager.get(req.matches[1]);
      reply(res, 200, view_to_json(*s->ask(field<std::string>(body, "question"))));
    }));

    server.Post(R"(/sessions/([^/]+)/load)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      auto s = manager.get(req.matches[1]);
      reply(res, 200, view_to_json(*s->load_sql(field<std::string>(body, "sql"))));
    }));

    server.Get(R"(/sessions/([^/]+)/steps/(\d+)/(\d+)/result)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto s = manager.get(req.matches[1]);
                 auto r = s->intermediate(to_index(req.matches[2], "unit"), to_index(req.matches[3], "step"));
                 reply(res, 200,
                       {{"result", db::to_json(r.result)},
                        {"temp_sql", r.sql},
                        {"synthesized_select", r.prefix.synthesized_select}});
               }));

    server.Get(R"(/sessions/([^/]+)/hover)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = manager.get(req.matches[1]);
      link::StepId step;
      if (req.has_param("step")) {
        const std::string v = req.get_param_value("step");
        const auto dot = v.find('.');
        if (dot == std::string::npos) throw Error("FormatError", "step must look like <unit>.<index>");
        step = {to_index(v.substr(0, dot), "unit"), to_index(v.substr(dot + 1), "step")};
      } else {
        step = {to_index(req.get_param_value("unit"), "unit"), to_index(req.get_param_value("index"), "step")};
      }
      const auto offset = to_index(req.get_param_value("offset"), "offset");
      auto target = s->hover(step, offset);
      reply(res, 200, target ? link::to_json(*target) : json(nullptr));
    }));

    server.Post(R"(/sessions/([^/]+)/relink)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      auto s = manager.get(req.matches[1]);
      json spans = json::array();
      for (const auto& span : s->relink(field<std::size_t>(body, "unit"), field<std::string>(body, "text"))) {
        spans.push_back(explain::to_json(span));
      }
      reply(res, 200, {{"spans", spans}});
    }));

    server.Post(R"(/sessions/([^/]+)/edits)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_of(req);
      auto s = manager.get(req.matches[1]);
      std::vector<refine::EditOp> edits;
      const json list = body.contains("edits") ? body["edits"] : body;
      if (!list.is_array()) throw Error("FormatError", "edits must be an array");
      for (const auto& e : list) edits.push_back(refine::edit_from_json(e));
      reply(res, 200, view_to_json(*s->edit(edits)));
    }));

    server.Post(R"(/sessions/([^/]+)/undo)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, view_to_json(*manager.get(req.matches[1])->undo()));
    }));

    server.Post(R"(/sessions/([^/]+)/redo)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, view_to_json(*manager.get(req.matches[1])->redo()));
    }));

    server.Get(R"(/sessions/([^/]+)/sql)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      reply(res, 200, {{"sql", manager.get(req.matches[1])->sql()}});
    }));
  }
};

ApiServer::ApiServer(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {}

ApiServer::~ApiServer() { stop(); }

bool ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->bound_port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  return impl_->bound_port > 0;
}

int ApiServer::port() const { return impl_->bound_port; }

void ApiServer::run() { impl_->server.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace groundsql::session
