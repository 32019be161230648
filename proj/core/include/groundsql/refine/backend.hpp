#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "groundsql/error.hpp"
#include "groundsql/sql/ast.hpp"
#include "groundsql/sql/schema.hpp"

namespace groundsql::refine {

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what) : Error("BackendError", what) {}
};

struct ClauseRequest {
  std::string step_text;
  sql::ClauseKind kind_hint = sql::ClauseKind::kWhere;
  const sql::Schema* schema = nullptr;
  /// FROM tables of the unit being edited.
  std::vector<std::string> scope_tables;
};

/// Turns a sentence the step grammar could not read into one SQL clause
/// ("WHERE ...", "ORDER BY ...", ...). Returning nullopt means "no idea".
/// Whatever comes back is parsed and validated by the caller.
class ClauseBackend {
 public:
  virtual ~ClauseBackend() = default;
  virtual std::string name() const = 0;
  virtual std::optional<std::string> propose(const ClauseRequest& request) = 0;
};

/// Never answers.
class RefusingBackend final : public ClauseBackend {
 public:
  std::string name() const override { return "refusing"; }
  std::optional<std::string> propose(const ClauseRequest&) override { return std::nullopt; }
};

/// Hands the text back unchanged, so users can type a clause in SQL.
class EchoTemplateBackend final : public ClauseBackend {
 public:
  std::string name() const override { return "echo"; }
  std::optional<std::string> propose(const ClauseRequest& request) override;
};

/// Keyword and fuzzy-name heuristics for short constraint sentences such as
/// "Make sure the year in 2022." Works offline.
class RuleBackend final : public ClauseBackend {
 public:
  explicit RuleBackend(double min_similarity = 0.8) : min_similarity_(min_similarity) {}
  std::string name() const override { return "rules"; }
  std::optional<std::string> propose(const ClauseRequest& request) override;

 private:
  double min_similarity_;
};

/// POSTs {step_text, kind_hint, schema} and expects {clause_sql_fragment}.
class HttpBackend final : public ClauseBackend {
 public:
  HttpBackend(std::string url, int timeout_ms);
  std::string name() const override { return "http"; }
  std::optional<std::string> propose(const ClauseRequest& request) override;

 private:
  std::string url_;
  int timeout_ms_;
};

/// Tries each backend in turn; the first answer wins.
class ChainBackend final : public ClauseBackend {
 public:
  explicit ChainBackend(std::vector<std::shared_ptr<ClauseBackend>> chain) : chain_(std::move(chain)) {}
  std::string name() const override;
  std::optional<std::string> propose(const ClauseRequest& request) override;

 private:
  std::vector<std::shared_ptr<ClauseBackend>> chain_;
};

/// "refusing", "echo", "rules", "http" (needs url), or a '+'-joined chain
/// such as "rules+echo". Throws groundsql::Error("ConfigError").
std::shared_ptr<ClauseBackend> make_backend(const std::string& spec, const std::string& url = {}, int timeout_ms = 5000);

}  // namespace groundsql::refine
