#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace groundsql::session {
class ApiServer;
}

namespace groundsql::cli {

// Exit codes shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitBindFailed = 3;

struct ExplainOptions {
  std::string db_path;
  std::string sql_path;  // ignored when `query` is set
  std::optional<std::string> query;
  bool json = false;
  bool steps = false;         // clause kind and clause SQL under each step
  bool intermediate = false;  // row count of each step's prefix query
};

int cmd_explain(const ExplainOptions& options, std::ostream& out, std::ostream& err);

/// `corpus_dir` holds task directories, directly or under tasks/.
int cmd_corpus(const std::string& corpus_dir, std::ostream& out, std::ostream& err);

/// Blocks while serving. `on_ready` runs once the port is bound (tests use it
/// to learn the port and stop the server).
int cmd_serve(const std::string& config_path, std::ostream& out, std::ostream& err,
              const std::function<void(session::ApiServer&)>& on_ready = {}, std::optional<int> port_override = {});

/// SQLUCID_CONFIG, when set, takes precedence over the --config flag.
std::string effective_config_path(const std::string& flag_value);

}  // namespace groundsql::cli
