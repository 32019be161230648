#pragma once

#include <stdexcept>
#include <string>

namespace groundsql {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag ("ParseError", "ExecError", ...) that the HTTP layer
/// and the CLI map onto status and exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

}  // namespace groundsql
