#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace codrill {

/// Base error carrying a stable machine-readable code (used by the CLI).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DegenerateConfigurationError : public Error {
 public:
  explicit DegenerateConfigurationError(const std::string& msg) : Error("degenerate_configuration", msg) {}
};

class IllConditionedError : public Error {
 public:
  explicit IllConditionedError(const std::string& msg) : Error("ill_conditioned", msg) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error("format_error", msg) {}
};

class SchemaVersionError : public Error {
 public:
  explicit SchemaVersionError(const std::string& msg) : Error("schema_version_mismatch", msg) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& msg) : Error("configuration_error", msg) {}
};

/// Validation failure that enumerates every offending field.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error("validation_failed", join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed:";
    for (const auto& i : issues) out += "\n  - " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

}  // namespace codrill
