#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace forumsim {

/// Precondition or domain violation on a pure operation (bad stance value,
/// empty input, incomplete transcript handed to a metric).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Configuration rejected by validation. Carries every problem found, not
/// just the first one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// An agent backend failed to produce a post. Aborts the current trial.
class BackendError : public std::runtime_error {
 public:
  BackendError(std::string agent_id, int round, const std::string& what);
  const std::string& agent_id() const noexcept { return agent_id_; }
  int round() const noexcept { return round_; }

 private:
  std::string agent_id_;
  int round_;
};

class LlmError : public std::runtime_error {
 public:
  LlmError(const std::string& what, int http_status, int attempts);
  /// Final HTTP status, or 0 when no response was received.
  int http_status() const noexcept { return http_status_; }
  int attempts() const noexcept { return attempts_; }

 private:
  int http_status_;
  int attempts_;
};

/// Retries exhausted, connection failures, non-retryable HTTP status.
class TransportError : public LlmError {
 public:
  using LlmError::LlmError;
};

/// Endpoint answered but the body is not a chat-completion response.
class ProtocolError : public LlmError {
 public:
  using LlmError::LlmError;
};

class IoError : public std::runtime_error {
 public:
  IoError(std::filesystem::path path, const std::string& what);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

class CorruptTranscriptError : public std::runtime_error {
 public:
  CorruptTranscriptError(std::size_t line, const std::string& what);
  /// 1-based line number of the offending record (0 = whole file).
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaVersionError : public std::runtime_error {
 public:
  SchemaVersionError(long long found, long long supported);
  long long found() const noexcept { return found_; }

 private:
  long long found_;
};

}  // namespace forumsim
