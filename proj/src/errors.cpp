#include "forumsim/errors.hpp"

namespace forumsim {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration";
  for (const auto& p : problems) {
    out += "\n  - ";
    out += p;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

BackendError::BackendError(std::string agent_id, int round, const std::string& what)
    : std::runtime_error("agent '" + agent_id + "' failed in round " + std::to_string(round) + ": " +
                         what),
      agent_id_(std::move(agent_id)),
      round_(round) {}

LlmError::LlmError(const std::string& what, int http_status, int attempts)
    : std::runtime_error(what + " (http status " + std::to_string(http_status) + ", " +
                         std::to_string(attempts) + " attempt" + (attempts == 1 ? "" : "s") + ")"),
      http_status_(http_status),
      attempts_(attempts) {}

IoError::IoError(std::filesystem::path path, const std::string& what)
    : std::runtime_error(path.string() + ": " + what), path_(std::move(path)) {}

CorruptTranscriptError::CorruptTranscriptError(std::size_t line, const std::string& what)
    : std::runtime_error("corrupt transcript at line " + std::to_string(line) + ": " + what),
      line_(line) {}

SchemaVersionError::SchemaVersionError(long long found, long long supported)
    : std::runtime_error("unsupported transcript schema_version " + std::to_string(found) +
                         " (this build reads version " + std::to_string(supported) + ")"),
      found_(found) {}

}  // namespace forumsim
