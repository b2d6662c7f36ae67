#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "forumsim/agents.hpp"
#include "forumsim/types.hpp"

namespace forumsim {

class EndpointRegistry;

/// Persona driven by a named chat-completion endpoint.
struct LlmBinding {
  std::string endpoint;

  bool operator==(const LlmBinding&) const = default;
};

using BackendSpec = std::variant<ScriptedPolicy, LlmBinding>;

std::string describe(const BackendSpec& spec);

enum class ReferenceEnforcement : std::uint8_t {
  Warn,                   ///< record a warning, keep the post
  RejectAndRepromptOnce,  ///< ask the agent once more, then keep whatever comes back
};

std::string_view to_string(ReferenceEnforcement e) noexcept;

struct TrialConfig {
  std::string trial_id = "trial_000";
  Topic topic;
  /// Posting order within every round.
  std::vector<Persona> personas;
  int rounds_total = 5;
  std::map<std::string, BackendSpec> backends;
  std::uint64_t seed = 0;
  ReferenceEnforcement reference_enforcement = ReferenceEnforcement::Warn;
  std::string experiment;
  std::string group_label;
};

inline constexpr int kDefaultRounds = 5;

/// All invariant violations, human readable; empty when valid.
std::vector<std::string> validate_trial_config(const TrialConfig& cfg);

enum class WarningKind : std::uint8_t {
  MissingReference,
  DanglingReference,
  EmptyBody,
  StanceFallback,
  InitialStanceDeviation,
};

std::string_view to_string(WarningKind k) noexcept;

struct StructuralWarning {
  WarningKind kind;
  std::string agent;
  int round = 0;
  std::string detail;

  bool operator==(const StructuralWarning&) const = default;
};

/// Structural checks on a post against the posts before it. Never throws.
std::vector<StructuralWarning> validate_post(const Post& p, std::span<const Persona> personas,
                                             std::span<const Post> prior);
std::vector<StructuralWarning> validate_post(const Post& p, const TrialConfig& cfg,
                                             std::span<const Post> prior);

/// validate_post over every post of a stored transcript.
std::vector<StructuralWarning> validate_transcript(const Transcript& t);

struct TrialRun {
  Transcript transcript;
  std::vector<StructuralWarning> warnings;
};

/// Instantiates the backend for one persona. `trial_seed` and `agent_index`
/// seed scripted random streams; LLM bindings are looked up in `endpoints`.
std::unique_ptr<AgentBackend> make_backend(const BackendSpec& spec, std::size_t agent_index,
                                           std::uint64_t trial_seed,
                                           const EndpointRegistry* endpoints);

/// Round-robin trial with full broadcast. `backends` is parallel to
/// cfg.personas. Backend failures do not throw: the partial transcript comes
/// back with abort_reason set.
TrialRun run_trial(const TrialConfig& cfg, std::span<AgentBackend* const> backends);

/// Same, with backends built from cfg.backends. Throws ConfigError on an
/// invalid config.
TrialRun run_trial(const TrialConfig& cfg, const EndpointRegistry* endpoints = nullptr);

struct RoundSummary {
  int round = 0;
  /// In persona order.
  std::vector<std::pair<std::string, Stance>> latest_stances;
  StanceDistribution distribution;
};

/// One summary per round of a complete transcript (DomainError otherwise).
std::vector<RoundSummary> round_summaries(const Transcript& t);

}  // namespace forumsim
