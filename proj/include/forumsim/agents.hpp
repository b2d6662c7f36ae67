#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forumsim/rng.hpp"
#include "forumsim/types.hpp"

namespace forumsim {

/// Everything an agent may look at when writing its post. Posts are
/// broadcast, so `visible_posts` is the full log so far.
struct AgentContext {
  const Persona& persona;
  const Topic& topic;
  int round;
  int rounds_total;
  std::span<const Post> visible_posts;
  Stance own_previous_stance;
  /// Set when the manager rejected the previous attempt and asks again.
  std::optional<std::string> correction;
};

struct AgentReply {
  std::string body;
  Stance declared_stance = Stance::Neutral;
  std::vector<Reference> references;
  StanceSource stance_source = StanceSource::Scripted;
};

/// Produces one post for one agent. An instance belongs to a single trial and
/// is called strictly sequentially.
class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual AgentReply compose(const AgentContext& ctx) = 0;
  /// Short text identifying the backend and its parameters, recorded in
  /// transcripts.
  virtual std::string describe() const = 0;
};

/// Runs the backend, turning any failure into a BackendError that names the
/// agent and round.
AgentReply compose_post(AgentBackend& backend, const AgentContext& ctx);

struct ScriptedPolicy {
  enum class Kind : std::uint8_t { Stubborn, Conformist, Contrarian, SeededRandom };

  Kind kind = Kind::Stubborn;
  int step = 1;
  std::uint64_t rng_seed = 0;

  static ScriptedPolicy stubborn() { return {Kind::Stubborn, 1, 0}; }
  static ScriptedPolicy conformist(int step = 1) { return {Kind::Conformist, step, 0}; }
  static ScriptedPolicy contrarian(int step = 1) { return {Kind::Contrarian, step, 0}; }
  static ScriptedPolicy seeded_random(std::uint64_t seed) { return {Kind::SeededRandom, 1, seed}; }

  bool operator==(const ScriptedPolicy&) const = default;
};

std::string_view to_string(ScriptedPolicy::Kind k) noexcept;
std::optional<ScriptedPolicy::Kind> policy_kind_from_string(std::string_view s) noexcept;
std::string describe(const ScriptedPolicy& p);

/// Next stance for a scripted agent. `others_latest` must be non-empty
/// (DomainError otherwise). Only SeededRandom touches `rng`.
Stance scripted_next_stance(const ScriptedPolicy& policy, Stance own,
                            std::span<const Stance> others_latest, SplitMix64& rng);

/// Most recent declared stance of every author other than `self`, in order of
/// first appearance.
std::vector<Stance> latest_stances_of_others(std::span<const Post> visible, std::string_view self);

class ScriptedBackend final : public AgentBackend {
 public:
  /// `stream_seed` seeds this agent's private generator (SeededRandom only).
  ScriptedBackend(ScriptedPolicy policy, std::uint64_t stream_seed);

  AgentReply compose(const AgentContext& ctx) override;
  std::string describe() const override;

 private:
  ScriptedPolicy policy_;
  SplitMix64 rng_;
};

/// Templated body used by scripted agents.
std::string scripted_body(int round, Stance stance);

}  // namespace forumsim
