#include "forumsim/agents.hpp"

#include <algorithm>
#include <exception>

#include "forumsim/errors.hpp"
#include "forumsim/metrics.hpp"

namespace forumsim {

AgentReply compose_post(AgentBackend& backend, const AgentContext& ctx) {
  if (ctx.round < 1) {
    throw DomainError("compose_post: round must be >= 1, got " + std::to_string(ctx.round));
  }
  try {
    return backend.compose(ctx);
  } catch (const BackendError&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError(ctx.persona.id, ctx.round, e.what());
  }
}

std::string_view to_string(ScriptedPolicy::Kind k) noexcept {
  switch (k) {
    case ScriptedPolicy::Kind::Stubborn: return "stubborn";
    case ScriptedPolicy::Kind::Conformist: return "conformist";
    case ScriptedPolicy::Kind::Contrarian: return "contrarian";
    case ScriptedPolicy::Kind::SeededRandom: return "seeded_random";
  }
  return "stubborn";
}

std::optional<ScriptedPolicy::Kind> policy_kind_from_string(std::string_view s) noexcept {
  if (s == "stubborn") return ScriptedPolicy::Kind::Stubborn;
  if (s == "conformist") return ScriptedPolicy::Kind::Conformist;
  if (s == "contrarian") return ScriptedPolicy::Kind::Contrarian;
  if (s == "seeded_random") return ScriptedPolicy::Kind::SeededRandom;
  return std::nullopt;
}

std::string describe(const ScriptedPolicy& p) {
  std::string out = "scripted:";
  out += to_string(p.kind);
  switch (p.kind) {
    case ScriptedPolicy::Kind::Conformist:
    case ScriptedPolicy::Kind::Contrarian:
      out += "(step=" + std::to_string(p.step) + ")";
      break;
    case ScriptedPolicy::Kind::SeededRandom:
      out += "(seed=" + std::to_string(p.rng_seed) + ")";
      break;
    case ScriptedPolicy::Kind::Stubborn:
      break;
  }
  return out;
}

Stance scripted_next_stance(const ScriptedPolicy& policy, Stance own,
                            std::span<const Stance> others_latest, SplitMix64& rng) {
  if (others_latest.empty()) {
    throw DomainError("scripted_next_stance needs at least one other agent's stance");
  }
  const int step = std::max(policy.step, 1);

  switch (policy.kind) {
    case ScriptedPolicy::Kind::Stubborn:
      return own;

    case ScriptedPolicy::Kind::SeededRandom:
      return kAllStances[rng.uniform(kAllStances.size())];

    case ScriptedPolicy::Kind::Conformist:
    case ScriptedPolicy::Kind::Contrarian: {
      std::vector<Stance> group(others_latest.begin(), others_latest.end());
      group.push_back(own);
      const auto majority = majority_stance(group);
      if (!majority) return own;

      const int gap = value(*majority) - value(own);
      if (policy.kind == ScriptedPolicy::Kind::Conformist) {
        // Never overshoot the majority.
        const int move = std::min(step, std::abs(gap));
        return shift_clamped(own, gap > 0 ? move : -move);
      }
      if (gap != 0) return shift_clamped(own, gap > 0 ? -step : step);
      // Sitting on the majority: head for the opposite pole.
      if (value(*majority) == 0) return own;
      return shift_clamped(own, value(*majority) > 0 ? -step : step);
    }
  }
  return own;
}

std::vector<Stance> latest_stances_of_others(std::span<const Post> visible, std::string_view self) {
  std::vector<std::string_view> authors;
  std::vector<Stance> latest;
  for (const Post& p : visible) {
    if (p.author == self) continue;
    auto it = std::find(authors.begin(), authors.end(), p.author);
    if (it == authors.end()) {
      authors.push_back(p.author);
      latest.push_back(p.declared_stance);
    } else {
      latest[static_cast<std::size_t>(it - authors.begin())] = p.declared_stance;
    }
  }
  return latest;
}

std::string scripted_body(int round, Stance stance) {
  static constexpr std::string_view kVerb[] = {"strongly oppose", "oppose", "am neutral on",
                                               "support", "strongly support"};
  std::string body = "Round " + std::to_string(round) + ": I ";
  body += kVerb[index_of(stance)];
  body += " the proposal.\nSTANCE: ";
  body += label(stance);
  return body;
}

ScriptedBackend::ScriptedBackend(ScriptedPolicy policy, std::uint64_t stream_seed)
    : policy_(policy), rng_(stream_seed) {}

AgentReply ScriptedBackend::compose(const AgentContext& ctx) {
  AgentReply reply;
  reply.stance_source = StanceSource::Scripted;

  if (ctx.round == 1) {
    reply.declared_stance = ctx.persona.initial_stance;
  } else {
    const auto others = latest_stances_of_others(ctx.visible_posts, ctx.persona.id);
    reply.declared_stance = scripted_next_stance(policy_, ctx.own_previous_stance, others, rng_);
    if (!ctx.visible_posts.empty()) {
      const Post& last = ctx.visible_posts.back();
      reply.references.push_back({last.round, last.author});
    }
  }
  reply.body = scripted_body(ctx.round, reply.declared_stance);
  return reply;
}

std::string ScriptedBackend::describe() const { return forumsim::describe(policy_); }

}  // namespace forumsim
