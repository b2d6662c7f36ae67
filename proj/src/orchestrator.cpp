#include "forumsim/orchestrator.hpp"

#include <algorithm>
#include <set>

#include "forumsim/errors.hpp"
#include "forumsim/llm_client.hpp"

namespace forumsim {

namespace {

constexpr std::string_view kReferenceCorrection =
    "Your previous reply did not quote or reference any earlier post. Rewrite it and cite at "
    "least one earlier post as [Round <number>] <author>.";

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string describe(const BackendSpec& spec) {
  return std::visit(Overloaded{[](const ScriptedPolicy& p) { return describe(p); },
                               [](const LlmBinding& b) { return "endpoint:" + b.endpoint; }},
                    spec);
}

std::string_view to_string(ReferenceEnforcement e) noexcept {
  return e == ReferenceEnforcement::Warn ? "warn" : "reject_and_reprompt_once";
}

std::string_view to_string(WarningKind k) noexcept {
  switch (k) {
    case WarningKind::MissingReference: return "missing_reference";
    case WarningKind::DanglingReference: return "dangling_reference";
    case WarningKind::EmptyBody: return "empty_body";
    case WarningKind::StanceFallback: return "stance_fallback";
    case WarningKind::InitialStanceDeviation: return "initial_stance_deviation";
  }
  return "unknown";
}

std::vector<std::string> validate_trial_config(const TrialConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.topic.question.empty()) problems.emplace_back("topic question must be non-empty");
  if (cfg.personas.size() < 2) {
    problems.push_back("at least 2 personas are required (personas >= 2), got " +
                       std::to_string(cfg.personas.size()));
  }
  if (cfg.rounds_total < 2) {
    problems.push_back("rounds_total >= 2 is required, got " + std::to_string(cfg.rounds_total));
  }
  std::set<std::string> seen;
  for (const auto& p : cfg.personas) {
    if (p.id.empty()) {
      problems.emplace_back("persona id must be non-empty");
      continue;
    }
    if (!seen.insert(p.id).second) {
      problems.push_back("persona id '" + p.id + "' is not unique (ids must be unique)");
    }
    auto it = cfg.backends.find(p.id);
    if (it == cfg.backends.end()) {
      problems.push_back("persona '" + p.id + "' has no backend");
    } else if (const auto* policy = std::get_if<ScriptedPolicy>(&it->second); policy && policy->step < 1) {
      problems.push_back("persona '" + p.id + "': scripted step must be >= 1");
    }
  }
  for (const auto& [id, spec] : cfg.backends) {
    if (!seen.count(id)) problems.push_back("backend assigned to unknown persona '" + id + "'");
  }
  return problems;
}

std::vector<StructuralWarning> validate_post(const Post& p, std::span<const Persona> personas,
                                             std::span<const Post> prior) {
  std::vector<StructuralWarning> out;
  auto warn = [&](WarningKind k, std::string detail) {
    out.push_back({k, p.author, p.round, std::move(detail)});
  };

  if (p.round >= 2 && p.references.empty()) {
    warn(WarningKind::MissingReference, "no earlier post quoted or referenced");
  }
  for (const auto& ref : p.references) {
    const bool found = std::any_of(prior.begin(), prior.end(), [&](const Post& q) {
      return q.round == ref.round && q.author == ref.author;
    });
    if (!found) {
      warn(WarningKind::DanglingReference, "reference to [Round " + std::to_string(ref.round) + "] " +
                                               ref.author + " which does not precede this post");
    }
  }
  if (p.body.find_first_not_of(" \t\r\n") == std::string::npos) {
    warn(WarningKind::EmptyBody, "post body is empty");
  }
  if (p.stance_source == StanceSource::FallbackPrevious) {
    warn(WarningKind::StanceFallback, "no stance found in reply, previous stance carried over");
  }
  if (p.round == 1) {
    auto it = std::find_if(personas.begin(), personas.end(),
                           [&](const Persona& per) { return per.id == p.author; });
    if (it != personas.end() && it->initial_stance != p.declared_stance) {
      warn(WarningKind::InitialStanceDeviation,
           "declared " + std::string(label(p.declared_stance)) + " but persona stance is " +
               std::string(label(it->initial_stance)));
    }
  }
  return out;
}

std::vector<StructuralWarning> validate_post(const Post& p, const TrialConfig& cfg,
                                             std::span<const Post> prior) {
  return validate_post(p, cfg.personas, prior);
}

std::vector<StructuralWarning> validate_transcript(const Transcript& t) {
  std::vector<StructuralWarning> out;
  const std::span<const Post> posts(t.posts);
  for (std::size_t k = 0; k < posts.size(); ++k) {
    auto w = validate_post(posts[k], t.personas, posts.first(k));
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

std::unique_ptr<AgentBackend> make_backend(const BackendSpec& spec, std::size_t agent_index,
                                           std::uint64_t trial_seed,
                                           const EndpointRegistry* endpoints) {
  if (const auto* policy = std::get_if<ScriptedPolicy>(&spec)) {
    return std::make_unique<ScriptedBackend>(*policy,
                                             derive_seed(trial_seed ^ policy->rng_seed, agent_index));
  }
  const auto& binding = std::get<LlmBinding>(spec);
  auto client = endpoints ? endpoints->find(binding.endpoint) : nullptr;
  if (!client) throw ConfigError({"unknown endpoint '" + binding.endpoint + "'"});
  return std::make_unique<LlmBackend>(std::move(client));
}

TrialRun run_trial(const TrialConfig& cfg, std::span<AgentBackend* const> backends) {
  if (auto problems = validate_trial_config(cfg); !problems.empty()) throw ConfigError(problems);
  if (backends.size() != cfg.personas.size()) {
    throw ConfigError({"expected one backend per persona"});
  }

  TrialRun run;
  Transcript& t = run.transcript;
  t.trial_id = cfg.trial_id;
  t.topic = cfg.topic;
  t.personas = cfg.personas;
  t.rounds_total = cfg.rounds_total;
  t.seed = cfg.seed;
  t.experiment = cfg.experiment;
  t.group_label = cfg.group_label;
  for (std::size_t i = 0; i < cfg.personas.size(); ++i) {
    if (i) t.backend_descriptor += ';';
    t.backend_descriptor += cfg.personas[i].id + "=" + backends[i]->describe();
  }
  t.posts.reserve(t.expected_post_count());

  std::vector<Stance> latest;
  for (const auto& p : cfg.personas) latest.push_back(p.initial_stance);

  std::uint64_t sequence = 1;
  for (int round = 1; round <= cfg.rounds_total; ++round) {
    for (std::size_t i = 0; i < cfg.personas.size(); ++i) {
      const Persona& persona = cfg.personas[i];
      AgentContext ctx{persona, cfg.topic, round, cfg.rounds_total, t.posts, latest[i], std::nullopt};

      auto make_post = [&](AgentReply reply) {
        return Post{cfg.trial_id, round,       persona.id, sequence, std::move(reply.body),
                    reply.declared_stance, std::move(reply.references), reply.stance_source};
      };

      Post post;
      std::vector<StructuralWarning> warnings;
      try {
        post = make_post(compose_post(*backends[i], ctx));
        warnings = validate_post(post, cfg, t.posts);
        if (cfg.reference_enforcement == ReferenceEnforcement::RejectAndRepromptOnce &&
            round >= 2 && post.references.empty()) {
          ctx.correction = std::string(kReferenceCorrection);
          post = make_post(compose_post(*backends[i], ctx));
          warnings = validate_post(post, cfg, t.posts);
        }
      } catch (const BackendError& e) {
        t.abort_reason = e.what();
        return run;
      }

      run.warnings.insert(run.warnings.end(), warnings.begin(), warnings.end());
      // Stored references only ever name strictly earlier posts, and round 1
      // carries none; the citation text stays in the body either way.
      std::erase_if(post.references, [&](const Reference& ref) {
        return round == 1 || std::none_of(t.posts.begin(), t.posts.end(), [&](const Post& q) {
                 return q.round == ref.round && q.author == ref.author;
               });
      });
      latest[i] = post.declared_stance;
      t.posts.push_back(std::move(post));
      ++sequence;
    }
  }
  return run;
}

TrialRun run_trial(const TrialConfig& cfg, const EndpointRegistry* endpoints) {
  if (auto problems = validate_trial_config(cfg); !problems.empty()) throw ConfigError(problems);
  std::vector<std::unique_ptr<AgentBackend>> owned;
  std::vector<AgentBackend*> ptrs;
  for (std::size_t i = 0; i < cfg.personas.size(); ++i) {
    owned.push_back(make_backend(cfg.backends.at(cfg.personas[i].id), i, cfg.seed, endpoints));
    ptrs.push_back(owned.back().get());
  }
  return run_trial(cfg, std::span<AgentBackend* const>(ptrs));
}

std::vector<RoundSummary> round_summaries(const Transcript& t) {
  if (!t.complete()) {
    throw DomainError("round summaries need a complete transcript ('" + t.trial_id + "' has " +
                      std::to_string(t.posts.size()) + " of " +
                      std::to_string(t.expected_post_count()) + " posts)");
  }
  const std::size_t agents = t.personas.size();
  std::vector<RoundSummary> out;
  out.reserve(static_cast<std::size_t>(t.rounds_total));
  for (int r = 1; r <= t.rounds_total; ++r) {
    RoundSummary s;
    s.round = r;
    std::vector<Stance> stances;
    const std::size_t base = static_cast<std::size_t>(r - 1) * agents;
    for (std::size_t i = 0; i < agents; ++i) {
      const Post& p = t.posts[base + i];
      if (p.round != r || p.author != t.personas[i].id) {
        throw DomainError("transcript '" + t.trial_id + "' is not in round-robin order at sequence " +
                          std::to_string(p.sequence));
      }
      s.latest_stances.emplace_back(p.author, p.declared_stance);
      stances.push_back(p.declared_stance);
    }
    s.distribution = distribution_from_stances(stances);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace forumsim
