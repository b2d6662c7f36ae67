#include "forumsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "forumsim/errors.hpp"

namespace forumsim {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "name",           "group_label",  "repetitions", "master_seed", "parallelism", "rounds_total",
    "reference_enforcement", "majority_scope", "retry_budget", "topic", "personas", "endpoints",
    "groups",         "description"};

const std::set<std::string, std::less<>> kEndpointKeys = {
    "base_url",    "model",       "api_key_env",      "temperature",    "max_tokens",
    "timeout_ms",  "max_retries", "retry_backoff_ms", "max_concurrent", "reprompt_on_missing_stance"};

const std::set<std::string, std::less<>> kPersonaKeys = {
    "id", "display_name", "demographics", "communicative_style", "initial_stance", "receptiveness",
    "backend"};

json parse_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

/// Small helper that reads typed fields and records type errors.
class Reader {
 public:
  Reader(const json& obj, std::string where, std::vector<std::string>& problems)
      : obj_(obj), where_(std::move(where)), problems_(problems) {}

  template <class T>
  T get(const char* key, T fallback) const {
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return fallback;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::runtime_error("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::runtime_error("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::runtime_error("");
        if constexpr (std::is_unsigned_v<T>) {
          if (!it->is_number_unsigned()) throw std::runtime_error("");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::runtime_error("");
      }
      return it->get<T>();
    } catch (const std::exception&) {
      problems_.push_back(where_ + key + ": wrong type");
      return fallback;
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void unknown_keys(const std::set<std::string, std::less<>>& allowed) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!allowed.count(it.key())) problems_.push_back(where_ + "unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::vector<std::string>& problems_;
};

std::optional<Stance> stance_from_json(const json& v) {
  if (v.is_number_integer()) {
    const auto n = v.get<std::int64_t>();
    if (n < -2 || n > 2) return std::nullopt;
    return static_cast<Stance>(n);
  }
  if (v.is_string()) return parse_label(v.get<std::string>());
  return std::nullopt;
}

BackendSpec parse_backend(const json& b, const std::string& where, std::vector<std::string>& problems) {
  if (!b.is_object()) {
    problems.push_back(where + "backend must be an object");
    return ScriptedPolicy::stubborn();
  }
  Reader r(b, where + "backend.", problems);
  const auto type = r.get<std::string>("type", "scripted");
  if (type == "llm") {
    r.unknown_keys({"type", "endpoint"});
    const auto endpoint = r.get<std::string>("endpoint", "");
    if (endpoint.empty()) problems.push_back(where + "backend.endpoint is required for llm backends");
    return LlmBinding{endpoint};
  }
  if (type != "scripted") {
    problems.push_back(where + "backend.type must be 'scripted' or 'llm'");
    return ScriptedPolicy::stubborn();
  }
  r.unknown_keys({"type", "policy", "step", "seed"});
  const auto policy_name = r.get<std::string>("policy", "stubborn");
  const auto kind = policy_kind_from_string(policy_name);
  if (!kind) {
    problems.push_back(where + "backend.policy '" + policy_name +
                       "' is not one of stubborn, conformist, contrarian, seeded_random");
    return ScriptedPolicy::stubborn();
  }
  ScriptedPolicy p;
  p.kind = *kind;
  p.step = r.get<int>("step", 1);
  p.rng_seed = r.get<std::uint64_t>("seed", 0);
  if (p.step < 1) problems.push_back(where + "backend.step must be >= 1");
  return p;
}

EndpointConfig parse_endpoint(const std::string& name, const json& e, std::vector<std::string>& problems) {
  EndpointConfig cfg;
  cfg.name = name;
  const std::string where = "endpoints." + name + ".";
  if (!e.is_object()) {
    problems.push_back(where + " must be an object");
    return cfg;
  }
  Reader r(e, where, problems);
  r.unknown_keys(kEndpointKeys);
  if (e.contains("api_key")) problems.push_back(where + "api keys must come from api_key_env, never inline");
  cfg.base_url = r.get<std::string>("base_url", "");
  cfg.model = r.get<std::string>("model", "");
  cfg.api_key_env = r.get<std::string>("api_key_env", "");
  cfg.temperature = r.get<double>("temperature", cfg.temperature);
  cfg.max_tokens = r.get<int>("max_tokens", cfg.max_tokens);
  cfg.request_timeout = std::chrono::milliseconds{r.get<std::int64_t>("timeout_ms", cfg.request_timeout.count())};
  cfg.max_retries = r.get<int>("max_retries", cfg.max_retries);
  cfg.retry_backoff_base =
      std::chrono::milliseconds{r.get<std::int64_t>("retry_backoff_ms", cfg.retry_backoff_base.count())};
  cfg.max_concurrent = r.get<int>("max_concurrent", cfg.max_concurrent);
  cfg.reprompt_on_missing_stance = r.get<bool>("reprompt_on_missing_stance", false);
  return cfg;
}

}  // namespace

void apply_overrides(json& doc, std::span<const std::string> overrides, std::vector<std::string>& problems) {
  if (!doc.is_object()) return;
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      problems.push_back("override '" + item + "' is not of the form key=value");
      continue;
    }
    const std::string key = item.substr(0, eq);
    const json value = parse_value(item.substr(eq + 1));

    if (key.rfind("endpoints.", 0) == 0) {
      // Endpoint names may contain dots ("qwen2.5-7b"); field names never do.
      const auto dot = key.rfind('.');
      const std::string name = dot == std::string::npos || dot < 10 ? "" : key.substr(10, dot - 10);
      const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
      if (name.empty() || !kEndpointKeys.count(field)) {
        problems.push_back("override '" + key + "' is not a documented endpoint field");
      } else if (!doc.contains("endpoints") || !doc["endpoints"].contains(name)) {
        problems.push_back("override '" + key + "' names unknown endpoint '" + name + "'");
      } else {
        doc["endpoints"][name][field] = field == "base_url" || field == "model" || field == "api_key_env"
                                             ? json(item.substr(eq + 1))
                                             : value;
      }
      continue;
    }
    if (std::find(kOverrideKeys.begin(), kOverrideKeys.end(), key) == kOverrideKeys.end()) {
      problems.push_back("override key '" + key + "' is not supported");
      continue;
    }
    if (key == "llm_endpoint") {
      if (doc.contains("personas") && doc["personas"].is_array()) {
        for (auto& p : doc["personas"]) {
          if (p.is_object()) p["backend"] = {{"type", "llm"}, {"endpoint", item.substr(eq + 1)}};
        }
      }
      continue;
    }
    const bool textual = key == "name" || key == "group_label" || key == "reference_enforcement" ||
                         key == "majority_scope";
    doc[key] = textual ? json(item.substr(eq + 1)) : value;
  }
}

ExperimentSetup parse_setup(const json& doc, std::vector<std::string>& problems) {
  ExperimentSetup setup;
  if (!doc.is_object()) {
    problems.emplace_back("config must be a JSON object");
    return setup;
  }
  Reader r(doc, "", problems);
  r.unknown_keys(kTopLevelKeys);

  ExperimentConfig& e = setup.experiment;
  e.name = r.get<std::string>("name", e.name);
  e.group_label = r.get<std::string>("group_label", "");
  e.repetitions = r.get<int>("repetitions", e.repetitions);
  e.master_seed = r.get<std::uint64_t>("master_seed", 0);
  e.parallelism = r.get<int>("parallelism", 1);
  e.retry_budget = r.get<int>("retry_budget", 0);
  e.trial.rounds_total = r.get<int>("rounds_total", kDefaultRounds);

  const auto enforcement = r.get<std::string>("reference_enforcement", "warn");
  if (enforcement == "warn") {
    e.trial.reference_enforcement = ReferenceEnforcement::Warn;
  } else if (enforcement == "reject_and_reprompt_once") {
    e.trial.reference_enforcement = ReferenceEnforcement::RejectAndRepromptOnce;
  } else {
    problems.push_back("reference_enforcement must be 'warn' or 'reject_and_reprompt_once'");
  }
  const auto scope = r.get<std::string>("majority_scope", "inclusive");
  if (scope == "inclusive") {
    e.majority_scope = MajorityScope::Inclusive;
  } else if (scope == "exclusive") {
    e.majority_scope = MajorityScope::Exclusive;
  } else {
    problems.push_back("majority_scope must be 'inclusive' or 'exclusive'");
  }

  if (doc.contains("topic") && doc["topic"].is_object()) {
    Reader t(doc["topic"], "topic.", problems);
    t.unknown_keys({"id", "question"});
    e.trial.topic.id = t.get<std::string>("id", "topic");
    e.trial.topic.question = t.get<std::string>("question", "");
  } else {
    problems.emplace_back("topic is required (object with id and question)");
  }

  if (doc.contains("endpoints")) {
    if (!doc["endpoints"].is_object()) {
      problems.emplace_back("endpoints must be an object");
    } else {
      for (auto it = doc["endpoints"].begin(); it != doc["endpoints"].end(); ++it) {
        setup.endpoints[it.key()] = parse_endpoint(it.key(), it.value(), problems);
      }
    }
  }

  if (doc.contains("personas") && doc["personas"].is_array()) {
    std::size_t idx = 0;
    for (const auto& jp : doc["personas"]) {
      const std::string where = "personas[" + std::to_string(idx++) + "].";
      if (!jp.is_object()) {
        problems.push_back(where + " must be an object");
        continue;
      }
      Reader pr(jp, where, problems);
      pr.unknown_keys(kPersonaKeys);
      Persona p;
      p.id = pr.get<std::string>("id", "");
      p.display_name = pr.get<std::string>("display_name", p.id);
      p.demographics = pr.get<std::string>("demographics", "");
      p.communicative_style = pr.get<std::string>("communicative_style", "");
      p.receptiveness = pr.get<std::string>("receptiveness", "");
      if (!jp.contains("initial_stance")) {
        problems.push_back(where + "initial_stance is required");
      } else if (auto s = stance_from_json(jp["initial_stance"])) {
        p.initial_stance = *s;
      } else {
        problems.push_back(where + "initial_stance must be a label or an integer in [-2, 2]");
      }
      const BackendSpec spec = jp.contains("backend") ? parse_backend(jp["backend"], where, problems)
                                                      : BackendSpec{ScriptedPolicy::stubborn()};
      if (const auto* b = std::get_if<LlmBinding>(&spec); b && !b->endpoint.empty() &&
                                                          !setup.endpoints.count(b->endpoint)) {
        problems.push_back(where + "backend refers to unknown endpoint '" + b->endpoint + "'");
      }
      if (!p.id.empty()) e.trial.backends.emplace(p.id, spec);
      e.trial.personas.push_back(std::move(p));
    }
  } else {
    problems.emplace_back("personas is required (array)");
  }

  if (doc.contains("groups")) {
    if (!doc["groups"].is_object()) {
      problems.emplace_back("groups must be an object");
    } else {
      for (auto it = doc["groups"].begin(); it != doc["groups"].end(); ++it) {
        if (!it->is_array()) {
          problems.push_back("groups." + it.key() + " must be an array of endpoint names");
          continue;
        }
        for (const auto& n : *it) {
          if (!n.is_string() || !setup.endpoints.count(n.get<std::string>())) {
            problems.push_back("groups." + it.key() + " names an unknown endpoint");
          } else {
            setup.groups[it.key()].push_back(n.get<std::string>());
          }
        }
      }
    }
  }

  // Structural invariants (personas >= 2, rounds_total >= 2, unique ids...).
  for (auto& p : validate_trial_config(e.trial)) {
    if (std::find(problems.begin(), problems.end(), p) == problems.end()) problems.push_back(std::move(p));
  }
  if (e.name.empty()) problems.emplace_back("name must be non-empty");
  if (e.repetitions < 1) problems.emplace_back("repetitions must be >= 1");
  if (e.parallelism < 1) problems.emplace_back("parallelism must be >= 1");
  if (e.retry_budget < 0) problems.emplace_back("retry_budget must be >= 0");
  for (const auto& [name, ep] : setup.endpoints) {
    for (auto& p : validate_endpoint(ep)) problems.push_back(std::move(p));
  }
  return setup;
}

ExperimentSetup load_setup(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file '" + path.string() + "'"});
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError({"config file '" + path.string() + "' is not valid JSON"});

  std::vector<std::string> problems;
  apply_overrides(doc, overrides, problems);
  auto setup = parse_setup(doc, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return setup;
}

EndpointRegistry make_registry(const ExperimentSetup& setup) {
  std::set<std::string> used;
  for (const auto& [id, spec] : setup.experiment.trial.backends) {
    if (const auto* b = std::get_if<LlmBinding>(&spec)) used.insert(b->endpoint);
  }
  EndpointRegistry registry;
  for (const auto& name : used) {
    if (auto it = setup.endpoints.find(name); it != setup.endpoints.end()) registry.add(it->second);
  }
  return registry;
}

std::vector<Persona> default_personas() {
  return {
      {"role_a", "Role A", "34-year-old schoolteacher from a mid-sized city",
       "idealistic and warm; argues from shared values and future generations", Stance::Support,
       "receptive: supports the proposal until strong counterarguments are presented"},
      {"role_b", "Role B", "52-year-old small-business owner in manufacturing",
       "blunt and numbers-driven; cites costs and jobs", Stance::StronglyOppose,
       "stubborn: rarely concedes a point"},
      {"role_c", "Role C", "27-year-old software developer who rents in the city centre",
       "analytical and even-handed; asks clarifying questions", Stance::Neutral,
       "receptive: open to well-evidenced arguments from either side"},
      {"role_d", "Role D", "45-year-old farmer from a rural region",
       "practical and plain-spoken; draws on day-to-day experience", Stance::Oppose,
       "moderately receptive: will move on concrete local evidence"},
      {"role_e", "Role E", "38-year-old climate researcher at a public university",
       "passionate and technical; cites studies and data", Stance::StronglySupport,
       "stubborn: considers the evidence settled"},
      {"role_f", "Role F", "61-year-old retired civil servant in a suburban town",
       "measured and conciliatory; looks for compromise", Stance::Neutral,
       "receptive: tends to follow the emerging consensus"},
  };
}

Topic default_topic() {
  return {"environmental-policy", "Should governments adopt stringent environmental policies?"};
}

nlohmann::ordered_json default_personas_document() {
  nlohmann::ordered_json doc;
  doc["topic"] = {{"id", default_topic().id}, {"question", default_topic().question}};
  auto& arr = doc["personas"] = nlohmann::ordered_json::array();
  for (const auto& p : default_personas()) {
    nlohmann::ordered_json jp;
    jp["id"] = p.id;
    jp["display_name"] = p.display_name;
    jp["demographics"] = p.demographics;
    jp["communicative_style"] = p.communicative_style;
    jp["initial_stance"] = std::string(label(p.initial_stance));
    jp["receptiveness"] = p.receptiveness;
    jp["backend"] = {{"type", "scripted"}, {"policy", "stubborn"}};
    arr.push_back(std::move(jp));
  }
  return doc;
}

}  // namespace forumsim
