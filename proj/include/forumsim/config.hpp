#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "forumsim/experiment.hpp"
#include "forumsim/llm_client.hpp"

namespace forumsim {

/// Everything a config file describes.
struct ExperimentSetup {
  ExperimentConfig experiment;
  /// Endpoint presets by name (only the ones personas use get clients).
  std::map<std::string, EndpointConfig> endpoints;
  /// Group label -> endpoint names; naming only, no behavior attached.
  std::map<std::string, std::vector<std::string>> groups;
};

/// Keys accepted by --set, besides endpoints.<name>.<field>.
inline constexpr std::array<std::string_view, 10> kOverrideKeys = {
    "name",         "repetitions",          "master_seed",       "parallelism",
    "rounds_total", "reference_enforcement", "majority_scope",   "retry_budget",
    "group_label",  "llm_endpoint"};

/// Applies "key=value" overrides to a raw config document. Problems are
/// appended, nothing throws.
void apply_overrides(nlohmann::json& doc, std::span<const std::string> overrides,
                     std::vector<std::string>& problems);

/// Parses and validates; collects every problem instead of stopping at the
/// first one.
ExperimentSetup parse_setup(const nlohmann::json& doc, std::vector<std::string>& problems);

/// Reads, overrides, parses and validates. Throws ConfigError listing all
/// problems.
ExperimentSetup load_setup(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Registry holding clients for the endpoints referenced by personas.
EndpointRegistry make_registry(const ExperimentSetup& setup);

/// The built-in six personas: one per stance level plus a second Neutral.
std::vector<Persona> default_personas();
Topic default_topic();

/// Editable config document around the default personas.
nlohmann::ordered_json default_personas_document();

}  // namespace forumsim
