#pragma once

#include <string>

#include "quatlag/simulation.hpp"

namespace quatlag {

/// Serialize a scenario to canonical JSON (all keys present, matrices as
/// nested arrays). from/to round-trip losslessly.
std::string config_to_json(const ScenarioConfig& config);

/// Parse a scenario from JSON text. Unknown top-level keys and malformed
/// values raise ConfigError.
ScenarioConfig config_from_json(const std::string& text);

/// Load a scenario from a JSON file (ConfigError on I/O failure).
ScenarioConfig load_config(const std::string& path);

/// Built-in scenarios: "1.1", "1.2", "2.1", "2.2", "2.3", "2.4".
/// Throws ConfigError for unknown names.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

} // namespace quatlag
