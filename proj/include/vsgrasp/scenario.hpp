#pragma once

#include <stdexcept>
#include <string>

#include "vsgrasp/sim.hpp"

namespace vsgrasp {

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& why) : std::runtime_error(why) {}
};

/// Parse the key-value scenario format. Lines are `key value...`, `#` starts
/// a comment, unknown keys are errors. Keys not present keep Scenario's
/// defaults.
Scenario parse_scenario_text(const std::string& text);

/// Load and parse a scenario file; ScenarioError on missing or invalid input.
Scenario load_scenario(const std::string& path);

}  // namespace vsgrasp
