#pragma once

#include <string>

#include "tofra/scenario.hpp"

namespace tofra {

// Versioned JSON scenario files:
// {
//   "format_version": 1,
//   "area": {"w": .., "h": ..},
//   "phy": {"gamma": .., "eta": .., "p_tx": .., "alpha": .., "v": ..},
//   "nodes": [{"id": .., "x": .., "y": .., "role": "source|relay|sink|idle",
//              "tx_prob": ..?}, ...],
//   "flows": [{"id": .., "src": .., "dst": .., "path": [..]}, ...]
// }
//
// Parse errors point at the offending field. Write-then-read round-trips to a
// structurally identical scenario.

inline constexpr int kScenarioFormatVersion = 1;

Scenario scenario_from_json_text(const std::string& text,
                                 const std::string& origin = "<string>");
std::string scenario_to_json_text(const Scenario& scenario);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

}  // namespace tofra
