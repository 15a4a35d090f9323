#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "uavrate/scenario.hpp"

namespace uvr {

// Strict parse of a scenario params object; unknown keys rejected.
ScenarioParams scenario_params_from_json_obj(const nlohmann::json& jp, const std::string& where);

}  // namespace uvr
