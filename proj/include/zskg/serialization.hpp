#pragma once

#include <json.hpp>

#include "zskg/spaces.hpp"

namespace zskg {

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace zskg
