// Internal: JSON (de)serialization of DetectorConfig shared by detector.cpp
// and rejuvsim.cpp. Not installed.
#pragma once

#include <string_view>

#include <json.hpp>

#include "agewatch/detector.hpp"

namespace agewatch::detail {

DetectorConfig detector_config_from_json(const nlohmann::json& j, std::string_view origin);
nlohmann::json detector_config_to_json(const DetectorConfig& cfg);

}  // namespace agewatch::detail
